#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dpgeo/energy.hpp"
#include "dpgeo/grid.hpp"
#include "dpgeo/mathutil.hpp"
#include "dpgeo/rng.hpp"

namespace dpgeo {

struct EntropyOptions {
    int max_iters = 40000;
    double tol = 1e-12;          // relative W change
    double armijo = 1e-4;
    std::uint64_t seed = 7;
    int extra_random_inits = 0;  // restart-stability studies
};

struct EntropyResult {
    double mu = 0.0;
    double tau = 0.0;
    double w_value = 0.0;
    double el_residual = 0.0;
    double constraint_error = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> minimizer_u;
};

namespace detail {

/// Discrete W machinery on a closed grid. The u-form at scale tau:
///   W(u) = int 4 tau |grad u|^2 + tau R u^2 - u^2 log u^2 - (C0 + d) u^2 dvol,
///   C0 = (d/2) log(4 pi tau),
/// over the constraint int u^2 dvol = 1. The dimension constant is the grid
/// dimension d (in place of the ambient n+1 of the continuum formula).
class WFunctional {
  public:
    WFunctional(const GridManifold& g, double tau)
        : grid_(g), tau_(tau), model_(EnergyModel::from_grid(g)) {
        if (!g.closed()) throw std::domain_error("entropy: grid must be closed (all axes periodic)");
        if (!(tau > 0.0)) throw std::domain_error("entropy: tau > 0");
        if (g.analytic_R()) {
            R_ = *g.analytic_R();
        } else {
            R_.assign(g.n_nodes(), 0.0);
        }
        C_ = 0.5 * double(g.dim()) * std::log(4.0 * 3.14159265358979323846 * tau) + double(g.dim());
        om_.assign(model_.n_terms(), 0.0);
        for (std::size_t t = 0; t < om_.size(); ++t) om_[t] = model_.term_weights()[t];
    }

    const GridManifold& grid() const { return grid_; }
    double tau() const { return tau_; }
    double dim_const() const { return C_; }
    const std::vector<double>& R() const { return R_; }

    double l2_norm_sq(const std::vector<double>& u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += grid_.vol_weight(i) * u[i] * u[i];
        return s;
    }

    void normalize(std::vector<double>& u) const {
        const double s = std::sqrt(l2_norm_sq(u));
        if (s <= 0.0) throw std::domain_error("entropy: zero field");
        for (double& v : u) v /= s;
    }

    double value(const std::vector<double>& u) const {
        double W = 4.0 * tau_ * model_.quadratic(u, om_);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double w = grid_.vol_weight(i);
            if (w <= 0.0) continue;
            const double u2 = u[i] * u[i];
            const double lg = u2 > 0.0 ? std::log(u2) : 0.0;
            W += w * (tau_ * R_[i] * u2 - u2 * lg - C_ * u2);
        }
        return W;
    }

    /// Gradient of W with respect to u (unconstrained).
    void gradient(const std::vector<double>& u, std::vector<double>& out) const {
        model_.quadratic_gradient(u, om_, out);  // = grad of quadratic = 2 A u
        for (std::size_t i = 0; i < u.size(); ++i) {
            out[i] *= 4.0 * tau_;
            const double w = grid_.vol_weight(i);
            if (w <= 0.0) continue;
            const double u2 = u[i] * u[i];
            const double lg = u2 > 0.0 ? std::log(u2) : 0.0;
            out[i] += w * (2.0 * tau_ * R_[i] * u[i] - 2.0 * u[i] * lg - 2.0 * u[i] - 2.0 * C_ * u[i]);
        }
    }

    /// Discrete Laplacian consistent with the quadrature:
    /// (Delta u)_i = -(A u)_i / vol_i with u^T A u ~ int |grad u|^2 dvol.
    void laplacian(const std::vector<double>& u, std::vector<double>& out) const {
        model_.quadratic_gradient(u, om_, out);  // 2 A u
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double w = grid_.vol_weight(i);
            out[i] = w > 0.0 ? -0.5 * out[i] / w : 0.0;
        }
    }

  private:
    const GridManifold& grid_;
    double tau_;
    EnergyModel model_;
    std::vector<double> R_;
    std::vector<double> om_;
    double C_;
};

}  // namespace detail

/// Perelman W-functional in the f-form:
/// (4 pi tau)^{-d/2} int { tau (|grad f|^2 + R) + f - d } e^{-f} dvol.
inline double w_functional(const GridManifold& g, const DiscreteField& f, double tau) {
    detail::WFunctional W(g, tau);
    // evaluate via u^2 = (4 pi tau)^{-d/2} e^{-f}, which reproduces the f-form
    // exactly at the quadrature level
    std::vector<double> u(g.n_nodes());
    const double pref = std::pow(4.0 * 3.14159265358979323846 * tau, -0.25 * double(g.dim()));
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = pref * std::exp(-0.5 * f.values[i]);
    return W.value(u);
}

/// Euler-Lagrange residual of the minimizer equation
///   -4 tau Delta u + tau R u - 2 u log u - (C0 + d + mu) u = 0
/// (L2 norm over the grid measure).
inline double el_residual(const GridManifold& g, const std::vector<double>& u, double tau, double mu) {
    detail::WFunctional W(g, tau);
    std::vector<double> lap;
    W.laplacian(u, lap);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = g.vol_weight(i);
        if (w <= 0.0) continue;
        if (!(u[i] > 0.0)) throw std::domain_error("el_residual: u must be positive");
        const double r = -4.0 * tau * lap[i] + tau * W.R()[i] * u[i] - 2.0 * u[i] * std::log(u[i]) -
                         (W.dim_const() + mu) * u[i];
        s += w * r * r;
    }
    return std::sqrt(s);
}

/// Minimize the u-form of W over the constraint sphere by projected gradient
/// descent in log u (positivity built in), renormalizing every step; Armijo
/// backtracking. Initializations: constant u and a Gaussian bump at the max-R
/// node; best result is returned.
inline EntropyResult mu_entropy(const GridManifold& g, double tau, const EntropyOptions& opt = {}) {
    detail::WFunctional W(g, tau);
    const std::size_t n = g.n_nodes();

    auto descend = [&](std::vector<double> u, int& iters_out) {
        W.normalize(u);
        std::vector<double> w(n), grad(n), cand(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = std::log(std::max(u[i], 1e-300));
        double val = W.value(u);
        double step = 0.1;
        int it = 0;
        for (; it < opt.max_iters; ++it) {
            W.gradient(u, grad);
            // chain rule d/dw = u * d/du, then project out the constraint
            // normal dS/dw_i = 2 vol_i u_i^2 (renormalization direction)
            double gn = 0.0, nn = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] *= u[i];
                const double nrm = 2.0 * g.vol_weight(i) * u[i] * u[i];
                gn += grad[i] * nrm;
                nn += nrm * nrm;
            }
            double gnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                grad[i] -= (gn / std::max(nn, 1e-300)) * 2.0 * g.vol_weight(i) * u[i] * u[i];
                gnorm += grad[i] * grad[i];
            }
            if (gnorm < 1e-26) break;
            bool moved = false;
            for (int bt = 0; bt < 50; ++bt) {
                for (std::size_t i = 0; i < n; ++i) cand[i] = std::exp(w[i] - step * grad[i]);
                W.normalize(cand);
                const double v2 = W.value(cand);
                if (v2 <= val - opt.armijo * step * gnorm) {
                    for (std::size_t i = 0; i < n; ++i) w[i] = std::log(std::max(cand[i], 1e-300));
                    u.swap(cand);
                    const double rel = std::abs(val - v2) / std::max(std::abs(v2), 1e-300);
                    val = v2;
                    moved = true;
                    step *= 1.5;
                    if (rel < opt.tol) it = opt.max_iters;  // converged
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        iters_out = std::min(it, opt.max_iters);
        return std::pair<double, std::vector<double>>(val, u);
    };

    // init 1: constant
    std::vector<double> u0(n, 1.0);
    // init 2: Gaussian bump at the max-R node, width ~ sqrt(2 tau)
    std::size_t peak = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (W.R()[i] > W.R()[peak]) peak = i;
    std::vector<double> u1(n);
    {
        const auto c = g.coords(peak);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = g.coords(i);
            double d2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                double d = x[std::size_t(a)] - c[std::size_t(a)];
                if (g.periodic()[std::size_t(a)]) {
                    const double L = g.spacing()[std::size_t(a)] * double(g.shape()[std::size_t(a)]);
                    d = std::remainder(d, L);
                }
                d2 += d * d;
            }
            u1[i] = std::exp(-d2 / (8.0 * tau));
        }
    }

    EntropyResult best;
    best.tau = tau;
    best.mu = kInf;
    std::vector<std::vector<double>> inits{u0, u1};
    Rng rng(opt.seed);
    for (int e = 0; e < opt.extra_random_inits; ++e) {
        std::vector<double> ur(n);
        for (std::size_t i = 0; i < n; ++i) ur[i] = std::exp(0.3 * rng.normal());
        inits.push_back(std::move(ur));
    }
    for (auto& init : inits) {
        int iters = 0;
        auto [val, u] = descend(init, iters);
        if (val < best.mu) {
            best.mu = val;
            best.w_value = val;
            best.minimizer_u = u;
            best.iterations = iters;
        }
    }
    best.constraint_error = std::abs(W.l2_norm_sq(best.minimizer_u) - 1.0);
    best.el_residual = el_residual(g, best.minimizer_u, tau, best.mu);
    best.converged = best.constraint_error <= 1e-8;
    return best;
}

/// nu(g, tau) = inf over a log-spaced tau' grid in (tau_min, tau].
struct NuResult {
    double nu = 0.0;
    double tau_at_min = 0.0;
    std::vector<double> taus;
    std::vector<double> mus;
};

inline NuResult nu_entropy(const GridManifold& g, double tau, int tau_grid_size = 16,
                           double tau_min_factor = 1.0 / 256.0, const EntropyOptions& opt = {}) {
    NuResult r;
    r.nu = kInf;
    // Resolvability floor: below tau ~ 2 h^2 the minimizer scale sqrt(2 tau)
    // drops under the lattice spacing and the discrete log-Sobolev balance is
    // spurious; the tau' grid never probes subgrid scales.
    double hmax = 0.0;
    for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing()[std::size_t(a)]);
    const double tau_floor = std::min(0.99 * tau, std::max(tau * tau_min_factor, 2.0 * hmax * hmax));
    for (double t : logspace(tau_floor, tau, tau_grid_size)) {
        EntropyResult e = mu_entropy(g, t, opt);
        r.taus.push_back(t);
        r.mus.push_back(e.mu);
        if (e.mu < r.nu) {
            r.nu = e.mu;
            r.tau_at_min = t;
        }
    }
    return r;
}

}  // namespace dpgeo
