#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "dpgeo/energy.hpp"
#include "dpgeo/grid.hpp"
#include "dpgeo/mathutil.hpp"
#include "dpgeo/rng.hpp"

namespace dpgeo {

struct DpOptions {
    double tol = 1e-9;          // relative energy change
    int max_outer = 500;        // IRLS outer iterations
    double eps0_scale = 1e-8;   // initial regularizer: eps0_scale * mean(Q)
    double eps_floor = 1e-14;   // floor: eps_floor * mean(Q)
    double linear_tol = 1e-10;  // inner SPD solve contract
    const std::vector<double>* warm_start = nullptr;
};

struct DpSolveResult {
    double value = 0.0;      // the d_p distance, E*^{-1/p}
    double energy = 0.0;     // E* at the optimum
    int iterations = 0;
    double residual = 0.0;   // last relative energy change
    bool converged = false;
    double p = 0.0;
    bool physical_p = true;  // false when p <= continuum dimension
    std::optional<double> estimated_S;
    std::vector<double> potential;  // scaled so E_p = 1; attains 0 at x, value at y
};

namespace detail {

/// Weighted-Laplacian IRLS for min E(f) = sum w_t Q_t(f)^{p/2} with two pinned
/// values f[x]=0, f[y]=1. Each outer iteration solves the weighted quadratic
/// (weights (Q_t + eps)^{(p-2)/2}) by sparse LDLT and takes an exact line
/// search on the convex 1-D section of E.
class IrlsSolver {
  public:
    IrlsSolver(const EnergyModel& model, std::size_t x, std::size_t y)
        : m_(model), x_(x), y_(y) {
        const std::size_t n = m_.n_nodes();
        free_of_node_.assign(n, -1);
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (i != x_ && i != y_) free_of_node_[i] = long(k++);
        n_free_ = k;
        build_pattern();
    }

    DpSolveResult solve(double p, const DpOptions& opt) {
        const std::size_t n = m_.n_nodes();
        std::vector<double> f(n, 0.0);
        f[y_] = 1.0;
        if (opt.warm_start && opt.warm_start->size() == n) {
            f = *opt.warm_start;
            f[x_] = 0.0;
            f[y_] = 1.0;
        } else {
            // harmonic (p = 2) initialization
            std::vector<double> om(m_.n_terms());
            for (std::size_t t = 0; t < om.size(); ++t) om[t] = m_.term_weights()[t];
            assemble_and_solve(om, f);
        }
        std::vector<double> q;
        m_.term_values(f, q);
        double E = energy_from_q(q, p);
        const double meanq = mean(q);
        const double eps_floor = opt.eps_floor * std::max(meanq, 1e-300);
        // a warm start is assumed near-optimal: skip the regularizer
        // continuation and polish at the floor directly
        double eps = (opt.warm_start && opt.warm_start->size() == n)
                         ? eps_floor
                         : opt.eps0_scale * std::max(meanq, 1e-300);

        DpSolveResult res;
        res.p = p;
        int stall = 0;
        int it = 0;
        std::vector<double> om(m_.n_terms()), fhat, dirv, qs, ms, rs;
        for (; it < opt.max_outer; ++it) {
            for (std::size_t t = 0; t < om.size(); ++t)
                om[t] = m_.term_weights()[t] * std::pow(q[t] + eps, 0.5 * p - 1.0);
            fhat = f;
            assemble_and_solve(om, fhat);
            dirv.resize(n);
            for (std::size_t i = 0; i < n; ++i) dirv[i] = fhat[i] - f[i];
            // exact line search on convex phi(t) = E(f + t d)
            m_.section_coeffs(f, dirv, qs, ms, rs);
            const double t_step = line_search(qs, ms, rs, p);
            for (std::size_t i = 0; i < n; ++i) f[i] += t_step * dirv[i];
            m_.term_values(f, q);
            const double E_new = energy_from_q(q, p);
            const double rel = std::abs(E - E_new) / std::max(E_new, 1e-300);
            res.residual = rel;
            if (E_new <= E) E = E_new;
            else { /* numerically flat; keep smaller value */ E = std::min(E, E_new); }
            eps = std::max(0.5 * eps, eps_floor);
            if (rel < opt.tol && eps <= eps_floor * 1.0001) {
                if (++stall >= 3) { ++it; break; }
            } else {
                stall = 0;
            }
        }
        res.iterations = it;
        res.converged = stall >= 3;
        res.energy = E;
        res.value = std::pow(E, -1.0 / p);
        const double scale = std::pow(E, -1.0 / p);
        res.potential.resize(n);
        for (std::size_t i = 0; i < n; ++i) res.potential[i] = f[i] * scale;
        return res;
    }

  private:
    static double mean(const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / double(v.size());
    }

    double energy_from_q(const std::vector<double>& q, double p) const {
        double E = 0.0;
        for (std::size_t t = 0; t < q.size(); ++t)
            E += m_.term_weights()[t] * std::pow(q[t], 0.5 * p);
        return E;
    }

    double line_search(const std::vector<double>& q, const std::vector<double>& m,
                       const std::vector<double>& r, double p) const {
        auto dphi = [&](double t) {
            double s = 0.0;
            for (std::size_t k = 0; k < q.size(); ++k) {
                const double qt = std::max(q[k] + 2.0 * t * m[k] + t * t * r[k], 0.0);
                const double dq = 2.0 * (m[k] + t * r[k]);
                s += m_.term_weights()[k] * 0.5 * p * std::pow(qt, 0.5 * p - 1.0) * dq;
            }
            return s;
        };
        if (dphi(0.0) >= 0.0) return 0.0;  // not a descent direction (at optimum)
        double hi = 1.0;
        while (dphi(hi) < 0.0 && hi < 64.0) hi *= 2.0;
        double lo = hi > 1.0 ? hi * 0.5 : 0.0;
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (dphi(mid) < 0.0) lo = mid;
            else hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    void build_pattern() {
        std::vector<Eigen::Triplet<double>> trips;
        const auto& entries = m_.entries();
        for (std::size_t c = 0; c < m_.comp_offsets().size(); ++c) {
            const std::size_t lo = m_.comp_offsets()[c], hi = m_.comp_end(c);
            for (std::size_t e1 = lo; e1 < hi; ++e1)
                for (std::size_t e2 = lo; e2 < hi; ++e2) {
                    const long i = free_of_node_[entries[e1].node];
                    const long j = free_of_node_[entries[e2].node];
                    if (i >= 0 && j >= 0) trips.emplace_back(int(i), int(j), 0.0);
                }
        }
        A_.resize(long(n_free_), long(n_free_));
        A_.setFromTriplets(trips.begin(), trips.end());
        A_.makeCompressed();
        ldlt_.analyzePattern(A_);
    }

    void assemble_and_solve(const std::vector<double>& om, std::vector<double>& f) {
        // zero values, keep pattern
        for (long k = 0; k < A_.nonZeros(); ++k) A_.valuePtr()[k] = 0.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(long(n_free_));
        const auto& entries = m_.entries();
        std::size_t t = 0;
        for (std::size_t c = 0; c < m_.comp_offsets().size(); ++c) {
            while (c >= m_.term_comp_end()[t]) ++t;
            const double w = om[t];
            if (w == 0.0) continue;
            const std::size_t lo = m_.comp_offsets()[c], hi = m_.comp_end(c);
            // pinned contribution of this component: x pinned to 0, y to 1
            double pinned = 0.0;
            for (std::size_t e = lo; e < hi; ++e)
                if (entries[e].node == y_) pinned += entries[e].coeff;
            for (std::size_t e1 = lo; e1 < hi; ++e1) {
                const long i = free_of_node_[entries[e1].node];
                if (i < 0) continue;
                b[i] -= w * entries[e1].coeff * pinned;
                for (std::size_t e2 = lo; e2 < hi; ++e2) {
                    const long j = free_of_node_[entries[e2].node];
                    if (j >= 0) A_.coeffRef(int(i), int(j)) += w * entries[e1].coeff * entries[e2].coeff;
                }
            }
        }
        // tiny diagonal shift keeps LDLT stable when weights vanish regionally
        for (long i = 0; i < long(n_free_); ++i) A_.coeffRef(int(i), int(i)) += 1e-300;
        ldlt_.factorize(A_);
        if (ldlt_.info() != Eigen::Success)
            throw std::runtime_error("IrlsSolver: inner factorization failed");
        Eigen::VectorXd sol = ldlt_.solve(b);
        for (std::size_t i = 0; i < m_.n_nodes(); ++i) {
            const long k = free_of_node_[i];
            if (k >= 0) f[i] = sol[k];
        }
        f[x_] = 0.0;
        f[y_] = 1.0;
    }

    const EnergyModel& m_;
    std::size_t x_, y_;
    std::size_t n_free_ = 0;
    std::vector<long> free_of_node_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Connectivity on the energy-model graph (components sharing a term).
inline bool connected(const EnergyModel& m, std::size_t x, std::size_t y) {
    std::vector<char> seen(m.n_nodes(), 0);
    std::queue<std::size_t> bfs;
    bfs.push(x);
    seen[x] = 1;
    // adjacency via components
    std::vector<std::vector<std::size_t>> adj(m.n_nodes());
    const auto& entries = m.entries();
    for (std::size_t c = 0; c < m.comp_offsets().size(); ++c) {
        const std::size_t lo = m.comp_offsets()[c], hi = m.comp_end(c);
        for (std::size_t e1 = lo; e1 < hi; ++e1)
            for (std::size_t e2 = e1 + 1; e2 < hi; ++e2) {
                adj[entries[e1].node].push_back(entries[e2].node);
                adj[entries[e2].node].push_back(entries[e1].node);
            }
    }
    while (!bfs.empty()) {
        std::size_t v = bfs.front();
        bfs.pop();
        if (v == y) return true;
        for (std::size_t w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                bfs.push(w);
            }
    }
    return false;
}

}  // namespace detail

/// d_p between two nodes of an energy model: minimizes E_p over fields pinned
/// to 0 at x and 1 at y; d_p = E*^{-1/p} by homogeneity.
inline DpSolveResult dp_distance_model(const EnergyModel& model, std::size_t x, std::size_t y,
                                       double p, const DpOptions& opt = {}) {
    if (!(p > 1.0)) throw std::domain_error("dp_distance: need p > 1");
    if (x == y) {
        DpSolveResult r;
        r.p = p;
        r.converged = true;
        r.value = 0.0;
        r.energy = kInf;
        return r;
    }
    if (!detail::connected(model, x, y)) {
        DpSolveResult r;
        r.p = p;
        r.converged = true;
        r.value = kInf;
        r.energy = 0.0;
        return r;
    }
    detail::IrlsSolver solver(model, x, y);
    return solver.solve(p, opt);
}

inline DpSolveResult dp_distance(const GridManifold& g, std::size_t x, std::size_t y, double p,
                                 const DpOptions& opt = {}) {
    if (x >= g.n_nodes() || y >= g.n_nodes()) throw std::invalid_argument("dp_distance: bad node");
    if (g.is_degenerate(x) || g.is_degenerate(y))
        throw std::domain_error("dp_distance: endpoint on a degenerate node");
    EnergyModel m = EnergyModel::from_grid(g);
    DpSolveResult r = dp_distance_model(m, x, y, p, opt);
    r.physical_p = p > double(g.dim());
    return r;
}

/// Pairwise d_p matrix; diagonal zero, symmetric within solver tolerance.
inline std::vector<std::vector<double>> dp_matrix(const GridManifold& g,
                                                  const std::vector<std::size_t>& points, double p,
                                                  const DpOptions& opt = {}) {
    if (points.size() < 2) throw std::invalid_argument("dp_matrix: need >= 2 points");
    EnergyModel m = EnergyModel::from_grid(g);
    const std::size_t k = points.size();
    std::vector<std::vector<double>> D(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double d = dp_distance_model(m, points[i], points[j], p, opt).value;
            D[i][j] = D[j][i] = d;
        }
    return D;
}

/// d_p from a center to every probe node (used for p-balls and ball volumes).
/// Probes are solved in grid order with warm starts from the previous probe.
inline std::vector<double> dp_field_probes(const GridManifold& g, std::size_t center,
                                           const std::vector<std::size_t>& probes, double p,
                                           const DpOptions& base_opt = {}) {
    EnergyModel m = EnergyModel::from_grid(g);
    std::vector<double> out(probes.size(), 0.0);
    std::vector<double> prev;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (probes[i] == center) {
            out[i] = 0.0;
            continue;
        }
        DpOptions opt = base_opt;
        if (!prev.empty()) opt.warm_start = &prev;
        DpSolveResult r = dp_distance_model(m, center, probes[i], p, opt);
        out[i] = r.value;
        if (r.value > 0.0 && std::isfinite(r.value)) {
            prev.resize(r.potential.size());
            const double s = 1.0 / r.value;  // unscale back to the f(y)=1 gauge
            for (std::size_t kk = 0; kk < prev.size(); ++kk) prev[kk] = r.potential[kk] * s;
        }
    }
    return out;
}

/// Probe-node p-ball: every probe with d_p(center, probe) < radius.
inline std::vector<std::size_t> dp_ball(const GridManifold& g, std::size_t center, double radius,
                                        double p, int probe_stride, const DpOptions& opt = {}) {
    if (!(radius > 0.0)) throw std::invalid_argument("dp_ball: radius > 0");
    std::vector<std::size_t> probes;
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        auto mi = g.multi_index(id);
        bool pick = true;
        for (int a = 0; a < g.dim(); ++a) pick = pick && (mi[std::size_t(a)] % probe_stride == 0);
        if (pick && !g.is_degenerate(id)) probes.push_back(id);
    }
    std::vector<double> vals = dp_field_probes(g, center, probes, p, opt);
    std::vector<std::size_t> ball;
    for (std::size_t i = 0; i < probes.size(); ++i)
        if (vals[i] < radius) ball.push_back(probes[i]);
    return ball;
}

/// Independent oracle for tiny instances (<= 60 nodes): ascends the
/// scale-invariant ratio G(f) = (f[x] - f[y]) / E_p(f)^{1/p}, whose supremum
/// over the unit p-energy ball is exactly d_p. Plain gradient ascent with
/// backtracking from multiple deterministic random starts; shares no code
/// path with the IRLS route.
inline double brute_force_dp(const EnergyModel& model, std::size_t x, std::size_t y, double p,
                             int starts = 4, int iters = 4000, std::uint64_t seed = 416) {
    if (model.n_nodes() > 60) throw std::invalid_argument("brute_force_dp: tiny instances only");
    const std::size_t n = model.n_nodes();
    std::vector<double> q, om, gradE, gradG(n);
    auto ratio = [&](const std::vector<double>& f) {
        const double E = model.p_energy(f, p);
        if (E <= 0.0) return 0.0;
        return (f[x] - f[y]) * std::pow(E, -1.0 / p);
    };
    double best = 0.0;
    for (int s = 0; s < starts; ++s) {
        Rng rng(seed + std::uint64_t(s));
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = s == 0 ? 0.0 : 0.2 * rng.normal();
        f[x] += 0.5;
        f[y] -= 0.5;
        double G = ratio(f);
        double step = 0.5;
        for (int it = 0; it < iters; ++it) {
            model.term_values(f, q);
            om.resize(q.size());
            double E = 0.0;
            for (std::size_t t = 0; t < q.size(); ++t) {
                E += model.term_weights()[t] * std::pow(q[t], 0.5 * p);
                om[t] = model.term_weights()[t] * 0.25 * p * std::pow(q[t] + 1e-300, 0.5 * p - 1.0);
            }
            if (E <= 0.0) break;
            model.quadratic_gradient(f, om, gradE);  // = (p/2) grad E (factor in om)
            const double gap = f[x] - f[y];
            const double Einv = std::pow(E, -1.0 / p);
            // grad G = Einv (e_x - e_y) - gap/p E^{-1/p-1} gradE
            double gnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                gradG[i] = -(gap / p) * Einv / E * 2.0 * gradE[i];
                if (i == x) gradG[i] += Einv;
                if (i == y) gradG[i] -= Einv;
                gnorm += gradG[i] * gradG[i];
            }
            if (gnorm < 1e-28) break;
            bool moved = false;
            for (int bt = 0; bt < 40; ++bt) {
                std::vector<double> fc(n);
                for (std::size_t i = 0; i < n; ++i) fc[i] = f[i] + step * gradG[i];
                const double Gc = ratio(fc);
                if (Gc > G) {
                    f.swap(fc);
                    G = Gc;
                    moved = true;
                    step *= 1.6;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        best = std::max(best, G);
    }
    return best;
}

}  // namespace dpgeo
