#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpgeo/mathutil.hpp"
#include "dpgeo/smoothstep.hpp"

namespace dpgeo {

/// Parameters of the doubly warped building-block metric
/// g = dr^2 + f_{delta,eps}(r)^2 h + phi_{delta,eps}(r)^2 dx^2
/// on R_+ x S^{n-1} x R (ambient dimension n+1).
struct BuildingBlockParams {
    int n = 3;           // sphere-factor dimension parameter; ambient dim n+1
    double delta = 0.0;  // fiber degeneracy exponent
    double eps = 0.1;    // smoothing scale

    /// sigma0 = 10^4 n delta, the cone-deficit amplitude of the radial ODE.
    double sigma0() const { return 1e4 * double(n) * delta; }

    void validate() const {
        if (n < 3) throw std::invalid_argument("BuildingBlockParams: need n >= 3");
        if (!(eps > 0.0 && eps < 0.25)) throw std::invalid_argument("BuildingBlockParams: eps in (0, 1/4)");
        if (!(delta >= 0.0 && delta < 0.25))
            throw std::invalid_argument("BuildingBlockParams: delta in [0, 1/4)");
    }

    /// The radial ODE needs sigma0 <= 1/4 for f to stay positive; phi alone
    /// does not.
    void validate_for_f() const {
        validate();
        if (sigma0() > 0.25)
            throw std::invalid_argument(
                "BuildingBlockParams: 10^4 n delta must be <= 1/4 (radial warp stays positive)");
    }
};

/// A scalar profile r -> (value, first, second derivative).
using ProfileFn = std::function<Jet2(double)>;

/// Warping function pair (f, phi) on [0, r_max]. f warps the sphere factor,
/// phi the line fiber.
struct ProfilePair {
    ProfileFn f;
    ProfileFn phi;
    double r_max = 0.0;
};

namespace detail {

/// phi_eps(r): eps | psi1 | r | psi2 | 1 with C^2 monotone interpolants.
inline Jet2 phi_eps_jet(double eps, double r) {
    const auto& tp = TransitionProfile::instance();
    if (r <= 0.5 * eps) return jet_const(eps);
    if (r < 2.0 * eps) {
        // psi1 on [eps/2, 2eps]: value eps -> 2eps, slope 0 -> 1.
        const double span = 1.5 * eps;
        const double t = (r - 0.5 * eps) / span;
        Jet2 d = tp.rise(t);  // psi1' as a function of t
        return {eps + span * tp.rise_integral(t), d.v, d.d1 / span};
    }
    if (r <= 0.5) return {r, 1.0, 0.0};
    if (r < 2.0) {
        // psi2 on [1/2, 2]: value 1/2 -> 1, slope 1 -> 0, psi2'' <= 0.
        const double span = 1.5;
        const double t = (r - 0.5) / span;
        Jet2 d = tp.fall(t);
        return {0.5 + span * tp.fall_integral(t), d.v, d.d1 / span};
    }
    return jet_const(1.0);
}

/// f-tilde: exact integral of f' = 1 - sigma0 (1 - zeta(100 r / eps)).
/// The cutoff scale eps/100 keeps the cone deficit fully active on r >= eps/100,
/// below the phi smoothing band (see Case 2 of the scalar lower bound).
inline Jet2 f_tilde_jet(const BuildingBlockParams& p, double r) {
    const double c = p.eps / 100.0;
    const double s0 = p.sigma0();
    Jet2 z = zeta_jet(r / c);
    const double I = c * one_minus_zeta_integral(r / c);
    const double v = r - s0 * I;
    const double d1 = 1.0 - s0 * (1.0 - z.v);
    const double d2 = s0 * z.d1 / c;
    return {v, d1, d2};
}

}  // namespace detail

/// phi_{delta,eps} = phi_eps^delta. Constant eps^delta below eps/2, r^delta on
/// [2eps, 1/2], 1 above 2.
inline ProfileFn make_phi(const BuildingBlockParams& params) {
    params.validate();
    const double delta = params.delta, eps = params.eps;
    if (delta == 0.0) return [](double) { return jet_const(1.0); };
    return [delta, eps](double r) { return jet_pow(detail::phi_eps_jet(eps, r), delta); };
}

/// f_{delta,eps} = zeta(r/4) f~ + (1 - zeta(r/4)) r: the ODE solution up to
/// r = 2, exactly r beyond 4.
inline ProfileFn make_f(const BuildingBlockParams& params) {
    params.validate_for_f();
    BuildingBlockParams p = params;
    return [p](double r) {
        Jet2 z = jet_affine_arg(zeta_jet(r / 4.0), 0.25);
        Jet2 ft = detail::f_tilde_jet(p, r);
        Jet2 lin{r, 1.0, 0.0};
        // z*ft + (1-z)*lin = lin + z*(ft - lin)
        return jet_add(lin, jet_mul(z, jet_sub(ft, lin)));
    };
}

inline ProfilePair make_building_block(const BuildingBlockParams& params, double r_max = 10.0) {
    return {make_f(params), make_phi(params), r_max};
}

/// Raw phi_eps (before the delta power), for tests of the interpolant bounds.
inline ProfileFn make_phi_eps(double eps) {
    return [eps](double r) { return detail::phi_eps_jet(eps, r); };
}

inline ProfileFn make_f_tilde(const BuildingBlockParams& params) {
    BuildingBlockParams p = params;
    return [p](double r) { return detail::f_tilde_jet(p, r); };
}

/// Euclidean profile pair f = r, phi = 1.
inline ProfilePair euclidean_profiles(double r_max = 10.0) {
    return {[](double r) { return Jet2{r, 1.0, 0.0}; },
            [](double) { return jet_const(1.0); }, r_max};
}

/// Cone profile f = c r with flat fiber.
inline ProfilePair cone_profiles(double c, double r_max = 10.0) {
    return {[c](double r) { return Jet2{c * r, c, 0.0}; },
            [](double) { return jet_const(1.0); }, r_max};
}

/// Random smooth non-degenerate profiles for oracle cross-checks:
/// f = r (1 + small trig), phi = 1 + small trig, coefficients from rng.
struct RandomProfileParams {
    int modes = 3;
    double amp = 0.05;
};

template <class RngT>
ProfilePair random_smooth_profiles(RngT& rng, const RandomProfileParams& rp = {}, double r_max = 10.0) {
    std::vector<double> af(std::size_t(rp.modes)), bf(std::size_t(rp.modes)), ap(std::size_t(rp.modes)), bp(std::size_t(rp.modes));
    for (int k = 0; k < rp.modes; ++k) {
        af[std::size_t(k)] = rp.amp * rng.uniform(-1.0, 1.0);
        bf[std::size_t(k)] = rng.uniform(0.5, 2.0);
        ap[std::size_t(k)] = rp.amp * rng.uniform(-1.0, 1.0);
        bp[std::size_t(k)] = rng.uniform(0.5, 2.0);
    }
    auto trig = [](const std::vector<double>& a, const std::vector<double>& w, double r) {
        Jet2 s = jet_const(0.0);
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double c = std::cos(w[k] * r), sn = std::sin(w[k] * r);
            s.v += a[k] * sn;
            s.d1 += a[k] * w[k] * c;
            s.d2 -= a[k] * w[k] * w[k] * sn;
        }
        return s;
    };
    ProfileFn f = [af, bf, trig](double r) {
        Jet2 pert = trig(af, bf, r);
        Jet2 lin{r, 1.0, 0.0};
        return jet_add(lin, jet_mul(lin, pert));  // r (1 + pert)
    };
    ProfileFn phi = [ap, bp, trig](double r) {
        Jet2 pert = trig(ap, bp, r);
        return jet_add(jet_const(1.0), pert);
    };
    return {f, phi, r_max};
}

/// Diagonal planar power metric g_alpha = dx^2 + |x|^{2 alpha} dy^2.
struct PowerMetricParams {
    double alpha = 1.0;
    void validate() const {
        if (alpha < 0.0) throw std::invalid_argument("PowerMetricParams: alpha >= 0");
    }
};

}  // namespace dpgeo
