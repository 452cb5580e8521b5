#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpgeo/csvio.hpp"
#include "dpgeo/mathutil.hpp"
#include "dpgeo/profiles.hpp"

namespace dpgeo {

/// Diagonal Ricci data of the doubly warped metric at radius r.
/// sphere_coeff is the coefficient of h_ij in R_ij (one per sphere direction).
struct RicciComponents {
    double rr = 0.0;
    double sphere_coeff = 0.0;
    double xx = 0.0;
};

/// Scalar curvature of g = dr^2 + f^2 h + phi^2 dx^2:
/// R = (n-1)/f^2 [2 - (f^2)''] + (n-4)(n-1)/f^2 [1 - f'^2] - 2 phi''/phi - 2(n-1) phi' f'/(phi f).
inline double scalar_curvature(const ProfilePair& profiles, int n, double r) {
    if (r <= 0.0) throw std::domain_error("scalar_curvature: r = 0 is the singular coordinate point");
    const Jet2 f = profiles.f(r), ph = profiles.phi(r);
    if (f.v <= 0.0 || ph.v <= 0.0) throw std::domain_error("scalar_curvature: profile not positive");
    const double fsq_dd = 2.0 * (f.v * f.d2 + f.d1 * f.d1);  // (f^2)''
    const double nm1 = double(n - 1);
    return nm1 / sqr(f.v) * (2.0 - fsq_dd) +
           double(n - 4) * nm1 / sqr(f.v) * (1.0 - sqr(f.d1)) -
           2.0 * ph.d2 / ph.v - 2.0 * nm1 * ph.d1 * f.d1 / (ph.v * f.v);
}

/// Ricci components from the proof of the warped scalar-curvature lemma:
///   R_rr = -(n-1) f''/f - phi''/phi
///   R_ij = h_ij [ (n-2) - f f'' - (n-2) f'^2 - phi' f f'/phi ]
///   R_xx = -phi phi'' - (n-1) phi phi' f'/f
inline RicciComponents ricci_components(const ProfilePair& profiles, int n, double r) {
    if (r <= 0.0) throw std::domain_error("ricci_components: r = 0 is the singular coordinate point");
    const Jet2 f = profiles.f(r), ph = profiles.phi(r);
    if (f.v <= 0.0 || ph.v <= 0.0) throw std::domain_error("ricci_components: profile not positive");
    RicciComponents rc;
    const double nm1 = double(n - 1), nm2 = double(n - 2);
    rc.rr = -nm1 * f.d2 / f.v - ph.d2 / ph.v;
    rc.sphere_coeff = nm2 - f.v * f.d2 - nm2 * sqr(f.d1) - ph.d1 * f.v * f.d1 / ph.v;
    rc.xx = -ph.v * ph.d2 - nm1 * ph.v * ph.d1 * f.d1 / f.v;
    return rc;
}

/// Trace of the Ricci components with the inverse metric; must reproduce
/// scalar_curvature to rounding.
inline double ricci_trace(const ProfilePair& profiles, int n, double r) {
    const RicciComponents rc = ricci_components(profiles, n, r);
    const Jet2 f = profiles.f(r), ph = profiles.phi(r);
    return rc.rr + double(n - 1) * rc.sphere_coeff / sqr(f.v) + rc.xx / sqr(ph.v);
}

/// Sampled curvature sweep with the three-case breakdown of the scalar
/// lower-bound proof: r <= eps/2, [eps/2, 2], r > 2.
struct CurvatureReport {
    BuildingBlockParams params;
    std::vector<double> r_samples;
    std::vector<double> R;
    std::vector<double> ric_rr, ric_sphere, ric_xx;
    double min_R = 0.0;
    double min_R_case1 = kInf;  // r <= eps/2
    double min_R_case2 = kInf;  // eps/2 <= r <= 2
    double min_R_case3 = kInf;  // r > 2
    double r_at_min = 0.0;

    void write_csv(const std::string& path, const ProfilePair& profiles) const {
        CsvWriter csv(path, {"r", "f", "fp", "fpp", "phi", "phip", "phipp", "R", "R_rr", "R_sph", "R_xx"});
        for (std::size_t i = 0; i < r_samples.size(); ++i) {
            const Jet2 f = profiles.f(r_samples[i]), ph = profiles.phi(r_samples[i]);
            csv.row({r_samples[i], f.v, f.d1, f.d2, ph.v, ph.d1, ph.d2, R[i], ric_rr[i], ric_sphere[i], ric_xx[i]});
        }
    }
};

/// Dense log-spaced sampling of R over (0, r_max]. Sampling starts at
/// max(r_floor, 1e-6); the coordinate origin is a smooth point only when
/// delta = 0 and is never sampled.
inline CurvatureReport min_scalar_report(const BuildingBlockParams& params, double r_max = 10.0,
                                         int samples = 4000, double r_floor = 1e-6) {
    params.validate();
    if (r_max <= 0.0 || samples < 16) throw std::invalid_argument("min_scalar_report: bad sweep");
    CurvatureReport rep;
    rep.params = params;
    const ProfilePair pp = make_building_block(params, r_max);
    const double r_min = std::max(r_floor, 1e-6);
    rep.r_samples = logspace(r_min, r_max, samples);
    rep.min_R = kInf;
    for (double r : rep.r_samples) {
        const double R = scalar_curvature(pp, params.n, r);
        const RicciComponents rc = ricci_components(pp, params.n, r);
        rep.R.push_back(R);
        rep.ric_rr.push_back(rc.rr);
        rep.ric_sphere.push_back(rc.sphere_coeff);
        rep.ric_xx.push_back(rc.xx);
        if (R < rep.min_R) {
            rep.min_R = R;
            rep.r_at_min = r;
        }
        if (r <= 0.5 * params.eps) rep.min_R_case1 = std::min(rep.min_R_case1, R);
        else if (r <= 2.0) rep.min_R_case2 = std::min(rep.min_R_case2, R);
        else rep.min_R_case3 = std::min(rep.min_R_case3, R);
    }
    return rep;
}

}  // namespace dpgeo
