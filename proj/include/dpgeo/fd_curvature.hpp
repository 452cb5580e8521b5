#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "dpgeo/mathutil.hpp"
#include "dpgeo/profiles.hpp"
#include "dpgeo/sym.hpp"

namespace dpgeo {

/// Callable metric field on R^dim.
using MetricFn = std::function<SymMat(const std::array<double, 4>&)>;

/// Scalar curvature by finite-difference contraction of the Riemann tensor,
/// independent of the closed-form warped expressions. Central differences of
/// step h for the metric derivatives; second-order accurate.
///
/// R_{abcd} = 1/2 (g_{ad,bc} + g_{bc,ad} - g_{ac,bd} - g_{bd,ac})
///            + g_{ef} (G^e_{bc} G^f_{ad} - G^e_{bd} G^f_{ac}),
/// R = g^{ac} g^{bd} R_{abcd}.
inline double fd_scalar_curvature(const MetricFn& g, int dim, const std::array<double, 4>& x,
                                  double h) {
    if (dim < 2 || dim > 4) throw std::invalid_argument("fd_scalar_curvature: dim in {2,3,4}");
    auto at = [&](int a, double sa, int b, double sb) {
        std::array<double, 4> p = x;
        p[std::size_t(a)] += sa * h;
        if (b >= 0) p[std::size_t(b)] += sb * h;
        return g(p);
    };
    const SymMat g0 = g(x);
    const SymMat ginv = g0.inverse();

    // First derivatives dg[a](i,j) and second derivatives ddg[a][b](i,j).
    std::array<SymMat, 4> dg;
    std::array<std::array<SymMat, 4>, 4> ddg;
    for (int a = 0; a < dim; ++a) {
        SymMat gp = at(a, 1.0, -1, 0.0), gm = at(a, -1.0, -1, 0.0);
        SymMat d(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) d.set(i, j, (gp(i, j) - gm(i, j)) / (2.0 * h));
        dg[std::size_t(a)] = d;
        SymMat dd(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j)
                dd.set(i, j, (gp(i, j) - 2.0 * g0(i, j) + gm(i, j)) / (h * h));
        ddg[std::size_t(a)][std::size_t(a)] = dd;
    }
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            SymMat gpp = at(a, 1.0, b, 1.0), gpm = at(a, 1.0, b, -1.0);
            SymMat gmp = at(a, -1.0, b, 1.0), gmm = at(a, -1.0, b, -1.0);
            SymMat dd(dim);
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j)
                    dd.set(i, j, (gpp(i, j) - gpm(i, j) - gmp(i, j) + gmm(i, j)) / (4.0 * h * h));
            ddg[std::size_t(a)][std::size_t(b)] = dd;
            ddg[std::size_t(b)][std::size_t(a)] = dd;
        }
    }

    // Christoffels G^e_{ab} = 1/2 g^{ec} (g_{bc,a} + g_{ac,b} - g_{ab,c}).
    double gam[4][4][4] = {};
    for (int e = 0; e < dim; ++e)
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) {
                double s = 0.0;
                for (int c = 0; c < dim; ++c)
                    s += ginv(e, c) * (dg[std::size_t(a)](b, c) + dg[std::size_t(b)](a, c) - dg[std::size_t(c)](a, b));
                gam[e][a][b] = 0.5 * s;
            }

    double R = 0.0;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int c = 0; c < dim; ++c)
                for (int d = 0; d < dim; ++d) {
                    double second = 0.5 * (ddg[std::size_t(b)][std::size_t(c)](a, d) + ddg[std::size_t(a)][std::size_t(d)](b, c) -
                                           ddg[std::size_t(b)][std::size_t(d)](a, c) - ddg[std::size_t(a)][std::size_t(c)](b, d));
                    double quad = 0.0;
                    for (int e = 0; e < dim; ++e)
                        for (int f = 0; f < dim; ++f)
                            quad += g0(e, f) * (gam[e][b][c] * gam[f][a][d] - gam[e][b][d] * gam[f][a][c]);
                    R += ginv(a, c) * ginv(b, d) * (second + quad);
                }
    return R;
}

/// The warped building-block metric as a Cartesian field on R^{n+1}:
/// coordinates (z in R^n, x), r = |z|,
/// g_zz = z z^T / r^2 + (f(r)/r)^2 (I - z z^T / r^2), g_xx = phi(r)^2.
inline MetricFn warped_metric_cartesian(const ProfilePair& profiles, int n) {
    if (n + 1 > 4) throw std::invalid_argument("warped_metric_cartesian: ambient dim <= 4 supported");
    return [profiles, n](const std::array<double, 4>& p) {
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) r2 += sqr(p[std::size_t(i)]);
        const double r = std::sqrt(r2);
        if (r <= 0.0) throw std::domain_error("warped_metric_cartesian: r = 0");
        const double fr = profiles.f(r).v / r;
        const double ph = profiles.phi(r).v;
        SymMat g(n + 1);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double proj = p[std::size_t(i)] * p[std::size_t(j)] / r2;
                g.set(i, j, proj + fr * fr * ((i == j ? 1.0 : 0.0) - proj));
            }
        g.set(n, n, ph * ph);
        return g;
    };
}

/// FD oracle evaluated on the warped metric at radius r (probe direction along
/// a generic unit vector to exercise off-diagonal terms).
inline double fd_scalar_curvature_warped(const ProfilePair& profiles, int n, double r,
                                         double h_rel = 1e-3) {
    MetricFn g = warped_metric_cartesian(profiles, n);
    std::array<double, 4> x{};
    // generic direction, kept away from coordinate axes
    std::array<double, 4> dir{0.5366563145999495, 0.6708203932499369, 0.5121475197315839, 0.0};
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += sqr(dir[std::size_t(i)]);
    norm = std::sqrt(norm);
    for (int i = 0; i < n; ++i) x[std::size_t(i)] = r * dir[std::size_t(i)] / norm;
    const double h = h_rel * std::min(r, 1.0);
    return fd_scalar_curvature(g, n + 1, x, h);
}

}  // namespace dpgeo
