#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dpgeo/dp_solver.hpp"
#include "dpgeo/geodesic.hpp"
#include "dpgeo/grid.hpp"
#include "dpgeo/mathutil.hpp"
#include "dpgeo/rng.hpp"

namespace dpgeo {

/// Sampled finite metric space: coordinates kept for reporting, distance
/// matrix, and per-point measure weights (local volume shares).
struct FiniteMetricSpace {
    std::vector<std::array<double, 4>> points;
    std::vector<std::vector<double>> dist;
    std::vector<double> weights;

    std::size_t size() const { return dist.size(); }

    double diameter() const {
        double d = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = i + 1; j < size(); ++j) d = std::max(d, dist[i][j]);
        return d;
    }

    /// Checks symmetry, zero diagonal, and the triangle inequality (1e-9).
    void validate() const {
        const std::size_t k = size();
        for (std::size_t i = 0; i < k; ++i) {
            if (dist[i].size() != k) throw std::invalid_argument("FiniteMetricSpace: ragged matrix");
            if (std::abs(dist[i][i]) > 1e-12) throw std::invalid_argument("FiniteMetricSpace: nonzero diagonal");
            for (std::size_t j = 0; j < k; ++j) {
                if (dist[i][j] < -1e-12) throw std::invalid_argument("FiniteMetricSpace: negative distance");
                if (std::abs(dist[i][j] - dist[j][i]) > 1e-9)
                    throw std::invalid_argument("FiniteMetricSpace: asymmetric");
            }
        }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t l = 0; l < k; ++l)
                    if (dist[i][j] > dist[i][l] + dist[l][j] + 1e-9)
                        throw std::invalid_argument("FiniteMetricSpace: triangle inequality violated");
    }
};

enum class SampleMode { Geodesic, Dp };

struct SampleOptions {
    SampleMode mode = SampleMode::Geodesic;
    double p = 4.0;          // for Dp mode
    std::uint64_t seed = 1;
    DpOptions dp;
};

/// Farthest-point sample of k points. Selection always runs under the
/// geodesic metric (a d_p selection would need a d_p field per candidate
/// step); the distance matrix is filled by the requested mode. Weights are
/// geodesic-Voronoi volume shares.
inline FiniteMetricSpace sample_space(const GridManifold& g, int k, const SampleOptions& opt = {}) {
    if (k < 2) throw std::invalid_argument("sample_space: k >= 2");
    if (opt.mode == SampleMode::Dp && k > 12)
        throw std::invalid_argument("sample_space: k <= 12 in dp mode (one convex solve per pair)");
    Rng rng(opt.seed);
    std::size_t start = rng.index(g.n_nodes());
    int guard = 0;
    while (g.is_degenerate(start) && guard++ < 10000) start = rng.index(g.n_nodes());
    if (g.is_degenerate(start)) throw std::invalid_argument("sample_space: no non-degenerate seed");

    std::vector<std::size_t> chosen{start};
    std::vector<DiscreteField> fields;
    fields.push_back(geodesic_distances(g, start));
    std::vector<double> min_d = fields[0].values;
    while (int(chosen.size()) < k) {
        std::size_t far = 0;
        double best = -1.0;
        for (std::size_t id = 0; id < g.n_nodes(); ++id) {
            if (g.is_degenerate(id)) continue;
            if (min_d[id] > best) {
                best = min_d[id];
                far = id;
            }
        }
        chosen.push_back(far);
        fields.push_back(geodesic_distances(g, far));
        for (std::size_t id = 0; id < g.n_nodes(); ++id)
            min_d[id] = std::min(min_d[id], fields.back()[id]);
    }

    FiniteMetricSpace X;
    for (std::size_t c : chosen) X.points.push_back(g.coords(c));
    const std::size_t kk = chosen.size();
    X.dist.assign(kk, std::vector<double>(kk, 0.0));
    if (opt.mode == SampleMode::Geodesic) {
        for (std::size_t i = 0; i < kk; ++i)
            for (std::size_t j = 0; j < kk; ++j) X.dist[i][j] = fields[i][chosen[j]];
        // symmetrize (Dijkstra is symmetric up to rounding)
        for (std::size_t i = 0; i < kk; ++i)
            for (std::size_t j = i + 1; j < kk; ++j) {
                const double d = 0.5 * (X.dist[i][j] + X.dist[j][i]);
                X.dist[i][j] = X.dist[j][i] = d;
            }
    } else {
        X.dist = dp_matrix(g, chosen, opt.p, opt.dp);
    }
    // geodesic Voronoi volume shares
    X.weights.assign(kk, 0.0);
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        std::size_t owner = 0;
        double best = kInf;
        for (std::size_t i = 0; i < kk; ++i)
            if (fields[i][id] < best) {
                best = fields[i][id];
                owner = i;
            }
        X.weights[owner] += g.vol_weight(id);
    }
    X.validate();
    return X;
}

struct GhBound {
    double value = 0.0;
    bool exact = true;
};

namespace detail {

inline double correspondence_distortion(const FiniteMetricSpace& X, const FiniteMetricSpace& Y,
                                        const std::vector<std::size_t>& perm) {
    double d = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j)
            d = std::max(d, std::abs(X.dist[i][j] - Y.dist[perm[i]][perm[j]]));
    return d;
}

inline void gh_exact_rec(const FiniteMetricSpace& X, const FiniteMetricSpace& Y,
                         std::vector<std::size_t>& perm, std::vector<char>& used, std::size_t depth,
                         double partial, double& best) {
    const std::size_t k = X.size();
    if (partial >= best) return;  // prune
    if (depth == k) {
        best = partial;
        return;
    }
    for (std::size_t cand = 0; cand < k; ++cand) {
        if (used[cand]) continue;
        double p2 = partial;
        for (std::size_t i = 0; i < depth && p2 < best; ++i)
            p2 = std::max(p2, std::abs(X.dist[i][depth] - Y.dist[perm[i]][cand]));
        if (p2 >= best) continue;
        perm[depth] = cand;
        used[cand] = 1;
        gh_exact_rec(X, Y, perm, used, depth + 1, p2, best);
        used[cand] = 0;
    }
}

}  // namespace detail

/// Upper bound on the Gromov-Hausdorff distance: half the minimal max
/// distortion over bijective correspondences. Exact enumeration (with
/// branch-and-bound pruning) for equal sizes <= 9; greedy + 2-swap refinement
/// beyond, flagged non-exact.
inline GhBound gh_upper_bound(const FiniteMetricSpace& X, const FiniteMetricSpace& Y) {
    GhBound out;
    const std::size_t k = X.size();
    if (k <= 9) {
        if (Y.size() != k) throw std::domain_error("gh_upper_bound: size mismatch in exact mode");
        std::vector<std::size_t> perm(k, 0);
        std::vector<char> used(k, 0);
        double best = kInf;
        detail::gh_exact_rec(X, Y, perm, used, 0, 0.0, best);
        out.value = 0.5 * best;
        out.exact = true;
        return out;
    }
    if (Y.size() != k) throw std::domain_error("gh_upper_bound: equal sizes required");
    // greedy by sorted eccentricity, then 2-swap refinement
    auto ecc = [](const FiniteMetricSpace& S) {
        std::vector<double> e(S.size(), 0.0);
        for (std::size_t i = 0; i < S.size(); ++i)
            for (std::size_t j = 0; j < S.size(); ++j) e[i] = std::max(e[i], S.dist[i][j]);
        return e;
    };
    std::vector<double> ex = ecc(X), ey = ecc(Y);
    std::vector<std::size_t> ox(k), oy(k), perm(k);
    std::iota(ox.begin(), ox.end(), 0);
    std::iota(oy.begin(), oy.end(), 0);
    std::sort(ox.begin(), ox.end(), [&](std::size_t a, std::size_t b) { return ex[a] < ex[b]; });
    std::sort(oy.begin(), oy.end(), [&](std::size_t a, std::size_t b) { return ey[a] < ey[b]; });
    for (std::size_t i = 0; i < k; ++i) perm[ox[i]] = oy[i];
    double cur = detail::correspondence_distortion(X, Y, perm);
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t a = 0; a < k && !improved; ++a)
            for (std::size_t b = a + 1; b < k && !improved; ++b) {
                std::swap(perm[a], perm[b]);
                const double d = detail::correspondence_distortion(X, Y, perm);
                if (d < cur - 1e-15) {
                    cur = d;
                    improved = true;
                } else {
                    std::swap(perm[a], perm[b]);
                }
            }
    }
    out.value = 0.5 * cur;
    out.exact = false;
    return out;
}

/// First lower bounds: half the diameter gap and half the bottleneck distance
/// of the sorted distance multisets.
inline double gh_lower_bound(const FiniteMetricSpace& X, const FiniteMetricSpace& Y) {
    const double diam_gap = 0.5 * std::abs(X.diameter() - Y.diameter());
    auto multiset = [](const FiniteMetricSpace& S) {
        std::vector<double> v;
        for (std::size_t i = 0; i < S.size(); ++i)
            for (std::size_t j = i + 1; j < S.size(); ++j) v.push_back(S.dist[i][j]);
        std::sort(v.begin(), v.end());
        return v;
    };
    std::vector<double> a = multiset(X), b = multiset(Y);
    double bottleneck = 0.0;
    if (!a.empty() && !b.empty()) {
        if (a.size() == b.size()) {
            for (std::size_t i = 0; i < a.size(); ++i)
                bottleneck = std::max(bottleneck, std::abs(a[i] - b[i]));
        } else {
            // quantile-matched comparison for unequal sizes
            const std::size_t m = std::max(a.size(), b.size());
            auto quant = [](const std::vector<double>& v, double q) {
                const double pos = q * double(v.size() - 1);
                const std::size_t i = std::size_t(pos);
                const double t = pos - double(i);
                return i + 1 < v.size() ? v[i] * (1.0 - t) + v[i + 1] * t : v.back();
            };
            for (std::size_t i = 0; i < m; ++i) {
                const double q = double(i) / double(m - 1);
                bottleneck = std::max(bottleneck, std::abs(quant(a, q) - quant(b, q)));
            }
        }
    }
    return std::max(diam_gap, 0.5 * bottleneck);
}

/// The d_p-convergence check: matched point lists, pairwise distance gaps
/// <= eps and matched p-ball volume ratios within [1-eps, 1+eps] on the
/// probed radii.
struct BallVolumes {
    std::vector<double> radii;                      // probed r values
    std::vector<std::vector<double>> vol;           // vol[point][radius]
};

struct DpCloseReport {
    bool pass = false;
    double worst_pair_gap = 0.0;
    double worst_volume_ratio = 1.0;  // the ratio farthest from 1
};

inline DpCloseReport dp_close_check(const FiniteMetricSpace& X, const FiniteMetricSpace& Y,
                                    double eps, const BallVolumes& bx, const BallVolumes& by) {
    if (X.size() != Y.size()) throw std::domain_error("dp_close_check: unmatched point lists");
    DpCloseReport rep;
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = i + 1; j < X.size(); ++j)
            rep.worst_pair_gap = std::max(rep.worst_pair_gap, std::abs(X.dist[i][j] - Y.dist[i][j]));
    rep.worst_volume_ratio = 1.0;
    if (bx.vol.size() != by.vol.size() || bx.radii.size() != by.radii.size())
        throw std::domain_error("dp_close_check: unmatched ball volumes");
    for (std::size_t i = 0; i < bx.vol.size(); ++i)
        for (std::size_t r = 0; r < bx.radii.size(); ++r) {
            const double vx = bx.vol[i][r], vy = by.vol[i][r];
            if (vx <= 0.0 && vy <= 0.0) continue;
            const double ratio = vy > 0.0 ? vx / vy : kInf;
            if (std::abs(ratio - 1.0) > std::abs(rep.worst_volume_ratio - 1.0))
                rep.worst_volume_ratio = ratio;
        }
    rep.pass = rep.worst_pair_gap <= eps && rep.worst_volume_ratio >= 1.0 - eps &&
               rep.worst_volume_ratio <= 1.0 + eps;
    return rep;
}

/// Probed radii for the volume condition: 8 log-spaced values in [eps, 1].
inline std::vector<double> dp_close_radii(double eps) { return logspace(eps, 1.0, 8); }

/// Max over pairs of |d(x,y) - sum_i |x_i - y_i|| / sum_i |x_i - y_i|
/// (coincident points skipped). Coordinates may wrap on periodic grids; the
/// caller supplies coordinates consistent with the distances.
inline double taxicab_deviation(const FiniteMetricSpace& X, int dim) {
    double worst = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = i + 1; j < X.size(); ++j) {
            double l1 = 0.0;
            for (int a = 0; a < dim; ++a)
                l1 += std::abs(X.points[i][std::size_t(a)] - X.points[j][std::size_t(a)]);
            if (l1 <= 0.0) continue;
            worst = std::max(worst, std::abs(X.dist[i][j] - l1) / l1);
        }
    return worst;
}

}  // namespace dpgeo
