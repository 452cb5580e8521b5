#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpgeo/grid.hpp"
#include "dpgeo/metric_compare.hpp"

using namespace dpgeo;

namespace {

FiniteMetricSpace from_matrix(std::vector<std::vector<double>> d) {
    FiniteMetricSpace X;
    X.dist = std::move(d);
    X.points.assign(X.dist.size(), {});
    X.weights.assign(X.dist.size(), 1.0);
    X.validate();
    return X;
}

FiniteMetricSpace unit_square_4pt(double scale) {
    // corners of a square with side `scale`
    FiniteMetricSpace X;
    const double s = scale, d = scale * std::sqrt(2.0);
    X.dist = {{0, s, d, s}, {s, 0, s, d}, {d, s, 0, s}, {s, d, s, 0}};
    X.points = {{0, 0}, {s, 0}, {s, s}, {0, s}};
    X.weights.assign(4, 1.0);
    X.validate();
    return X;
}

}  // namespace

TEST_CASE("gh bounds: identical spaces give zero") {
    FiniteMetricSpace X = unit_square_4pt(1.0);
    CHECK(gh_upper_bound(X, X).value == Catch::Approx(0.0).margin(1e-15));
    CHECK(gh_lower_bound(X, X) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("gh bounds: two 2-point spaces with distances 1 and 3") {
    FiniteMetricSpace X = from_matrix({{0, 1}, {1, 0}});
    FiniteMetricSpace Y = from_matrix({{0, 3}, {3, 0}});
    CHECK(gh_upper_bound(X, Y).value == Catch::Approx(1.0));  // |1-3|/2
    CHECK(gh_lower_bound(X, Y) == Catch::Approx(1.0));        // tight here
}

TEST_CASE("gh exact: unit square vs its 2x copy") {
    FiniteMetricSpace X = unit_square_4pt(1.0);
    FiniteMetricSpace Y = unit_square_4pt(2.0);
    GhBound ub = gh_upper_bound(X, Y);
    CHECK(ub.exact);
    // identity-type matching: max distortion = sqrt(2) (the diagonals)
    CHECK(ub.value == Catch::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    CHECK(gh_lower_bound(X, Y) <= ub.value + 1e-12);
}

TEST_CASE("gh lower <= upper on random tiny spaces") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t k = 3 + rng.index(4);
        auto mk = [&]() {
            // random points in the plane -> metric by construction
            std::vector<std::array<double, 4>> pts(k);
            for (auto& p : pts) p = {rng.uniform(), rng.uniform(), 0.0, 0.0};
            FiniteMetricSpace S;
            S.points = pts;
            S.dist.assign(k, std::vector<double>(k, 0.0));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    S.dist[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
            S.weights.assign(k, 1.0);
            S.validate();
            return S;
        };
        FiniteMetricSpace X = mk(), Y = mk();
        CHECK(gh_lower_bound(X, Y) <= gh_upper_bound(X, Y).value + 1e-12);
    }
}

TEST_CASE("gh upper bound is a pseudometric on tiny spaces") {
    Rng rng(123);
    auto mk = [&](double sc) {
        std::vector<std::array<double, 4>> pts(5);
        for (auto& p : pts) p = {sc * rng.uniform(), sc * rng.uniform(), 0.0, 0.0};
        FiniteMetricSpace S;
        S.points = pts;
        S.dist.assign(5, std::vector<double>(5, 0.0));
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j)
                S.dist[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
        S.weights.assign(5, 1.0);
        return S;
    };
    FiniteMetricSpace A = mk(1.0), B = mk(1.3), C = mk(0.7);
    const double ab = gh_upper_bound(A, B).value;
    const double ba = gh_upper_bound(B, A).value;
    CHECK(ab == Catch::Approx(ba).margin(1e-12));  // symmetry
    const double ac = gh_upper_bound(A, C).value;
    const double cb = gh_upper_bound(C, B).value;
    CHECK(ab <= ac + cb + 1e-9);  // triangle inequality
}

TEST_CASE("point vs diameter-D space: lower bound D/2") {
    FiniteMetricSpace X = from_matrix({{0.0}});
    FiniteMetricSpace Y = from_matrix({{0, 2.0}, {2.0, 0}});
    CHECK(gh_lower_bound(X, Y) == Catch::Approx(1.0));
}

TEST_CASE("sample_space: determinism, triangle inequality, weights") {
    GridManifold g = make_unit_flat_torus(24);
    SampleOptions opt;
    opt.seed = 42;
    FiniteMetricSpace X = sample_space(g, 5, opt);
    FiniteMetricSpace Y = sample_space(g, 5, opt);
    REQUIRE(X.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(X.dist[i][j] == Y.dist[i][j]);
    double wsum = 0.0;
    for (double w : X.weights) {
        CHECK(w >= 0.0);
        wsum += w;
    }
    CHECK(wsum == Catch::Approx(g.total_volume()).epsilon(1e-12));

    SECTION("k = 2 on a flat grid: geodesic distance ~ coordinate distance") {
        FiniteMetricSpace Z = sample_space(g, 2, opt);
        double dx = std::abs(Z.points[0][0] - Z.points[1][0]);
        double dy = std::abs(Z.points[0][1] - Z.points[1][1]);
        dx = std::min(dx, 1.0 - dx);
        dy = std::min(dy, 1.0 - dy);
        const double euc = std::hypot(dx, dy);
        CHECK(Z.dist[0][1] >= euc - 1e-9);
        CHECK(Z.dist[0][1] <= euc * 1.09);
    }
}

TEST_CASE("sample_space dp mode: k cap and agreement with dp_matrix") {
    GridManifold g = make_unit_flat_torus(16);
    SampleOptions opt;
    opt.mode = SampleMode::Dp;
    opt.p = 4.0;
    opt.seed = 7;
    CHECK_THROWS_AS(sample_space(g, 13, opt), std::invalid_argument);
    FiniteMetricSpace X = sample_space(g, 3, opt);
    CHECK(X.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) CHECK(X.dist[i][j] > 0.0);
}

TEST_CASE("dp_close_check: identical inputs pass at any eps") {
    FiniteMetricSpace X = unit_square_4pt(1.0);
    BallVolumes bv;
    bv.radii = dp_close_radii(0.05);
    bv.vol.assign(4, std::vector<double>(bv.radii.size(), 0.3));
    for (double eps : {0.01, 0.1, 0.5}) {
        DpCloseReport rep = dp_close_check(X, X, eps, bv, bv);
        CHECK(rep.pass);
        CHECK(rep.worst_pair_gap == 0.0);
        CHECK(rep.worst_volume_ratio == 1.0);
    }
}

TEST_CASE("dp_close_check: gap and volume violations detected") {
    FiniteMetricSpace X = unit_square_4pt(1.0);
    FiniteMetricSpace Y = unit_square_4pt(1.3);
    BallVolumes bx, by;
    bx.radii = by.radii = dp_close_radii(0.1);
    bx.vol.assign(4, std::vector<double>(bx.radii.size(), 0.3));
    by.vol.assign(4, std::vector<double>(by.radii.size(), 0.3));
    DpCloseReport rep = dp_close_check(X, Y, 0.1, bx, by);
    CHECK_FALSE(rep.pass);  // side difference 0.3 > 0.1
    CHECK(rep.worst_pair_gap == Catch::Approx(0.3 * std::sqrt(2.0)).epsilon(1e-12));

    by.vol.assign(4, std::vector<double>(by.radii.size(), 0.36));  // 20% volume gap
    DpCloseReport rep2 = dp_close_check(X, X, 0.1, bx, by);
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.worst_volume_ratio == Catch::Approx(0.3 / 0.36).epsilon(1e-12));

    CHECK_THROWS_AS(dp_close_check(X, from_matrix({{0, 1}, {1, 0}}), 0.1, bx, by),
                    std::domain_error);
}

TEST_CASE("taxicab_deviation") {
    SECTION("axis-aligned pair on a flat grid: deviation ~ 0") {
        FiniteMetricSpace X;
        X.points = {{0.1, 0.3}, {0.7, 0.3}};
        X.dist = {{0, 0.6}, {0.6, 0}};
        X.weights = {1, 1};
        CHECK(taxicab_deviation(X, 2) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("diagonal pair: deviation 1 - 1/sqrt(2)") {
        FiniteMetricSpace X;
        X.points = {{0.0, 0.0}, {1.0, 1.0}};
        X.dist = {{0, std::sqrt(2.0)}, {std::sqrt(2.0), 0}};
        X.weights = {1, 1};
        CHECK(taxicab_deviation(X, 2) == Catch::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));
    }
    SECTION("coincident points skipped") {
        FiniteMetricSpace X;
        X.points = {{0.2, 0.2}, {0.2, 0.2}};
        X.dist = {{0, 0}, {0, 0}};
        X.weights = {1, 1};
        CHECK(taxicab_deviation(X, 2) == 0.0);
    }
}

TEST_CASE("validate rejects broken matrices") {
    FiniteMetricSpace X;
    X.dist = {{0, 1}, {2, 0}};  // asymmetric
    X.points.assign(2, {});
    X.weights.assign(2, 1.0);
    CHECK_THROWS_AS(X.validate(), std::invalid_argument);
    X.dist = {{0, 5}, {5, 0}};
    CHECK_NOTHROW(X.validate());
    FiniteMetricSpace T;
    T.dist = {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}};  // triangle violation
    T.points.assign(3, {});
    T.weights.assign(3, 1.0);
    CHECK_THROWS_AS(T.validate(), std::invalid_argument);
}
