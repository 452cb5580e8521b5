#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "dpgeo/fd_curvature.hpp"
#include "dpgeo/grid.hpp"

using namespace dpgeo;

TEST_CASE("flat grid: volume, coordinates, periodic wrap") {
    GridManifold g = make_unit_flat_torus(16);
    CHECK(g.total_volume() == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(g.coords(0)[0] == Catch::Approx(0.5 / 16.0));
    std::size_t nb = 0;
    REQUIRE(g.neighbor(0, 0, -1, nb));  // wraps
    CHECK(g.multi_index(nb)[0] == 15);

    GridManifold open = make_flat_grid(2, {8, 8, 1, 1}, {0.0, 0.0, 0.0, 0.0},
                                       {1.0, 1.0, 0.0, 0.0}, {false, false, false, false});
    CHECK_FALSE(open.neighbor(0, 0, -1, nb));
    CHECK_FALSE(open.closed());
    CHECK(make_unit_flat_torus(8).closed());
}

TEST_CASE("discretize_power: half-offset sampling and degenerate mask") {
    PowerMetricParams pm{1.0};
    GridManifold g = discretize_power(pm, {-1.0, 1.0}, {-1.0, 1.0}, 64, 64);
    // node at x = 0.5 carries diag(1, 0.25)
    const std::size_t id = g.nearest_node({0.5, 0.0, 0.0, 0.0});
    CHECK(g.coords(id)[0] == Catch::Approx(0.5).margin(1.0 / 64.0));
    const double x = g.coords(id)[0];
    CHECK(g.metric(id)(0, 0) == 1.0);
    CHECK(g.metric(id)(1, 1) == Catch::Approx(x * x).epsilon(1e-12));
    // no node carries det g = 0 (cell centers miss {x=0})
    for (std::size_t i = 0; i < g.n_nodes(); ++i) CHECK(g.metric(i).det() > 0.0);

    SECTION("alpha = 0 is the identity metric") {
        GridManifold gi = discretize_power({0.0}, {-1.0, 1.0}, {-1.0, 1.0}, 8, 8);
        for (std::size_t i = 0; i < gi.n_nodes(); ++i) {
            CHECK(gi.metric(i)(0, 0) == 1.0);
            CHECK(gi.metric(i)(1, 1) == 1.0);
        }
    }

    SECTION("alpha = 0.5: no degenerate nodes (half-offset keeps det g >= h/2)") {
        GridManifold gd = discretize_power({0.5}, {-1.0, 1.0}, {-1.0, 1.0}, 64, 64);
        for (std::size_t i = 0; i < gd.n_nodes(); ++i) CHECK_FALSE(gd.is_degenerate(i));
    }

    SECTION("total volume converges to the closed-form integral") {
        // V = int int |x|^0.5 dx dy over [-1,1]^2 = 2 * (2/1.5) = 8/3
        const double exact = 8.0 / 3.0;
        double prev_err = kInf;
        for (int n : {32, 64, 128}) {
            GridManifold gg = discretize_power({0.5}, {-1.0, 1.0}, {-1.0, 1.0}, n, n);
            const double err = std::abs(gg.total_volume() - exact) / exact;
            CHECK(err < prev_err);
            prev_err = err;
        }
        CHECK(prev_err < 0.01);
    }

    CHECK_THROWS_AS(discretize_power({0.5}, {-1.0, 1.0}, {-1.0, 1.0}, 3, 8), std::invalid_argument);
}

TEST_CASE("grid file round trip") {
    GridManifold g = discretize_power({0.7}, {-1.0, 1.0}, {-0.5, 0.5}, 8, 6);
    const std::string path = "grid_roundtrip.txt";
    g.save(path);
    GridManifold g2 = GridManifold::load(path);
    REQUIRE(g2.n_nodes() == g.n_nodes());
    CHECK(g2.dim() == g.dim());
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) CHECK(g2.metric(i)(a, b) == g.metric(i)(a, b));
        CHECK(g2.vol_weight(i) == g.vol_weight(i));
        CHECK(g2.is_degenerate(i) == g.is_degenerate(i));
    }
    std::remove(path.c_str());
}

TEST_CASE("strip metric: base outside, profile inside, translation symmetry") {
    StripGridSpec spec;
    spec.dim = 2;
    spec.shape = {64, 64, 1, 1};
    spec.lo = {0.0, 0.0, 0.0, 0.0};
    spec.lengths = {1.0, 1.0, 0.0, 0.0};
    spec.periodic = {true, true, false, false};

    SECTION("no strips: flat everywhere") {
        GridManifold g = discretize_strip_metric(spec);
        for (std::size_t i = 0; i < g.n_nodes(); ++i) {
            CHECK(g.metric(i)(0, 0) == 1.0);
            CHECK(g.metric(i)(1, 1) == 1.0);
        }
    }

    SECTION("one strip degenerates the fiber toward the axis") {
        StripSpec s;
        s.fiber_axis = 1;
        s.center = {0.5 + 0.5 / 64.0, 0.0, 0.0, 0.0};  // snapped to a node row
        s.r0 = 0.2;
        s.delta = 0.4;
        s.eps = 0.05;
        spec.strips = {s};
        GridManifold g = discretize_strip_metric(spec);
        const std::size_t on_axis = g.nearest_node({s.center[0], 0.5, 0.0, 0.0});
        const std::size_t off = g.nearest_node({s.center[0] + 0.5, 0.5, 0.0, 0.0});
        CHECK(g.metric(on_axis)(1, 1) ==
              Catch::Approx(std::pow(std::pow(s.eps, s.delta), 2.0)).epsilon(1e-12));
        CHECK(g.metric(off)(1, 1) == 1.0);
        CHECK(g.metric(on_axis)(0, 0) == 1.0);  // transverse direction untouched
        REQUIRE(g.analytic_R());
        // Gauss-Bonnet on the torus: int R dvol = 0
        double intR = 0.0;
        for (std::size_t i = 0; i < g.n_nodes(); ++i) intR += (*g.analytic_R())[i] * g.vol_weight(i);
        CHECK(std::abs(intR) < 1e-10);
    }

    SECTION("two parallel strips are translates") {
        StripSpec s1;
        s1.fiber_axis = 1;
        s1.center = {0.25 + 0.5 / 64.0, 0.0, 0.0, 0.0};
        s1.r0 = 0.1;
        s1.delta = 0.3;
        s1.eps = 0.05;
        StripSpec s2 = s1;
        s2.center[0] = 0.75 + 0.5 / 64.0;
        spec.strips = {s1, s2};
        GridManifold g = discretize_strip_metric(spec);
        const int N = 64;
        for (int j = 0; j < N; ++j) {
            for (int di = -6; di <= 6; ++di) {
                const int i1 = (16 + di + N) % N, i2 = (48 + di + N) % N;
                const std::size_t a = g.index({i1, j, 0, 0}), b = g.index({i2, j, 0, 0});
                CHECK(g.metric(a)(1, 1) == Catch::Approx(g.metric(b)(1, 1)).epsilon(1e-13));
            }
        }
    }

    SECTION("overlapping strips rejected") {
        StripSpec s1;
        s1.fiber_axis = 1;
        s1.center = {0.5, 0.0, 0.0, 0.0};
        s1.r0 = 0.2;
        StripSpec s2 = s1;
        s2.center[0] = 0.6;
        spec.strips = {s1, s2};
        CHECK_THROWS_AS(discretize_strip_metric(spec), std::invalid_argument);
    }
}

TEST_CASE("strip analytic R matches the FD curvature oracle") {
    StripSpec s;
    s.fiber_axis = 1;
    s.center = {0.5, 0.0, 0.0, 0.0};
    s.r0 = 0.25;
    s.delta = 0.35;
    s.eps = 0.08;
    // compare on the continuum profile, independent of any grid
    MetricFn g = [&](const std::array<double, 4>& x) {
        SymMat m(2);
        m.set(0, 0, 1.0);
        const double r = std::abs(x[0] - s.center[0]);
        Jet2 ph = r < s.r0 ? detail::strip_phi(s, r) : jet_const(1.0);
        m.set(1, 1, ph.v * ph.v);
        return m;
    };
    for (double x0 : {0.52, 0.56, 0.60, 0.68}) {
        const double r = std::abs(x0 - s.center[0]);
        Jet2 ph = detail::strip_phi(s, r);
        const double exact = -2.0 * ph.d2 / ph.v;
        const double fd = fd_scalar_curvature(g, 2, {x0, 0.3, 0.0, 0.0}, 1e-4);
        CHECK(fd == Catch::Approx(exact).margin(1e-3 * (1.0 + std::abs(exact))));
    }
}

TEST_CASE("conformal sphere patch reproduces R = 2/a^2") {
    // stereographic: g = lambda^2 delta, lambda = 2a^2/(a^2+|x|^2), R = 2/a^2
    const double a = 1.0;
    MetricFn fn = [a](const std::array<double, 4>& x) {
        const double lam = 2.0 * a * a / (a * a + x[0] * x[0] + x[1] * x[1]);
        return SymMat::identity(2, lam * lam);
    };
    const double R = fd_scalar_curvature(fn, 2, {0.17, -0.08, 0.0, 0.0}, 1e-3);
    CHECK(R == Catch::Approx(2.0 / (a * a)).epsilon(0.02));
}
