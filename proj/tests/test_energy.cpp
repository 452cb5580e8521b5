#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpgeo/energy.hpp"
#include "dpgeo/grid.hpp"
#include "dpgeo/rng.hpp"

using namespace dpgeo;

namespace {

GridManifold unit_square(int n) {
    return make_flat_grid(2, {n, n, 1, 1}, {0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 0.0, 0.0},
                          {false, false, false, false});
}

DiscreteField coordinate_field(const GridManifold& g, int axis) {
    DiscreteField f(g);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) f[i] = g.coords(i)[std::size_t(axis)];
    return f;
}

}  // namespace

TEST_CASE("p_energy basic values") {
    GridManifold g = unit_square(16);

    SECTION("constant field has zero energy") {
        DiscreteField c(g, 3.7);
        CHECK(p_energy(g, c, 2.0) == 0.0);
        CHECK(p_energy(g, c, 3.5) == 0.0);
    }

    SECTION("f = x on the unit square: energy 1 for every p") {
        DiscreteField f = coordinate_field(g, 0);
        CHECK(p_energy(g, f, 2.0) == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(p_energy(g, f, 4.0) == Catch::Approx(1.0).epsilon(1e-12));
    }

    SECTION("p <= 1 rejected") {
        DiscreteField f = coordinate_field(g, 0);
        CHECK_THROWS_AS(p_energy(g, f, 1.0), std::domain_error);
    }
}

TEST_CASE("p_energy homogeneity and convexity (property)") {
    GridManifold g = unit_square(12);
    EnergyModel m = EnergyModel::from_grid(g);
    Rng rng(5150);
    for (double p : {2.0, 3.0, 4.5}) {
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<double> f(g.n_nodes()), h(g.n_nodes());
            for (std::size_t i = 0; i < f.size(); ++i) {
                f[i] = rng.normal();
                h[i] = rng.normal();
            }
            const double Ef = m.p_energy(f, p), Eh = m.p_energy(h, p);
            // homogeneity: E(s f) = |s|^p E(f)
            const double s = rng.uniform(0.3, 2.5);
            std::vector<double> sf(f);
            for (double& v : sf) v *= s;
            CHECK(m.p_energy(sf, p) == Catch::Approx(std::pow(s, p) * Ef).epsilon(1e-12));
            // convexity along random chords
            const double t = rng.uniform();
            std::vector<double> mix(f);
            for (std::size_t i = 0; i < f.size(); ++i) mix[i] = t * f[i] + (1.0 - t) * h[i];
            CHECK(m.p_energy(mix, p) <= t * Ef + (1.0 - t) * Eh + 1e-12);
        }
    }
}

TEST_CASE("metric rescale: vol ~ rho^{-dim}, E_p ~ rho^{p-dim}") {
    GridManifold g = unit_square(10);
    DiscreteField f(g);
    Rng rng(99);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) f[i] = rng.normal();
    const double p = 3.0;
    const double E0 = p_energy(g, f, p);
    const double V0 = g.total_volume();
    const double rho = 1.7;
    GridManifold gs = g;
    gs.scale_metric(1.0 / (rho * rho));  // g -> rho^{-2} g
    CHECK(gs.total_volume() == Catch::Approx(V0 * std::pow(rho, -2.0)).epsilon(1e-12));
    CHECK(p_energy(gs, f, p) == Catch::Approx(E0 * std::pow(rho, p - 2.0)).epsilon(1e-12));
}

TEST_CASE("degenerate inverse metric is clamped, energy stays finite") {
    // build a grid with an exactly-zero eigenvalue at some nodes
    GridManifold g = unit_square(12);
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        SymMat m(2);
        m.set(0, 0, 1.0);
        m.set(1, 1, (i % 5 == 0) ? 0.0 : 1.0);
        g.set_metric(i, m);
    }
    DiscreteField f = coordinate_field(g, 1);
    const double E = p_energy(g, f, 3.0);
    CHECK(std::isfinite(E));
}

TEST_CASE("edge graph energy: path of 3 nodes") {
    EnergyModel m = EnergyModel::from_edges(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
    std::vector<double> f{0.0, 0.5, 1.0};
    CHECK(m.p_energy(f, 3.0) == Catch::Approx(0.25).epsilon(1e-14));  // 2 * (1/2)^3
    std::vector<double> f2{0.0, 0.3, 1.0};
    CHECK(m.p_energy(f2, 3.0) == Catch::Approx(0.027 + 0.343).epsilon(1e-12));
}

TEST_CASE("lq_scalar_norm") {
    GridManifold g = make_unit_flat_torus(16);
    SECTION("flat torus: 0") { CHECK(lq_scalar_norm(g, 0.5) == 0.0); }
    SECTION("constant R = c: value c^q") {
        std::vector<double> R(g.n_nodes(), 2.5);
        CHECK(lq_scalar_norm(g, R, 0.5) == Catch::Approx(std::sqrt(2.5)).epsilon(1e-12));
    }
    SECTION("non-closed grid rejected") {
        GridManifold open = unit_square(8);
        std::vector<double> R(open.n_nodes(), 1.0);
        CHECK_THROWS_AS(lq_scalar_norm(open, R, 0.5), std::domain_error);
        CHECK_THROWS_AS(lq_scalar_norm(g, std::vector<double>(g.n_nodes(), 1.0), 1.5),
                        std::domain_error);
    }
    SECTION("strip torus: decreases as (delta, eps) shrink") {
        double prev = kInf;
        for (double scale : {1.0, 0.5, 0.25}) {
            StripGridSpec spec;
            spec.dim = 2;
            spec.shape = {64, 64, 1, 1};
            spec.lo = {0.0, 0.0, 0.0, 0.0};
            spec.lengths = {1.0, 1.0, 0.0, 0.0};
            spec.periodic = {true, true, false, false};
            StripSpec s;
            s.fiber_axis = 1;
            s.center = {0.5 + 0.5 / 64.0, 0.0, 0.0, 0.0};
            s.r0 = 0.25;
            s.delta = 0.4 * scale;
            s.eps = 0.08 * scale;
            spec.strips = {s};
            GridManifold g2 = discretize_strip_metric(spec);
            const double v = lq_scalar_norm(g2, 0.5);
            CHECK(v < prev);
            prev = v;
        }
    }
}
