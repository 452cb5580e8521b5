#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpgeo/geodesic.hpp"
#include "dpgeo/grid.hpp"

using namespace dpgeo;

TEST_CASE("flat grid distances: axis pairs exact, diagonal within stencil bound") {
    GridManifold g = make_flat_grid(2, {65, 65, 1, 1}, {0.0, 0.0, 0.0, 0.0},
                                    {1.015625, 1.015625, 0.0, 0.0}, {false, false, false, false});
    const std::size_t src = g.nearest_node({0.25, 0.25, 0.0, 0.0});
    DiscreteField d = geodesic_distances(g, src);
    CHECK(d[src] == 0.0);

    const std::size_t axis = g.nearest_node({0.75, 0.25, 0.0, 0.0});
    const double h = g.spacing()[0];
    CHECK(d[axis] == Catch::Approx(0.5).margin(h));

    const std::size_t diag = g.nearest_node({0.75, 0.75, 0.0, 0.0});
    const double exact = std::sqrt(0.5);
    CHECK(d[diag] >= exact - h);
    CHECK(d[diag] <= exact * 1.08 + h);  // 8-stencil overestimate <= 8%

    SECTION("graph triangle inequality on a node triple") {
        const std::size_t b = g.nearest_node({0.6, 0.4, 0.0, 0.0});
        DiscreteField db = geodesic_distances(g, b);
        CHECK(d[diag] <= d[b] + db[diag] + 1e-12);
    }

    SECTION("nonnegative everywhere") {
        for (std::size_t i = 0; i < g.n_nodes(); ++i) CHECK(d[i] >= 0.0);
    }
}

TEST_CASE("refinement: diagonal overestimate stays within the stencil bound") {
    double prev = kInf;
    for (int n : {17, 33, 65}) {
        GridManifold g = make_flat_grid(2, {n, n, 1, 1}, {0.0, 0.0, 0.0, 0.0},
                                        {1.0, 1.0, 0.0, 0.0}, {false, false, false, false});
        const std::size_t a = g.nearest_node({0.1, 0.1, 0.0, 0.0});
        const std::size_t b = g.nearest_node({0.9, 0.9, 0.0, 0.0});
        DiscreteField d = geodesic_distances(g, a);
        const auto pa = g.coords(a), pb = g.coords(b);
        const double exact = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
        const double over = d[b] / exact;
        CHECK(over >= 1.0 - 1e-9);
        CHECK(over <= 1.083);
        prev = std::min(prev, over);
    }
}

TEST_CASE("power metric: distance along the degenerate line collapses") {
    // d((0,-1/2),(0,1/2)) -> 0 under refinement for alpha = 1
    double prev = kInf;
    for (int n : {32, 64, 128}) {
        GridManifold g = discretize_power({1.0}, {-1.0, 1.0}, {-1.0, 1.0}, n, n);
        const std::size_t a = g.nearest_node({0.0, -0.5, 0.0, 0.0});
        const std::size_t b = g.nearest_node({0.0, 0.5, 0.0, 0.0});
        DiscreteField d = geodesic_distances(g, a);
        CHECK(d[b] < prev);
        prev = d[b];
    }
    CHECK(prev < 0.05);
}

TEST_CASE("torus wrap: distance uses the short way around") {
    GridManifold g = make_unit_flat_torus(32);
    const std::size_t a = g.nearest_node({0.05, 0.5, 0.0, 0.0});
    const std::size_t b = g.nearest_node({0.95, 0.5, 0.0, 0.0});
    DiscreteField d = geodesic_distances(g, a);
    CHECK(d[b] == Catch::Approx(0.1).margin(0.04));
}
