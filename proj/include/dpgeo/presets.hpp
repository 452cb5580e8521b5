#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpgeo/csvio.hpp"
#include "dpgeo/curvature.hpp"
#include "dpgeo/dp_solver.hpp"
#include "dpgeo/energy.hpp"
#include "dpgeo/entropy.hpp"
#include "dpgeo/fd_curvature.hpp"
#include "dpgeo/geodesic.hpp"
#include "dpgeo/grid.hpp"
#include "dpgeo/metric_compare.hpp"
#include "dpgeo/profiles.hpp"
#include "dpgeo/ricci_flow.hpp"
#include "dpgeo/rng.hpp"

namespace dpgeo::presets {

using json = nlohmann::ordered_json;

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    int exit_code = 0;  // 0 ok; 2 config; 3 solver non-convergence
    json summary;
    std::vector<Check> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline void add_check(RunResult& r, const std::string& name, bool pass, const std::string& detail) {
    r.checks.push_back({name, pass, detail});
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Strip torus used by the collapse/entropy/lq presets: one building-block
/// strip along the y axis, center snapped onto a node row.
inline GridManifold strip_torus(int n_grid, double delta, double eps, double r0) {
    StripGridSpec spec;
    spec.dim = 2;
    spec.shape = {n_grid, n_grid, 1, 1};
    spec.lo = {0.0, 0.0, 0.0, 0.0};
    spec.lengths = {1.0, 1.0, 0.0, 0.0};
    spec.periodic = {true, true, false, false};
    StripSpec s;
    s.fiber_axis = 1;
    s.center = {0.5 + 0.5 / double(n_grid), 0.0, 0.0, 0.0};
    s.r0 = r0;
    s.delta = delta;
    s.eps = eps;
    spec.strips = {s};
    return discretize_strip_metric(spec);
}

/// p-ball volumes at log radii via probe solves + multilinear interpolation of
/// the probe field (2-D periodic grids).
inline std::vector<double> ball_volumes(const GridManifold& g, std::size_t center, double p,
                                        int stride, const std::vector<double>& radii,
                                        const DpOptions& opt) {
    const int N = g.shape()[0];
    std::vector<std::size_t> probes;
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        auto mi = g.multi_index(id);
        if (mi[0] % stride == 0 && mi[1] % stride == 0) probes.push_back(id);
    }
    std::vector<double> vals = dp_field_probes(g, center, probes, p, opt);
    const int M = N / stride;
    auto pv = [&](int i, int j) {
        i = (i % M + M) % M;
        j = (j % M + M) % M;
        return vals[std::size_t(i) * std::size_t(M) + std::size_t(j)];
    };
    std::vector<double> vol(radii.size(), 0.0);
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        auto mi = g.multi_index(id);
        const double fi = double(mi[0]) / stride, fj = double(mi[1]) / stride;
        const int i0 = int(fi), j0 = int(fj);
        const double ti = fi - i0, tj = fj - j0;
        const double d = (1 - ti) * (1 - tj) * pv(i0, j0) + ti * (1 - tj) * pv(i0 + 1, j0) +
                         (1 - ti) * tj * pv(i0, j0 + 1) + ti * tj * pv(i0 + 1, j0 + 1);
        for (std::size_t r = 0; r < radii.size(); ++r)
            if (d < radii[r]) vol[r] += g.vol_weight(id);
    }
    return vol;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

/// Allowed keys and JSON types per key; every preset accepts the common keys.
/// Unknown keys are rejected (schema published in config.schema.json).
inline const std::map<std::string, std::string>& config_schema() {
    static const std::map<std::string, std::string> schema{
        {"schema_version", "integer"}, {"experiment", "string"}, {"seed", "integer"},
        {"out_dir", "string"},         {"check", "boolean"},    {"p", "number"},
        {"n", "integer"},              {"grid_n", "integer"},   {"delta", "number"},
        {"eps", "number"},             {"alpha", "number"},     {"r0", "number"},
        {"tau", "number"},             {"q", "number"},         {"taus", "array"},
        {"sweep_deltas", "array"},     {"sweep_epss", "array"}, {"sweep_r0s", "array"},
        {"grids", "array"},            {"separations", "array"},
    };
    return schema;
}

inline void validate_config(const json& cfg) {
    if (!cfg.is_object()) throw std::invalid_argument("config: expected a JSON object");
    if (!cfg.contains("schema_version") || !cfg["schema_version"].is_number_integer() ||
        cfg["schema_version"].get<int>() != 1)
        throw std::invalid_argument("config: schema_version must be the integer 1");
    const auto& schema = config_schema();
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        auto s = schema.find(it.key());
        if (s == schema.end())
            throw std::invalid_argument("config: unknown key '" + it.key() + "'");
        const std::string& t = s->second;
        const json& v = it.value();
        const bool ok = (t == "integer" && v.is_number_integer()) ||
                        (t == "number" && v.is_number()) || (t == "string" && v.is_string()) ||
                        (t == "boolean" && v.is_boolean()) || (t == "array" && v.is_array());
        if (!ok) throw std::invalid_argument("config: key '" + it.key() + "' must be " + t);
    }
}

namespace detail {

inline double num(const json& cfg, const std::string& key, double dflt) {
    return cfg.contains(key) ? cfg[key].get<double>() : dflt;
}
inline int integer(const json& cfg, const std::string& key, int dflt) {
    return cfg.contains(key) ? cfg[key].get<int>() : dflt;
}
inline std::vector<double> numbers(const json& cfg, const std::string& key,
                                   std::vector<double> dflt) {
    if (!cfg.contains(key)) return dflt;
    std::vector<double> out;
    for (const auto& v : cfg[key]) out.push_back(v.get<double>());
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// euclid-scaling: d_p(sep) on flat 2-D grids; fitted log-log slope vs the
/// Euclidean exponent 1 - n/p. Reports raw per-grid values and the two-grid
/// h^(1/2) Richardson extrapolation (the pin-core error order).
inline RunResult run_euclid_scaling(const json& cfg, const std::string& out) {
    RunResult rr;
    const double p = detail::num(cfg, "p", 3.0);
    std::vector<double> grids = detail::numbers(cfg, "grids", {64, 128, 256});
    std::vector<double> seps = detail::numbers(cfg, "separations", {0.25, 0.5, 1.0});
    const double target = 1.0 - 2.0 / p;

    // domain chosen so every separation is an exact node offset
    std::map<int, std::vector<double>> dp_raw;     // grid -> per-sep values
    std::map<int, std::vector<double>> energy_raw;
    for (double gn : grids) {
        const int N = int(gn);
        const double L = 0.25 / 14.0 * 128.0;  // 2.2857...; h divides 0.25 for N in {64,128,256}
        GridManifold g = make_flat_grid(2, {N, N, 1, 1}, {-L / 2, -L / 2, 0, 0}, {L, L, 0, 0},
                                        {false, false, false, false});
        EnergyModel m = EnergyModel::from_grid(g);
        const double h = g.spacing()[0];
        for (double sep : seps) {
            const int k = int(std::lround(sep / h));
            const int j0 = N / 2;
            const int i1 = N / 2 - k / 2;
            auto id = [&](int i, int j) { return std::size_t(i) * std::size_t(N) + std::size_t(j); };
            DpSolveResult r = dp_distance_model(m, id(i1, j0), id(i1 + k, j0), p);
            if (!r.converged) rr.exit_code = 3;
            dp_raw[N].push_back(r.value);
            energy_raw[N].push_back(r.energy);
        }
    }
    // Richardson in h^{1/2} on the energies: E_ext = (sqrt(2) E_fine - E_coarse)/(sqrt(2)-1)
    auto extrapolate = [&](int coarse, int fine) {
        std::vector<double> out_dp;
        const double s2 = std::sqrt(2.0);
        for (std::size_t i = 0; i < seps.size(); ++i) {
            const double E = (s2 * energy_raw[fine][i] - energy_raw[coarse][i]) / (s2 - 1.0);
            out_dp.push_back(std::pow(E, -1.0 / p));
        }
        return out_dp;
    };
    std::vector<double> lsep;
    for (double s : seps) lsep.push_back(std::log(s));
    auto slope_of = [&](const std::vector<double>& dps) {
        std::vector<double> l;
        for (double d : dps) l.push_back(std::log(d));
        return fit_slope(lsep, l);
    };

    CsvWriter csv(out + "/euclid_scaling.csv", {"sep", "dp_64", "dp_128", "dp_256", "dp_ext_128", "dp_ext_256", "S_est_ext_256"});
    auto ext128 = extrapolate(int(grids[0]), int(grids[1]));
    auto ext256 = extrapolate(int(grids[1]), int(grids[2]));
    for (std::size_t i = 0; i < seps.size(); ++i) {
        const double S_est = ext256[i] * std::pow(seps[i], 2.0 / p - 1.0);
        csv.row({seps[i], dp_raw[int(grids[0])][i], dp_raw[int(grids[1])][i],
                 dp_raw[int(grids[2])][i], ext128[i], ext256[i], S_est});
    }
    const double slope_raw_128 = slope_of(dp_raw[int(grids[1])]);
    const double slope_raw_256 = slope_of(dp_raw[int(grids[2])]);
    const double slope_ext_128 = slope_of(ext128);
    const double slope_ext_256 = slope_of(ext256);
    rr.summary = json{{"experiment", "euclid-scaling"},
                      {"p", p},
                      {"target_slope", target},
                      {"slope_raw_128", slope_raw_128},
                      {"slope_raw_256", slope_raw_256},
                      {"slope_ext_128", slope_ext_128},
                      {"slope_ext_256", slope_ext_256},
                      {"S_estimate", ext256.back() * std::pow(seps.back(), 2.0 / p - 1.0)}};
    const double err128 = std::abs(slope_ext_128 - target) / target;
    detail::add_check(rr, "slope(128^2, extrapolated) within 5% of 1 - 2/p", err128 <= 0.05,
                      "slope=" + detail::fmt(slope_ext_128) + " target=" + detail::fmt(target) +
                          " rel_err=" + detail::fmt(err128));
    const double raw_err_128 = std::abs(slope_raw_128 - target);
    const double raw_err_256 = std::abs(slope_raw_256 - target);
    detail::add_check(rr, "raw slope error improves from 128^2 to 256^2", raw_err_256 < raw_err_128,
                      "err128=" + detail::fmt(raw_err_128) + " err256=" + detail::fmt(raw_err_256));
    return rr;
}

/// power-degeneracy: d_p between two points on {x=0} under grid refinement for
/// alpha p >= 1 (collapsing) and alpha p < 1 (stable).
inline RunResult run_power_degeneracy(const json& cfg, const std::string& out) {
    RunResult rr;
    const double p = detail::num(cfg, "p", 3.0);
    std::vector<double> grids = detail::numbers(cfg, "grids", {32, 64, 128, 256});
    CsvWriter csv(out + "/power_degeneracy.csv", {"alpha", "grid_n", "dp", "ratio_to_prev"});
    json alphas_summary = json::array();
    std::map<double, std::vector<double>> values;
    for (double alpha : {0.5, 0.1}) {
        double prev = 0.0;
        for (double gn : grids) {
            const int N = int(gn);
            GridManifold g = discretize_power({alpha}, {-1.0, 1.0}, {-1.0, 1.0}, N, N);
            const std::size_t a = g.nearest_node({0.0, -0.5, 0, 0});
            const std::size_t b = g.nearest_node({0.0, 0.5, 0, 0});
            DpSolveResult r = dp_distance(g, a, b, p);
            if (!r.converged) rr.exit_code = 3;
            csv.row({alpha, double(N), r.value, prev > 0.0 ? r.value / prev : 0.0});
            values[alpha].push_back(r.value);
            prev = r.value;
        }
        alphas_summary.push_back({{"alpha", alpha}, {"dp", values[alpha]}});
    }
    rr.summary = json{{"experiment", "power-degeneracy"}, {"p", p}, {"series", alphas_summary}};

    const auto& v05 = values[0.5];
    bool coll = true;
    std::string det;
    for (std::size_t i = 1; i < v05.size(); ++i) {
        const double drop = 1.0 - v05[i] / v05[i - 1];
        coll = coll && drop >= 0.25;
        det += detail::fmt(100.0 * drop) + "% ";
    }
    detail::add_check(rr, "alpha=0.5 (alpha p >= 1): d_p drops >= 25% per doubling", coll,
                      "per-doubling decreases: " + det);
    const auto& v01 = values[0.1];
    const double last_change = std::abs(1.0 - v01.back() / v01[v01.size() - 2]);
    detail::add_check(rr, "alpha=0.1 (alpha p < 1): d_p changes <= 5% over the last doubling",
                      last_change <= 0.05, "last change " + detail::fmt(100.0 * last_change) + "%");
    return rr;
}

/// building-block-curvature: (delta, eps) sweep of min R with the three-case
/// breakdown; records the empirical thresholds.
inline RunResult run_building_block_curvature(const json& cfg, const std::string& out) {
    RunResult rr;
    const int n = detail::integer(cfg, "n", 3);
    std::vector<double> deltas = detail::numbers(cfg, "sweep_deltas", {1e-8, 1e-7, 1e-6, 8e-6});
    std::vector<double> epss = detail::numbers(cfg, "sweep_epss", {1e-4, 1e-3, 1e-2});
    CsvWriter csv(out + "/building_block_minR.csv",
                  {"delta", "eps", "min_R", "min_R_case1", "min_R_case2", "min_R_case3", "r_at_min"});
    bool found = false;
    json best;
    for (double delta : deltas) {
        for (double eps : epss) {
            CurvatureReport rep = min_scalar_report({n, delta, eps}, 10.0, 4000);
            csv.row({delta, eps, rep.min_R, rep.min_R_case1, rep.min_R_case2, rep.min_R_case3,
                     rep.r_at_min});
            const bool ok = delta <= 1e-3 && eps <= 1e-3 && rep.min_R >= -0.1 &&
                            rep.min_R_case1 > 0.0 && rep.min_R_case2 > 0.0;
            if (ok && !found) {
                found = true;
                best = json{{"delta", delta}, {"eps", eps}, {"min_R", rep.min_R},
                            {"min_R_case1", rep.min_R_case1}, {"min_R_case2", rep.min_R_case2}};
                // full profile dump for the qualifying pair
                ProfilePair pp = make_building_block({n, delta, eps}, 10.0);
                rep.write_csv(out + "/building_block_profile.csv", pp);
            }
        }
    }
    rr.summary = json{{"experiment", "building-block-curvature"}, {"n", n},
                      {"qualifying_pair", found ? best : json()}};
    detail::add_check(rr, "exists (delta, eps) <= (1e-3, 1e-3) with min R >= -0.1 and cases 1-2 positive",
                      found, found ? best.dump() : "no qualifying pair in sweep");
    return rr;
}

/// curvature-oracle: closed-form warped scalar curvature vs the FD Riemann
/// contraction on random smooth profiles.
inline RunResult run_curvature_oracle(const json& cfg, const std::string& out) {
    RunResult rr;
    const int trials = detail::integer(cfg, "grid_n", 20);
    Rng rng(std::uint64_t(detail::integer(cfg, "seed", 1234)));
    CsvWriter csv(out + "/curvature_oracle.csv", {"trial", "r", "R_formula", "R_fd", "rel_err"});
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        ProfilePair pp = random_smooth_profiles(rng);
        for (double r : {0.4, 0.9, 1.7, 2.6}) {
            const double exact = scalar_curvature(pp, 3, r);
            const double fd = fd_scalar_curvature_warped(pp, 3, r);
            const double rel = std::abs(fd - exact) / std::max(std::abs(exact), 0.1);
            worst = std::max(worst, rel);
            csv.row({double(t), r, exact, fd, rel});
        }
    }
    rr.summary = json{{"experiment", "curvature-oracle"}, {"trials", trials}, {"max_rel_err", worst}};
    detail::add_check(rr, "formula vs FD Riemann contraction: max rel err <= 1e-4", worst <= 1e-4,
                      "max_rel_err=" + detail::fmt(worst));
    return rr;
}

/// entropy-flat-torus: mu(tau) sweep on the flat unit torus.
inline RunResult run_entropy_flat_torus(const json& cfg, const std::string& out) {
    RunResult rr;
    const int N = detail::integer(cfg, "grid_n", 64);
    std::vector<double> taus = detail::numbers(cfg, "taus", {0.5, 0.1, 0.02});
    GridManifold g = make_unit_flat_torus(N);
    CsvWriter csv(out + "/entropy_flat_torus.csv", {"tau", "mu", "el_residual", "constraint_error", "iterations"});
    std::vector<double> mus;
    bool resid_ok = true, nonpos = true;
    for (double tau : taus) {
        EntropyResult e = mu_entropy(g, tau);
        double unorm = 0.0;
        for (std::size_t i = 0; i < g.n_nodes(); ++i)
            unorm += g.vol_weight(i) * e.minimizer_u[i] * e.minimizer_u[i];
        unorm = std::sqrt(unorm);
        csv.row({tau, e.mu, e.el_residual, e.constraint_error, double(e.iterations)});
        mus.push_back(e.mu);
        nonpos = nonpos && e.mu <= 1e-3;
        resid_ok = resid_ok && e.el_residual <= 1e-4 * unorm;
    }
    bool increasing = true;
    for (std::size_t i = 1; i < mus.size(); ++i) increasing = increasing && mus[i] > mus[i - 1];
    rr.summary = json{{"experiment", "entropy-flat-torus"}, {"grid_n", N}, {"taus", taus}, {"mus", mus}};
    detail::add_check(rr, "mu <= 1e-3 for every tau", nonpos, "mus=" + rr.summary["mus"].dump());
    detail::add_check(rr, "mu strictly increasing toward 0 along the tau sweep", increasing,
                      "mus=" + rr.summary["mus"].dump());
    detail::add_check(rr, "EL residual <= 1e-4 ||u|| at each minimizer", resid_ok, "");
    return rr;
}

/// entropy-strip-sweep: mu of the strip torus approaches the flat-torus mu
/// monotonically as (delta, eps) decrease.
inline RunResult run_entropy_strip_sweep(const json& cfg, const std::string& out) {
    RunResult rr;
    const int N = detail::integer(cfg, "grid_n", 64);
    const double tau = detail::num(cfg, "tau", 0.1);
    const double r0 = detail::num(cfg, "r0", 0.25);
    std::vector<double> deltas = detail::numbers(cfg, "sweep_deltas", {0.8, 0.5, 0.3, 0.15});
    std::vector<double> epss = detail::numbers(cfg, "sweep_epss", {0.12, 0.09, 0.06, 0.03});
    GridManifold flat = make_unit_flat_torus(N);
    const double mu_flat = mu_entropy(flat, tau).mu;
    CsvWriter csv(out + "/entropy_strip_sweep.csv", {"delta", "eps", "volume", "mu", "iterations"});
    std::vector<double> mus;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        GridManifold g = detail::strip_torus(N, deltas[i], epss[i], r0);
        EntropyResult e = mu_entropy(g, tau);
        csv.row({deltas[i], epss[i], g.total_volume(), e.mu, double(e.iterations)});
        mus.push_back(e.mu);
    }
    bool increasing = true, below = true;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        if (i > 0) increasing = increasing && mus[i] > mus[i - 1];
        below = below && mus[i] <= mu_flat + 1e-6;
    }
    rr.summary = json{{"experiment", "entropy-strip-sweep"}, {"tau", tau}, {"mu_flat", mu_flat},
                      {"mus", mus}};
    detail::add_check(rr, "mu increases monotonically toward the flat-torus mu", increasing && below,
                      "mu_flat=" + detail::fmt(mu_flat) + " mus=" + rr.summary["mus"].dump());
    return rr;
}

/// flow-conformal: Ricci flow of a conformal perturbation on the unit torus.
inline RunResult run_flow_conformal(const json& cfg, const std::string& out) {
    RunResult rr;
    const int N = detail::integer(cfg, "grid_n", 64);
    const double amp = detail::num(cfg, "delta", 0.1);
    const double t_end = detail::num(cfg, "tau", 2.0);
    std::vector<double> u(std::size_t(N) * std::size_t(N));
    constexpr double kPi = 3.14159265358979323846;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double x = (i + 0.5) / double(N), y = (j + 0.5) / double(N);
            u[std::size_t(i) * std::size_t(N) + std::size_t(j)] =
                amp * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
        }
    ConformalFlowState st(u, N);
    CsvWriter csv(out + "/flow_conformal.csv", {"t", "min_R", "max_abs_R", "volume", "sup_dev"});
    double minR = st.min_R();
    bool monotone = true;
    int step = 0;
    while (st.t() < t_end) {
        const double dt = std::min(0.9 * st.cfl_bound(), t_end - st.t());
        st.step(dt);
        const double m = st.min_R();
        monotone = monotone && m >= minR - 1e-6;
        minR = std::max(minR, m);
        if (step++ % 500 == 0) {
            const FlowSample& smp = st.history().back();
            csv.row({smp.t, smp.min_R, smp.max_abs_R, smp.volume, st.sup_deviation()});
        }
    }
    const double dev = st.sup_deviation();
    rr.summary = json{{"experiment", "flow-conformal"}, {"grid_n", N}, {"steps", step},
                      {"final_sup_dev", dev}, {"min_R_final", st.min_R()}};
    detail::add_check(rr, "min R non-decreasing within 1e-6 per step", monotone, "");
    detail::add_check(rr, "||u - mean u||_inf <= 0.01 by t = 2", dev <= 0.01,
                      "sup_dev=" + detail::fmt(dev));
    return rr;
}

/// flow-warped: building-block flow; volume inequality per step and
/// consistency-order halving of the scalar-evolution residual.
inline RunResult run_flow_warped(const json& cfg, const std::string& out) {
    RunResult rr;
    const int n = detail::integer(cfg, "n", 3);
    const double delta = detail::num(cfg, "delta", 6.6e-6);
    const double eps = detail::num(cfg, "eps", 0.05);
    BuildingBlockParams p{n, delta, eps};
    ProfilePair bb = make_building_block(p, 12.0);

    WarpedFlowState st(bb, n, 0.5, 12.0, 1200);
    const double dt = 0.9 * st.cfl_bound();
    bool vol_ok = true, monotone = true;
    double minR = st.min_R();
    CsvWriter csv(out + "/flow_warped.csv", {"t", "min_R", "max_abs_R", "volume"});
    for (int k = 0; k < 50; ++k) {
        const FlowSample before = st.history().back();
        st.step(dt);
        if (st.singular()) {
            rr.exit_code = 3;
            break;
        }
        vol_ok = vol_ok && volume_inequality_holds(before, st.history().back());
        monotone = monotone && st.min_R() >= minR - 1e-6;
        minR = std::max(minR, st.min_R());
        const FlowSample& smp = st.history().back();
        csv.row({smp.t, smp.min_R, smp.max_abs_R, smp.volume});
    }
    auto residual_at = [&](int nodes) {
        WarpedFlowState w(bb, n, 0.5, 12.0, nodes);
        const double dtt = 10.0 / double(nodes) / double(nodes);
        for (int k = 0; k < 10; ++k) w.step(dtt);
        return w.scalar_evolution_residual(2.2, 3.8);
    };
    const double rA = residual_at(700), rB = residual_at(990);
    const double ratio = rA / rB;
    rr.summary = json{{"experiment", "flow-warped"}, {"delta", delta}, {"eps", eps},
                      {"residual_coarse", rA}, {"residual_fine", rB}, {"residual_ratio", ratio}};
    detail::add_check(rr, "volume inequality holds per step", vol_ok, "");
    detail::add_check(rr, "min R non-decreasing within 1e-6 per step", monotone, "");
    detail::add_check(rr, "scalar-evolution residual halves when dt and h^2 halve",
                      ratio > 1.6 && ratio < 2.6, "ratio=" + detail::fmt(ratio));
    return rr;
}

/// torus-collapse: geodesic collapse of the strip fiber vs d_p stability
/// (the collapse-dichotomy demo).
inline RunResult run_torus_collapse(const json& cfg, const std::string& out) {
    RunResult rr;
    const int N = detail::integer(cfg, "grid_n", 64);
    const double p = detail::num(cfg, "p", 2.5);
    std::vector<double> deltas = detail::numbers(cfg, "sweep_deltas", {0.30, 0.20, 0.12});
    std::vector<double> r0s = detail::numbers(cfg, "sweep_r0s", {0.30, 0.25, 0.20});
    const double cx = 0.5 + 0.5 / double(N);
    const double eps_check = 0.1;

    // 1) geodesic diameter of the collapsed direction along the sweep
    std::vector<double> collapsed;
    CsvWriter csv(out + "/torus_collapse_sweep.csv", {"delta", "eps", "r0", "collapsed_diameter"});
    std::vector<GridManifold> gs;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const double eps = std::exp(-1.0 / (deltas[k] * deltas[k]));  // paper coupling
        gs.push_back(detail::strip_torus(N, deltas[k], eps, r0s[k]));
        const GridManifold& g = gs.back();
        DiscreteField d = geodesic_distances(g, g.nearest_node({cx, 0.25, 0, 0}));
        collapsed.push_back(d[g.nearest_node({cx, 0.75, 0, 0})]);
        csv.row({deltas[k], eps, r0s[k], collapsed.back()});
    }
    bool coll_ok = true;
    for (std::size_t k = 1; k < collapsed.size(); ++k)
        coll_ok = coll_ok && collapsed[k] <= collapsed[k - 1] / 3.0;

    // 2) dp_close_check against the flat torus at the finest setting
    GridManifold flat = make_unit_flat_torus(N);
    const GridManifold& g = gs.back();
    const double r0 = r0s.back();
    const double pts[6][2] = {{cx + r0 / 3, 0.1}, {cx + r0 / 3, 0.6}, {cx + 0.45, 0.15},
                              {cx + 0.45, 0.65}, {cx - 0.3, 0.35},  {cx + 0.2, 0.85}};
    std::vector<std::size_t> ids_s, ids_f;
    for (auto& q : pts) {
        ids_s.push_back(g.nearest_node({q[0], q[1], 0, 0}));
        ids_f.push_back(flat.nearest_node({q[0], q[1], 0, 0}));
    }
    auto mk_space = [&](const GridManifold& gr, const std::vector<std::size_t>& ids, bool use_dp) {
        FiniteMetricSpace X;
        const std::size_t k = ids.size();
        X.points.resize(k);
        for (std::size_t i = 0; i < k; ++i) X.points[i] = gr.coords(ids[i]);
        X.weights.assign(k, gr.total_volume() / double(k));
        if (use_dp) {
            X.dist = dp_matrix(gr, ids, p);
        } else {
            X.dist.assign(k, std::vector<double>(k, 0.0));
            for (std::size_t i = 0; i < k; ++i) {
                DiscreteField d = geodesic_distances(gr, ids[i]);
                for (std::size_t j = 0; j < k; ++j) X.dist[i][j] = d[ids[j]];
            }
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i + 1; j < k; ++j) {
                    const double dd = 0.5 * (X.dist[i][j] + X.dist[j][i]);
                    X.dist[i][j] = X.dist[j][i] = dd;
                }
        }
        return X;
    };
    FiniteMetricSpace Xs = mk_space(g, ids_s, true);
    FiniteMetricSpace Xf = mk_space(flat, ids_f, true);
    // matched p-ball volumes on the probed radii
    BallVolumes bs, bf;
    bs.radii = bf.radii = dp_close_radii(eps_check);
    DpOptions ball_opt;
    ball_opt.tol = 1e-7;
    for (std::size_t i = 0; i < ids_s.size(); ++i) {
        bs.vol.push_back(detail::ball_volumes(g, ids_s[i], p, 8, bs.radii, ball_opt));
        bf.vol.push_back(detail::ball_volumes(flat, ids_f[i], p, 8, bf.radii, ball_opt));
    }
    DpCloseReport dp_rep = dp_close_check(Xs, Xf, eps_check, bs, bf);
    FiniteMetricSpace Gs = mk_space(g, ids_s, false);
    FiniteMetricSpace Gf = mk_space(flat, ids_f, false);
    DpCloseReport geo_rep = dp_close_check(Gs, Gf, eps_check, bs, bf);  // same volumes; gaps drive failure

    rr.summary = json{{"experiment", "torus-collapse"},
                      {"p", p},
                      {"collapsed_diameters", collapsed},
                      {"dp_worst_pair_gap", dp_rep.worst_pair_gap},
                      {"dp_worst_volume_ratio", dp_rep.worst_volume_ratio},
                      {"geodesic_worst_pair_gap", geo_rep.worst_pair_gap},
                      {"clamp_floor", g.clamp_floor()}};
    detail::add_check(rr, "collapsed-direction geodesic diameter drops >= 3x per sweep step", coll_ok,
                      rr.summary["collapsed_diameters"].dump());
    detail::add_check(rr, "dp_close_check vs flat torus passes at eps = 0.1 (finest)", dp_rep.pass,
                      "worst_gap=" + detail::fmt(dp_rep.worst_pair_gap) +
                          " worst_vol_ratio=" + detail::fmt(dp_rep.worst_volume_ratio));
    detail::add_check(rr, "the same check with geodesic distances fails", !geo_rep.pass,
                      "geodesic worst_gap=" + detail::fmt(geo_rep.worst_pair_gap));
    return rr;
}

/// taxicab: 3-D strip-dense box in the blown-up gauge; geodesics approach the
/// l1 distance as the line families densify.
inline RunResult run_taxicab(const json& cfg, const std::string& out) {
    RunResult rr;
    const int N = detail::integer(cfg, "grid_n", 80);
    const double kappa = detail::num(cfg, "delta", 0.15);  // core fiber factor e^{-1/delta}-free form
    std::vector<double> Ds = detail::numbers(cfg, "sweep_r0s", {0.3, 0.15, 0.075});
    const double h = 1.0 / double(N);
    CsvWriter csv(out + "/taxicab.csv", {"generation", "line_spacing", "deviation"});
    std::vector<double> devs;
    for (std::size_t gen = 0; gen < Ds.size(); ++gen) {
        const double D = Ds[gen];
        StripGridSpec spec;
        spec.dim = 3;
        spec.shape = {N, N, N, 1};
        spec.lo = {0, 0, 0, 0};
        spec.lengths = {1, 1, 1, 0};
        spec.periodic = {false, false, false, false};
        spec.bg_coeff = 1.0 / (kappa * kappa);
        // three axis families on offset lattices (pairwise tube gap D/4)
        auto snap = [&](double x) { return (std::floor(x / h) + 0.5) * h; };
        const double r0 = 0.6 * h;  // single-row cores
        const int m = int(std::floor(1.0 / D));
        for (int fam = 0; fam < 3; ++fam) {
            for (int i = 0; i <= m; ++i)
                for (int j = 0; j <= m; ++j) {
                    StripSpec s;
                    s.fiber_axis = fam;
                    s.r0 = r0;
                    s.delta = 0.5;
                    s.eps = kappa * kappa;  // phi core = eps^delta = kappa
                    double c1 = D * i, c2 = D * j;
                    if (fam == 0) { c1 += 0.0;      c2 += 0.0; }
                    if (fam == 1) { c1 += 0.25 * D; c2 += 0.5 * D; }   // (z, x) offsets
                    if (fam == 2) { c1 += 0.5 * D;  c2 += 0.25 * D; }  // (x, y) offsets
                    if (c1 > 1.0 || c2 > 1.0) continue;
                    const int a1 = (fam + 1) % 3, a2 = (fam + 2) % 3;
                    s.center[std::size_t(a1)] = snap(c1);
                    s.center[std::size_t(a2)] = snap(c2);
                    spec.strips.push_back(s);
                }
        }
        GridManifold g = discretize_strip_metric(spec);
        // diagonal pair on x-family cores near opposite corners
        const std::size_t A = g.nearest_node({0.08, snap(0.0) , snap(0.0), 0});
        const double far = std::floor(0.92 / D) * D;
        const std::size_t B = g.nearest_node({0.92, snap(far), snap(far), 0});
        DiscreteField d = geodesic_distances(g, A);
        const auto ca = g.coords(A), cb = g.coords(B);
        double l1 = 0.0;
        for (int a = 0; a < 3; ++a) l1 += std::abs(ca[std::size_t(a)] - cb[std::size_t(a)]);
        const double dev = std::abs(d[B] - l1) / l1;
        devs.push_back(dev);
        csv.row({double(gen), D, dev});
    }
    bool monotone = true;
    for (std::size_t k = 1; k < devs.size(); ++k) monotone = monotone && devs[k] < devs[k - 1];
    rr.summary = json{{"experiment", "taxicab"}, {"grid_n", N}, {"deviations", devs}};
    detail::add_check(rr, "taxicab deviation decreases over three strip-density generations",
                      monotone, rr.summary["deviations"].dump());
    detail::add_check(rr, "deviation < 0.15 at the finest generation", devs.back() < 0.15,
                      "final=" + detail::fmt(devs.back()));
    return rr;
}

/// lq-scalar: volume-averaged |R|^q on strip tori; trend in (delta, eps).
inline RunResult run_lq_scalar(const json& cfg, const std::string& out) {
    RunResult rr;
    const int N = detail::integer(cfg, "grid_n", 64);
    const double q = detail::num(cfg, "q", 0.5);
    const double r0 = detail::num(cfg, "r0", 0.25);
    std::vector<double> deltas = detail::numbers(cfg, "sweep_deltas", {0.6, 0.4, 0.25, 0.15});
    std::vector<double> epss = detail::numbers(cfg, "sweep_epss", {0.10, 0.08, 0.06, 0.04});
    CsvWriter csv(out + "/lq_scalar.csv", {"delta", "eps", "lq_norm"});
    std::vector<double> norms;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        GridManifold g = detail::strip_torus(N, deltas[i], epss[i], r0);
        norms.push_back(lq_scalar_norm(g, q));
        csv.row({deltas[i], epss[i], norms.back()});
    }
    GridManifold flat = make_unit_flat_torus(16);
    const double flat_norm = lq_scalar_norm(flat, q);
    bool decreasing = true;
    for (std::size_t i = 1; i < norms.size(); ++i) decreasing = decreasing && norms[i] < norms[i - 1];
    rr.summary = json{{"experiment", "lq-scalar"}, {"q", q}, {"norms", norms}, {"flat", flat_norm}};
    detail::add_check(rr, "fint |R|^q decreases as (delta, eps) shrink", decreasing,
                      rr.summary["norms"].dump());
    detail::add_check(rr, "flat torus norm is 0", flat_norm == 0.0, "");
    return rr;
}

// ---------------------------------------------------------------------------
// Registry and runner
// ---------------------------------------------------------------------------

struct PresetInfo {
    std::string description;
    std::function<RunResult(const json&, const std::string&)> run;
};

inline const std::map<std::string, PresetInfo>& registry() {
    static const std::map<std::string, PresetInfo> reg{
        {"euclid-scaling",
         {"d_p scaling on flat 2-D grids: fitted slope vs 1 - n/p", run_euclid_scaling}},
        {"power-degeneracy",
         {"d_p collapse across {x=0} for g_alpha under refinement", run_power_degeneracy}},
        {"building-block-curvature",
         {"min scalar curvature sweep of the building-block metric", run_building_block_curvature}},
        {"curvature-oracle",
         {"closed-form warped curvature vs FD Riemann contraction", run_curvature_oracle}},
        {"entropy-flat-torus", {"mu(tau) sweep on the flat unit torus", run_entropy_flat_torus}},
        {"entropy-strip-sweep",
         {"mu of strip tori approaching the flat-torus mu", run_entropy_strip_sweep}},
        {"flow-conformal", {"2-D conformal Ricci flow on the unit torus", run_flow_conformal}},
        {"flow-warped", {"doubly warped Ricci flow of the building block", run_flow_warped}},
        {"torus-collapse",
         {"geodesic collapse vs d_p stability of strip tori", run_torus_collapse}},
        {"taxicab", {"strip-dense 3-D box: geodesics approach the l1 metric", run_taxicab}},
        {"lq-scalar", {"volume-averaged |R|^q on strip tori", run_lq_scalar}},
    };
    return reg;
}

/// Execute a preset: validates config, creates the output dir, writes
/// summary.json (with checks), returns the result. Deterministic given the
/// config (all randomness seeded from the config seed).
inline RunResult run_preset(const std::string& name, json cfg, const std::string& out_dir) {
    auto it = registry().find(name);
    if (it == registry().end()) throw std::invalid_argument("unknown preset: " + name);
    if (!cfg.contains("schema_version")) cfg["schema_version"] = 1;
    validate_config(cfg);
    std::filesystem::create_directories(out_dir);
    RunResult rr = it->second.run(cfg, out_dir);
    json checks = json::array();
    for (const auto& c : rr.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    rr.summary["checks"] = checks;
    rr.summary["config"] = cfg;
    std::ofstream js(out_dir + "/summary.json");
    js << rr.summary.dump(2) << "\n";
    return rr;
}

}  // namespace dpgeo::presets
