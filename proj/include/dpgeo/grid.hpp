#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpgeo/mathutil.hpp"
#include "dpgeo/profiles.hpp"
#include "dpgeo/sym.hpp"

namespace dpgeo {

/// Structured cell-centered grid carrying a (possibly degenerate) metric
/// tensor field. Nodes sit at origin + (i + 1/2) spacing per axis, so metric
/// zeros on coordinate hyperplanes are never sampled unless a constructor
/// aligns them on purpose.
class GridManifold {
  public:
    GridManifold(int dim, std::array<int, 4> shape, std::array<double, 4> lo,
                 std::array<double, 4> lengths, std::array<bool, 4> periodic)
        : dim_(dim), shape_(shape), lo_(lo), periodic_(periodic) {
        if (dim < 2 || dim > 4) throw std::invalid_argument("GridManifold: dim in {2,3,4}");
        n_nodes_ = 1;
        for (int a = 0; a < dim; ++a) {
            if (shape_[std::size_t(a)] < 4) throw std::invalid_argument("GridManifold: need >= 4 nodes per axis");
            spacing_[std::size_t(a)] = lengths[std::size_t(a)] / double(shape_[std::size_t(a)]);
            n_nodes_ *= std::size_t(shape_[std::size_t(a)]);
        }
        strides_[std::size_t(dim - 1)] = 1;
        for (int a = dim - 2; a >= 0; --a)
            strides_[std::size_t(a)] = strides_[std::size_t(a + 1)] * std::size_t(shape_[std::size_t(a + 1)]);
        metric_.assign(n_nodes_, SymMat::identity(dim));
        vol_weight_.assign(n_nodes_, 0.0);
        degenerate_.assign(n_nodes_, 0);
    }

    int dim() const { return dim_; }
    std::size_t n_nodes() const { return n_nodes_; }
    const std::array<int, 4>& shape() const { return shape_; }
    const std::array<double, 4>& spacing() const { return spacing_; }
    const std::array<bool, 4>& periodic() const { return periodic_; }
    double min_spacing() const {
        double m = kInf;
        for (int a = 0; a < dim_; ++a) m = std::min(m, spacing_[std::size_t(a)]);
        return m;
    }
    bool closed() const {
        for (int a = 0; a < dim_; ++a)
            if (!periodic_[std::size_t(a)]) return false;
        return true;
    }

    std::size_t index(const std::array<int, 4>& mi) const {
        std::size_t id = 0;
        for (int a = 0; a < dim_; ++a) id += std::size_t(mi[std::size_t(a)]) * strides_[std::size_t(a)];
        return id;
    }

    std::array<int, 4> multi_index(std::size_t id) const {
        std::array<int, 4> mi{};
        for (int a = 0; a < dim_; ++a) {
            mi[std::size_t(a)] = int(id / strides_[std::size_t(a)]);
            id %= strides_[std::size_t(a)];
        }
        return mi;
    }

    std::array<double, 4> coords(std::size_t id) const {
        auto mi = multi_index(id);
        std::array<double, 4> x{};
        for (int a = 0; a < dim_; ++a)
            x[std::size_t(a)] = lo_[std::size_t(a)] + (double(mi[std::size_t(a)]) + 0.5) * spacing_[std::size_t(a)];
        return x;
    }

    /// Node nearest to a coordinate point.
    std::size_t nearest_node(const std::array<double, 4>& x) const {
        std::array<int, 4> mi{};
        for (int a = 0; a < dim_; ++a) {
            int i = int(std::lround((x[std::size_t(a)] - lo_[std::size_t(a)]) / spacing_[std::size_t(a)] - 0.5));
            if (periodic_[std::size_t(a)]) {
                i %= shape_[std::size_t(a)];
                if (i < 0) i += shape_[std::size_t(a)];
            } else {
                i = std::clamp(i, 0, shape_[std::size_t(a)] - 1);
            }
            mi[std::size_t(a)] = i;
        }
        return index(mi);
    }

    /// Neighbor id along axis (dir = +1/-1); false when the edge leaves a
    /// non-periodic boundary.
    bool neighbor(std::size_t id, int axis, int dir, std::size_t& out) const {
        auto mi = multi_index(id);
        int i = mi[std::size_t(axis)] + dir;
        if (periodic_[std::size_t(axis)]) {
            if (i < 0) i += shape_[std::size_t(axis)];
            if (i >= shape_[std::size_t(axis)]) i -= shape_[std::size_t(axis)];
        } else if (i < 0 || i >= shape_[std::size_t(axis)]) {
            return false;
        }
        mi[std::size_t(axis)] = i;
        out = index(mi);
        return true;
    }

    const SymMat& metric(std::size_t id) const { return metric_[id]; }
    double vol_weight(std::size_t id) const { return vol_weight_[id]; }
    bool is_degenerate(std::size_t id) const { return degenerate_[id] != 0; }

    void set_metric(std::size_t id, const SymMat& g) {
        metric_[id] = g;
        refresh_node(id);
    }

    double total_volume() const {
        double v = 0.0;
        for (double w : vol_weight_) v += w;
        return v;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= spacing_[std::size_t(a)];
        return v;
    }

    /// Eigenvalue floor for inverse-metric contraction (pseudo-inverse sense).
    double clamp_floor() const { return sqr(min_spacing()); }

    /// Uniform metric rescale g -> s * g (s = rho^{-2} gives the paper's
    /// rho-rescale).
    void scale_metric(double s) {
        for (std::size_t id = 0; id < n_nodes_; ++id) {
            for (int i = 0; i < dim_; ++i)
                for (int j = i; j < dim_; ++j) metric_[id].set(i, j, metric_[id](i, j) * s);
            refresh_node(id);
        }
    }

    std::optional<std::vector<double>>& analytic_R() { return analytic_R_; }
    const std::optional<std::vector<double>>& analytic_R() const { return analytic_R_; }

    /// Text format: header "dim shape.. spacing.. lo.. periodic..", then one
    /// row per node: index, metric upper triangle, vol_weight, degenerate flag.
    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path);
        out << std::setprecision(17);
        out << dim_;
        for (int a = 0; a < dim_; ++a) out << ' ' << shape_[std::size_t(a)];
        for (int a = 0; a < dim_; ++a) out << ' ' << spacing_[std::size_t(a)];
        for (int a = 0; a < dim_; ++a) out << ' ' << lo_[std::size_t(a)];
        for (int a = 0; a < dim_; ++a) out << ' ' << int(periodic_[std::size_t(a)]);
        out << '\n';
        for (std::size_t id = 0; id < n_nodes_; ++id) {
            out << id;
            for (int i = 0; i < dim_; ++i)
                for (int j = i; j < dim_; ++j) out << ' ' << metric_[id](i, j);
            out << ' ' << vol_weight_[id] << ' ' << int(degenerate_[id]) << '\n';
        }
    }

    static GridManifold load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        int dim;
        in >> dim;
        std::array<int, 4> shape{};
        std::array<double, 4> spacing{}, lo{}, lengths{};
        std::array<bool, 4> periodic{};
        for (int a = 0; a < dim; ++a) in >> shape[std::size_t(a)];
        for (int a = 0; a < dim; ++a) in >> spacing[std::size_t(a)];
        for (int a = 0; a < dim; ++a) in >> lo[std::size_t(a)];
        for (int a = 0; a < dim; ++a) {
            int p;
            in >> p;
            periodic[std::size_t(a)] = p != 0;
            lengths[std::size_t(a)] = spacing[std::size_t(a)] * double(shape[std::size_t(a)]);
        }
        GridManifold g(dim, shape, lo, lengths, periodic);
        for (std::size_t id = 0; id < g.n_nodes(); ++id) {
            std::size_t idx;
            in >> idx;
            SymMat m(dim);
            for (int i = 0; i < dim; ++i)
                for (int j = i; j < dim; ++j) {
                    double v;
                    in >> v;
                    m.set(i, j, v);
                }
            double vol;
            int flag;
            in >> vol >> flag;
            g.metric_[idx] = m;
            g.vol_weight_[idx] = vol;
            g.degenerate_[idx] = std::uint8_t(flag);
        }
        if (!in) throw std::runtime_error("grid file truncated: " + path);
        return g;
    }

  private:
    void refresh_node(std::size_t id) {
        const double det = metric_[id].det();
        degenerate_[id] = det < 1e-12 ? 1 : 0;
        vol_weight_[id] = det > 0.0 ? std::sqrt(det) * cell_volume() : 0.0;
    }

    int dim_;
    std::array<int, 4> shape_;
    std::array<double, 4> lo_{};
    std::array<double, 4> spacing_{};
    std::array<bool, 4> periodic_{};
    std::array<std::size_t, 4> strides_{};
    std::size_t n_nodes_ = 0;
    std::vector<SymMat> metric_;
    std::vector<double> vol_weight_;
    std::vector<std::uint8_t> degenerate_;
    std::optional<std::vector<double>> analytic_R_;
};

/// Scalar field over grid nodes.
struct DiscreteField {
    const GridManifold* grid = nullptr;
    std::vector<double> values;

    DiscreteField() = default;
    explicit DiscreteField(const GridManifold& g, double fill = 0.0)
        : grid(&g), values(g.n_nodes(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

inline GridManifold make_flat_grid(int dim, std::array<int, 4> shape, std::array<double, 4> lo,
                                   std::array<double, 4> lengths, std::array<bool, 4> periodic,
                                   double metric_coeff = 1.0) {
    GridManifold g(dim, shape, lo, lengths, periodic);
    for (std::size_t id = 0; id < g.n_nodes(); ++id)
        g.set_metric(id, SymMat::identity(dim, metric_coeff));
    g.analytic_R() = std::vector<double>(g.n_nodes(), 0.0);
    return g;
}

inline GridManifold make_unit_flat_torus(int n_per_axis) {
    return make_flat_grid(2, {n_per_axis, n_per_axis, 1, 1}, {0.0, 0.0, 0.0, 0.0},
                          {1.0, 1.0, 0.0, 0.0}, {true, true, false, false});
}

/// g_alpha = dx^2 + |x|^{2 alpha} dy^2 on a rectangle containing {x=0}.
/// Cell-centered sampling keeps the degenerate line off the nodes.
inline GridManifold discretize_power(const PowerMetricParams& params, std::array<double, 2> xlim,
                                     std::array<double, 2> ylim, int nx, int ny) {
    params.validate();
    if (nx < 4 || ny < 4) throw std::invalid_argument("discretize_power: resolution < 4 per axis");
    GridManifold g(2, {nx, ny, 1, 1}, {xlim[0], ylim[0], 0.0, 0.0},
                   {xlim[1] - xlim[0], ylim[1] - ylim[0], 0.0, 0.0}, {false, false, false, false});
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        const double x = g.coords(id)[0];
        SymMat m(2);
        m.set(0, 0, 1.0);
        m.set(1, 1, std::pow(std::abs(x), 2.0 * params.alpha));
        g.set_metric(id, m);
    }
    return g;
}

/// Conformal 2-D metric e^{2u} g_flat on the unit torus; attaches the exact
/// conformal curvature R = -2 e^{-2u} Delta u via the 5-point Laplacian.
inline GridManifold make_conformal_torus(const std::vector<double>& u, int n_per_axis) {
    if (u.size() != std::size_t(n_per_axis) * std::size_t(n_per_axis))
        throw std::invalid_argument("make_conformal_torus: field size mismatch");
    GridManifold g = make_unit_flat_torus(n_per_axis);
    for (std::size_t id = 0; id < g.n_nodes(); ++id)
        g.set_metric(id, SymMat::identity(2, std::exp(2.0 * u[id])));
    const double h = g.spacing()[0];
    std::vector<double> R(g.n_nodes());
    const int N = n_per_axis;
    auto at = [&](int i, int j) {
        i = (i % N + N) % N;
        j = (j % N + N) % N;
        return u[std::size_t(i) * std::size_t(N) + std::size_t(j)];
    };
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double lap = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (h * h);
            R[std::size_t(i) * std::size_t(N) + std::size_t(j)] = -2.0 * std::exp(-2.0 * at(i, j)) * lap;
        }
    g.analytic_R() = std::move(R);
    return g;
}

/// A strip: tubular neighborhood of the axis-aligned line
/// {x_a = center_a for a != fiber_axis}, carrying the rescaled building-block
/// fiber profile phi(5 r / r0) in the fiber direction.
struct StripSpec {
    int fiber_axis = 1;                 // degenerate direction (along the line)
    std::array<double, 4> center{};     // transverse coordinates of the line
    double r0 = 0.2;                    // strip radius
    double delta = 0.3;
    double eps = 0.05;
};

namespace detail {

inline Jet2 strip_phi(const StripSpec& s, double r) {
    // phi_{delta,eps}(5 r / r0); delta in (0,1) is allowed for strips (only
    // phi enters the 2-D/3-D sections).
    if (!(s.delta > 0.0 && s.delta < 1.0)) throw std::invalid_argument("StripSpec: delta in (0,1)");
    if (!(s.eps > 0.0 && s.eps < 0.25)) throw std::invalid_argument("StripSpec: eps in (0,1/4)");
    if (!(s.r0 > 0.0)) throw std::invalid_argument("StripSpec: r0 > 0");
    const double scale = 5.0 / s.r0;
    Jet2 p = jet_pow(phi_eps_jet(s.eps, r * scale), s.delta);
    return jet_affine_arg(p, scale);
}

inline double axis_distance(const GridManifold& g, const StripSpec& s, const std::array<double, 4>& x,
                            int* taxis_out = nullptr) {
    // Euclidean distance (with periodic wrap) from x to the strip line in the
    // transverse coordinates.
    double r2 = 0.0;
    int last_axis = -1;
    for (int a = 0; a < g.dim(); ++a) {
        if (a == s.fiber_axis) continue;
        double d = x[std::size_t(a)] - s.center[std::size_t(a)];
        if (g.periodic()[std::size_t(a)]) {
            const double L = g.spacing()[std::size_t(a)] * double(g.shape()[std::size_t(a)]);
            d = std::remainder(d, L);
        }
        r2 += d * d;
        last_axis = a;
    }
    if (taxis_out) *taxis_out = last_axis;
    return std::sqrt(r2);
}

}  // namespace detail

/// Base metric descriptor for strip gluing: flat metric times bg_coeff
/// (bg_coeff > 1 realizes the blown-up comparison metric of the taxicab
/// construction; 1 is the plain flat/torus base).
struct StripGridSpec {
    int dim = 2;
    std::array<int, 4> shape{};
    std::array<double, 4> lo{};
    std::array<double, 4> lengths{};
    std::array<bool, 4> periodic{};
    double bg_coeff = 1.0;
    std::vector<StripSpec> strips;
};

/// Glue rescaled building-block strips into a flat base. The metric equals the
/// base outside every strip; inside, the fiber component is bg_coeff * phi^2
/// with phi = phi_{delta,eps}(5 r / r0), continuous across the boundary
/// (phi = 1 at r >= 2 r0 / 5). Overlapping strips are a config error.
inline GridManifold discretize_strip_metric(const StripGridSpec& spec) {
    GridManifold g(spec.dim, spec.shape, spec.lo, spec.lengths, spec.periodic);
    // pairwise disjointness: strips must not both claim any node
    std::vector<int> owner(g.n_nodes(), -1);
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        SymMat m = SymMat::identity(spec.dim, spec.bg_coeff);
        const auto x = g.coords(id);
        for (std::size_t si = 0; si < spec.strips.size(); ++si) {
            const StripSpec& s = spec.strips[si];
            const double r = detail::axis_distance(g, s, x);
            if (r >= s.r0) continue;
            if (owner[id] >= 0)
                throw std::invalid_argument("discretize_strip_metric: overlapping strips");
            owner[id] = int(si);
            Jet2 ph = detail::strip_phi(s, r);
            m.set(s.fiber_axis, s.fiber_axis, spec.bg_coeff * ph.v * ph.v);
        }
        g.set_metric(id, m);
    }
    // 2-D single-direction case: the warped-surface curvature R = -2 phi''/phi
    // with phi'' taken as the finite difference of the *sampled* warp, so the
    // curvature field is consistent with the discrete metric even when the
    // smoothing band is subgrid (discrete Gauss-Bonnet holds by telescoping).
    if (spec.dim == 2 && spec.bg_coeff == 1.0) {
        bool all_fiber_y = true;
        for (const auto& s : spec.strips) all_fiber_y = all_fiber_y && s.fiber_axis == 1;
        if (all_fiber_y) {
            const int nx = spec.shape[0], ny = spec.shape[1];
            const double h = g.spacing()[0];
            std::vector<double> R(g.n_nodes(), 0.0);
            auto phi_at = [&](int i, int j) {
                if (spec.periodic[0]) i = (i % nx + nx) % nx;
                else i = std::clamp(i, 0, nx - 1);
                return std::sqrt(g.metric(g.index({i, j, 0, 0}))(1, 1));
            };
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j) {
                    const double pm = phi_at(i - 1, j), p0 = phi_at(i, j), pp = phi_at(i + 1, j);
                    R[g.index({i, j, 0, 0})] = -2.0 * (pp - 2.0 * p0 + pm) / (h * h) / p0;
                }
            g.analytic_R() = std::move(R);
        }
    }
    return g;
}

}  // namespace dpgeo
