#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dpgeo/grid.hpp"
#include "dpgeo/mathutil.hpp"

namespace dpgeo {

/// Discrete p-energy E(f) = sum_t w_t Q_t(f)^{p/2}, where each term's
/// Q_t(f) = sum_c (sum_k a_k f[node_k])^2 is a sum of squared linear forms
/// (one orthonormal-frame gradient sample).
///
/// Grid terms: one term per node per one-sided "octant" (every combination of
/// forward/backward difference per axis; boundary nodes keep the available
/// sides). Components are rows of M^T with g^{-1} = M M^T, eigenvalues of g
/// clamped below at spacing^2 before inversion. For diagonal metrics this
/// reduces to the average of forward/backward squared one-sided differences.
///
/// Graph instances (tiny test fixtures) use one term per edge with a single
/// form f[a] - f[b].
class EnergyModel {
  public:
    struct ComponentEntry {
        std::size_t node;
        double coeff;
    };

    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_terms() const { return term_weight_.size(); }
    const std::vector<double>& term_weights() const { return term_weight_; }

    static EnergyModel from_grid(const GridManifold& g) {
        EnergyModel m;
        m.n_nodes_ = g.n_nodes();
        const int dim = g.dim();
        const double floor_eig = g.clamp_floor();
        std::array<std::array<int, 2>, 4> sides{};  // available dirs per axis
        for (std::size_t id = 0; id < g.n_nodes(); ++id) {
            int n_sides[4];
            std::size_t nbr[4][2];
            int n_oct = 1;
            for (int a = 0; a < dim; ++a) {
                n_sides[a] = 0;
                std::size_t out;
                if (g.neighbor(id, a, +1, out)) { sides[std::size_t(a)][std::size_t(n_sides[a])] = +1; nbr[a][n_sides[a]] = out; ++n_sides[a]; }
                if (g.neighbor(id, a, -1, out)) { sides[std::size_t(a)][std::size_t(n_sides[a])] = -1; nbr[a][n_sides[a]] = out; ++n_sides[a]; }
                if (n_sides[a] == 0) throw std::logic_error("EnergyModel: isolated axis");
                n_oct *= n_sides[a];
            }
            const auto rows = g.metric(id).inv_sqrt_rows(floor_eig);
            const double w = g.vol_weight(id) / double(n_oct);
            // enumerate octants
            for (int oct = 0; oct < n_oct; ++oct) {
                int rem = oct;
                double dsign[4];
                std::size_t dnbr[4];
                for (int a = 0; a < dim; ++a) {
                    const int pick = rem % n_sides[a];
                    rem /= n_sides[a];
                    dsign[a] = double(sides[std::size_t(a)][std::size_t(pick)]);
                    dnbr[a] = nbr[a][pick];
                }
                m.term_weight_.push_back(w);
                m.term_node_.push_back(id);
                // component rows: (M^T D)_k = sum_a rows[k][a] * D_a,
                // D_a = dsign * (f[nbr] - f[id]) / h_a
                for (int k = 0; k < dim; ++k) {
                    m.comp_offsets_.push_back(m.entries_.size());
                    double self = 0.0;
                    for (int a = 0; a < dim; ++a) {
                        const double c = rows[std::size_t(k)][std::size_t(a)] * dsign[a] / g.spacing()[std::size_t(a)];
                        if (c == 0.0) continue;
                        m.entries_.push_back({dnbr[a], c});
                        self -= c;
                    }
                    m.entries_.push_back({id, self});
                }
                m.term_comp_end_.push_back(m.comp_offsets_.size());
            }
        }
        m.finish();
        return m;
    }

    /// Edge-weighted graph energy: E = sum_e w_e |f_u - f_v|^p.
    static EnergyModel from_edges(std::size_t n_nodes,
                                  const std::vector<std::array<std::size_t, 2>>& edges,
                                  const std::vector<double>& weights) {
        if (edges.size() != weights.size()) throw std::invalid_argument("from_edges: size mismatch");
        EnergyModel m;
        m.n_nodes_ = n_nodes;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            m.term_weight_.push_back(weights[e]);
            m.term_node_.push_back(edges[e][0]);
            m.comp_offsets_.push_back(m.entries_.size());
            m.entries_.push_back({edges[e][0], 1.0});
            m.entries_.push_back({edges[e][1], -1.0});
            m.term_comp_end_.push_back(m.comp_offsets_.size());
        }
        m.finish();
        return m;
    }

    /// Q_t(f) for every term.
    void term_values(const std::vector<double>& f, std::vector<double>& q) const {
        q.assign(n_terms(), 0.0);
        std::size_t t = 0;
        for (std::size_t c = 0; c < comp_offsets_.size(); ++c) {
            while (c >= term_comp_end_[t]) ++t;
            const std::size_t lo = comp_offsets_[c];
            const std::size_t hi = (c + 1 < comp_offsets_.size()) ? comp_offsets_[c + 1] : entries_.size();
            double v = 0.0;
            for (std::size_t e = lo; e < hi; ++e) v += entries_[e].coeff * f[entries_[e].node];
            q[t] += v * v;
        }
    }

    double p_energy(const std::vector<double>& f, double p) const {
        if (!(p > 1.0)) throw std::domain_error("p_energy: need p > 1");
        std::vector<double> q;
        term_values(f, q);
        double E = 0.0;
        for (std::size_t t = 0; t < q.size(); ++t) E += term_weight_[t] * std::pow(q[t], 0.5 * p);
        return E;
    }

    /// Weighted quadratic form value sum_t om_t Q_t(f).
    double quadratic(const std::vector<double>& f, const std::vector<double>& om) const {
        std::vector<double> q;
        term_values(f, q);
        double E = 0.0;
        for (std::size_t t = 0; t < q.size(); ++t) E += om[t] * q[t];
        return E;
    }

    /// For a 1-D section f + t d: per-term Q_t(t) = q + 2 m t + r t^2.
    void section_coeffs(const std::vector<double>& f, const std::vector<double>& d,
                        std::vector<double>& q, std::vector<double>& m_lin,
                        std::vector<double>& r_quad) const {
        q.assign(n_terms(), 0.0);
        m_lin.assign(n_terms(), 0.0);
        r_quad.assign(n_terms(), 0.0);
        std::size_t t = 0;
        for (std::size_t c = 0; c < comp_offsets_.size(); ++c) {
            while (c >= term_comp_end_[t]) ++t;
            const std::size_t lo = comp_offsets_[c];
            const std::size_t hi = (c + 1 < comp_offsets_.size()) ? comp_offsets_[c + 1] : entries_.size();
            double vf = 0.0, vd = 0.0;
            for (std::size_t e = lo; e < hi; ++e) {
                vf += entries_[e].coeff * f[entries_[e].node];
                vd += entries_[e].coeff * d[entries_[e].node];
            }
            q[t] += vf * vf;
            m_lin[t] += vf * vd;
            r_quad[t] += vd * vd;
        }
    }

    /// Gradient of sum_t om_t Q_t: out_i = 2 sum om_t (component contractions).
    void quadratic_gradient(const std::vector<double>& f, const std::vector<double>& om,
                            std::vector<double>& out) const {
        out.assign(n_nodes_, 0.0);
        std::size_t t = 0;
        for (std::size_t c = 0; c < comp_offsets_.size(); ++c) {
            while (c >= term_comp_end_[t]) ++t;
            const std::size_t lo = comp_offsets_[c];
            const std::size_t hi = (c + 1 < comp_offsets_.size()) ? comp_offsets_[c + 1] : entries_.size();
            double v = 0.0;
            for (std::size_t e = lo; e < hi; ++e) v += entries_[e].coeff * f[entries_[e].node];
            const double s = 2.0 * om[t] * v;
            for (std::size_t e = lo; e < hi; ++e) out[entries_[e].node] += s * entries_[e].coeff;
        }
    }

    /// Owner node of each term (grid terms), for node-weighted quadratics.
    const std::vector<std::size_t>& term_nodes() const { return term_node_; }

    // Raw access for the sparse assembler.
    const std::vector<std::size_t>& comp_offsets() const { return comp_offsets_; }
    const std::vector<std::size_t>& term_comp_end() const { return term_comp_end_; }
    const std::vector<ComponentEntry>& entries() const { return entries_; }
    std::size_t comp_end(std::size_t c) const {
        return (c + 1 < comp_offsets_.size()) ? comp_offsets_[c + 1] : entries_.size();
    }

  private:
    void finish() {
        if (term_comp_end_.size() != term_weight_.size())
            throw std::logic_error("EnergyModel: inconsistent term structure");
    }

    std::size_t n_nodes_ = 0;
    std::vector<double> term_weight_;
    std::vector<std::size_t> term_node_;
    std::vector<std::size_t> comp_offsets_;   // start of each component in entries_
    std::vector<std::size_t> term_comp_end_;  // one past the last component of each term
    std::vector<ComponentEntry> entries_;
};

/// p-energy of a field on a grid (the public quadrature entry point).
inline double p_energy(const GridManifold& g, const DiscreteField& f, double p) {
    if (!(p > 1.0)) throw std::domain_error("p_energy: need p > 1");
    return EnergyModel::from_grid(g).p_energy(f.values, p);
}

/// Volume-averaged integral of |R|^q over a closed grid, 0 < q < 1.
inline double lq_scalar_norm(const GridManifold& g, const std::vector<double>& R, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("lq_scalar_norm: need 0 < q < 1");
    if (!g.closed()) throw std::domain_error("lq_scalar_norm: grid must be closed (all axes periodic)");
    double num = 0.0, den = 0.0;
    for (std::size_t id = 0; id < g.n_nodes(); ++id) {
        num += std::pow(std::abs(R[id]), q) * g.vol_weight(id);
        den += g.vol_weight(id);
    }
    return num / den;
}

inline double lq_scalar_norm(const GridManifold& g, double q) {
    if (!g.analytic_R()) throw std::domain_error("lq_scalar_norm: no scalar curvature field attached");
    return lq_scalar_norm(g, *g.analytic_R(), q);
}

}  // namespace dpgeo
