#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "dpgeo/mathutil.hpp"

namespace dpgeo {

/// Dense symmetric dim x dim matrix, dim <= 4. Value type used for metric
/// tensors at grid nodes.
class SymMat {
  public:
    SymMat() = default;
    explicit SymMat(int dim) : dim_(dim) { m_.fill(0.0); }

    static SymMat identity(int dim, double scale = 1.0) {
        SymMat s(dim);
        for (int i = 0; i < dim; ++i) s(i, i) = scale;
        return s;
    }

    static SymMat diagonal(int dim, const std::array<double, 4>& d) {
        SymMat s(dim);
        for (int i = 0; i < dim; ++i) s(i, i) = d[std::size_t(i)];
        return s;
    }

    int dim() const { return dim_; }

    double& operator()(int i, int j) { return m_[std::size_t(i * 4 + j)]; }
    double operator()(int i, int j) const { return m_[std::size_t(i * 4 + j)]; }

    void set(int i, int j, double v) {
        (*this)(i, j) = v;
        (*this)(j, i) = v;
    }

    double det() const {
        switch (dim_) {
            case 1: return (*this)(0, 0);
            case 2: return (*this)(0, 0) * (*this)(1, 1) - sqr((*this)(0, 1));
            case 3: {
                const SymMat& a = *this;
                return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                       a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                       a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
            }
            case 4: {
                // Laplace expansion over the first row.
                double d = 0.0;
                for (int j = 0; j < 4; ++j) {
                    double minor_[9];
                    int r = 0;
                    for (int i = 1; i < 4; ++i) {
                        int c = 0;
                        for (int k = 0; k < 4; ++k) {
                            if (k == j) continue;
                            minor_[r * 3 + c] = (*this)(i, k);
                            ++c;
                        }
                        ++r;
                    }
                    double m3 = minor_[0] * (minor_[4] * minor_[8] - minor_[5] * minor_[7]) -
                                minor_[1] * (minor_[3] * minor_[8] - minor_[5] * minor_[6]) +
                                minor_[2] * (minor_[3] * minor_[7] - minor_[4] * minor_[6]);
                    d += ((j % 2 == 0) ? 1.0 : -1.0) * (*this)(0, j) * m3;
                }
                return d;
            }
            default: throw std::logic_error("SymMat: bad dim");
        }
    }

    /// Jacobi eigenvalue iteration. Returns eigenvalues and fills Q with
    /// eigenvectors as columns (A = Q diag(w) Q^T).
    std::array<double, 4> eigen(std::array<std::array<double, 4>, 4>& Q) const {
        std::array<std::array<double, 4>, 4> a{};
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) a[std::size_t(i)][std::size_t(j)] = (*this)(i, j);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) Q[std::size_t(i)][std::size_t(j)] = (i == j) ? 1.0 : 0.0;
        for (int sweep = 0; sweep < 64; ++sweep) {
            double off = 0.0;
            for (int i = 0; i < dim_; ++i)
                for (int j = i + 1; j < dim_; ++j) off += sqr(a[std::size_t(i)][std::size_t(j)]);
            if (off < 1e-300) break;
            for (int p = 0; p < dim_; ++p) {
                for (int q = p + 1; q < dim_; ++q) {
                    const double apq = a[std::size_t(p)][std::size_t(q)];
                    if (std::abs(apq) < 1e-300) continue;
                    const double theta = (a[std::size_t(q)][std::size_t(q)] - a[std::size_t(p)][std::size_t(p)]) / (2.0 * apq);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double s = t * c;
                    for (int k = 0; k < dim_; ++k) {
                        const double akp = a[std::size_t(k)][std::size_t(p)], akq = a[std::size_t(k)][std::size_t(q)];
                        a[std::size_t(k)][std::size_t(p)] = c * akp - s * akq;
                        a[std::size_t(k)][std::size_t(q)] = s * akp + c * akq;
                    }
                    for (int k = 0; k < dim_; ++k) {
                        const double apk = a[std::size_t(p)][std::size_t(k)], aqk = a[std::size_t(q)][std::size_t(k)];
                        a[std::size_t(p)][std::size_t(k)] = c * apk - s * aqk;
                        a[std::size_t(q)][std::size_t(k)] = s * apk + c * aqk;
                    }
                    for (int k = 0; k < dim_; ++k) {
                        const double qkp = Q[std::size_t(k)][std::size_t(p)], qkq = Q[std::size_t(k)][std::size_t(q)];
                        Q[std::size_t(k)][std::size_t(p)] = c * qkp - s * qkq;
                        Q[std::size_t(k)][std::size_t(q)] = s * qkp + c * qkq;
                    }
                }
            }
        }
        std::array<double, 4> w{};
        for (int i = 0; i < dim_; ++i) w[std::size_t(i)] = a[std::size_t(i)][std::size_t(i)];
        return w;
    }

    /// Rows of M^T where g^{-1} = M M^T, with eigenvalues of g clamped below
    /// at eig_floor before inversion. Used to contract gradients:
    /// g^{ij} v_i v_j = |M^T v|^2.
    std::array<std::array<double, 4>, 4> inv_sqrt_rows(double eig_floor) const {
        std::array<std::array<double, 4>, 4> Q{};
        auto w = eigen(Q);
        std::array<std::array<double, 4>, 4> rows{};
        for (int k = 0; k < dim_; ++k) {
            const double lam = std::max(w[std::size_t(k)], eig_floor);
            const double s = 1.0 / std::sqrt(lam);
            for (int i = 0; i < dim_; ++i)
                rows[std::size_t(k)][std::size_t(i)] = s * Q[std::size_t(i)][std::size_t(k)];
        }
        return rows;
    }

    /// Full inverse (no clamp); requires positive definite.
    SymMat inverse() const {
        std::array<std::array<double, 4>, 4> Q{};
        auto w = eigen(Q);
        SymMat r(dim_);
        for (int i = 0; i < dim_; ++i) {
            for (int j = i; j < dim_; ++j) {
                double v = 0.0;
                for (int k = 0; k < dim_; ++k) {
                    if (w[std::size_t(k)] <= 0.0) throw std::domain_error("SymMat::inverse: not PD");
                    v += Q[std::size_t(i)][std::size_t(k)] * Q[std::size_t(j)][std::size_t(k)] / w[std::size_t(k)];
                }
                r.set(i, j, v);
            }
        }
        return r;
    }

    double min_eig() const {
        std::array<std::array<double, 4>, 4> Q{};
        auto w = eigen(Q);
        double m = w[0];
        for (int i = 1; i < dim_; ++i) m = std::min(m, w[std::size_t(i)]);
        return m;
    }

  private:
    int dim_ = 0;
    std::array<double, 16> m_{};
};

}  // namespace dpgeo
