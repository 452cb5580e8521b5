#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgeo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double sqr(double x) { return x * x; }
inline double cube(double x) { return x * x * x; }

/// Value together with first and second derivative at a point.
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

inline Jet2 jet_const(double c) { return {c, 0.0, 0.0}; }

/// Chain rule for f(a*r + b) given the jet of f at the mapped point.
inline Jet2 jet_affine_arg(const Jet2& f, double a) {
    return {f.v, f.d1 * a, f.d2 * a * a};
}

inline Jet2 jet_add(const Jet2& a, const Jet2& b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}

inline Jet2 jet_sub(const Jet2& a, const Jet2& b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}

inline Jet2 jet_mul(const Jet2& a, const Jet2& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

inline Jet2 jet_scale(const Jet2& a, double c) { return {a.v * c, a.d1 * c, a.d2 * c}; }

/// a^delta for a.v > 0.
inline Jet2 jet_pow(const Jet2& a, double delta) {
    const double p = std::pow(a.v, delta);
    const double d1 = delta * std::pow(a.v, delta - 1.0) * a.d1;
    const double d2 = delta * (delta - 1.0) * std::pow(a.v, delta - 2.0) * a.d1 * a.d1 +
                      delta * std::pow(a.v, delta - 1.0) * a.d2;
    return {p, d1, d2};
}

/// Dense univariate polynomial with double coefficients, c[0] + c[1] t + ...
class Poly {
  public:
    Poly() = default;
    explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly constant(double v) { return Poly({v}); }

    double operator()(double t) const {
        double acc = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * t + c_[i];
        return acc;
    }

    Jet2 jet(double t) const {
        double v = 0.0, d1 = 0.0, d2 = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) {
            d2 = d2 * t + 2.0 * d1;
            d1 = d1 * t + v;
            v = v * t + c_[i];
        }
        return {v, d1, d2};
    }

    Poly operator+(const Poly& o) const {
        std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
        for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
        return Poly(std::move(r));
    }

    Poly operator-(const Poly& o) const { return *this + (o * -1.0); }

    Poly operator*(double s) const {
        std::vector<double> r = c_;
        for (double& x : r) x *= s;
        return Poly(std::move(r));
    }

    Poly operator*(const Poly& o) const {
        if (c_.empty() || o.c_.empty()) return Poly();
        std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i)
            for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
        return Poly(std::move(r));
    }

    /// Antiderivative with P(0) = 0.
    Poly integral() const {
        std::vector<double> r(c_.size() + 1, 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i) r[i + 1] = c_[i] / double(i + 1);
        return Poly(std::move(r));
    }

    Poly derivative() const {
        if (c_.size() <= 1) return Poly();
        std::vector<double> r(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * double(i);
        return Poly(std::move(r));
    }

    Poly pow(int k) const {
        Poly r = constant(1.0);
        for (int i = 0; i < k; ++i) r = r * (*this);
        return r;
    }

    const std::vector<double>& coeffs() const { return c_; }

  private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }
    std::vector<double> c_;
};

/// Root of a monotone function by bisection on [lo, hi].
template <class F>
double bisect(F&& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline std::vector<double> logspace(double lo, double hi, int count) {
    if (lo <= 0.0 || hi <= lo || count < 2) throw std::invalid_argument("logspace: bad range");
    std::vector<double> out(count);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = std::exp(l0 + (l1 - l0) * double(i) / double(count - 1));
    return out;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: bad input");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= double(x.size());
    my /= double(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace dpgeo
