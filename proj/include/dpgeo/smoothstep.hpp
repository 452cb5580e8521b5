#pragma once

#include <cmath>
#include <stdexcept>

#include "dpgeo/mathutil.hpp"

namespace dpgeo {

/// Quintic smoothstep s(t) = 6t^5 - 15t^4 + 10t^3 on [0,1]; s', s'' vanish at
/// both ends. Outside [0,1] it is extended by its constant limits.
inline const Poly& smoothstep_poly() {
    static const Poly s(std::vector<double>{0.0, 0.0, 0.0, 10.0, -15.0, 6.0});
    return s;
}

inline Jet2 smoothstep_jet(double t) {
    if (t <= 0.0) return {0.0, 0.0, 0.0};
    if (t >= 1.0) return {1.0, 0.0, 0.0};
    return smoothstep_poly().jet(t);
}

/// Monotone C^2 transition profiles used by the phi interpolants.
///
/// The branch gluing needs a derivative profile q: [0,1] -> [0,1] with
/// q(0)=0, q(1)=1, q'(0)=q'(1)=0 and a prescribed integral (2/3), so that the
/// glued function matches both branch values and slopes. A plain smoothstep
/// integrates to 1/2, so q is taken as 1 - [(1-c)(1-s)^a + c(1-s)^{a+1}],
/// polynomial in s, with (a, c) solved for the integral. The complementary
/// profile 1-q (integral 1/3, non-increasing) serves the concave side.
class TransitionProfile {
  public:
    TransitionProfile() {
        const Poly& s = smoothstep_poly();
        const Poly one = Poly::constant(1.0);
        const Poly oms = one - s;
        // integrals of (1-s)^k over [0,1]
        auto I = [&](const Poly& p) { return p.integral()(1.0); };
        int a = 1;
        for (; a < 12; ++a) {
            if (I(oms.pow(a)) >= 1.0 / 3.0 && I(oms.pow(a + 1)) < 1.0 / 3.0) break;
        }
        const double Ia = I(oms.pow(a)), Ia1 = I(oms.pow(a + 1));
        const double c = (Ia - 1.0 / 3.0) / (Ia - Ia1);
        if (!(c >= 0.0 && c <= 1.0)) throw std::logic_error("TransitionProfile: blend out of range");
        dec_ = oms.pow(a) * (1.0 - c) + oms.pow(a + 1) * c;  // 1 -> 0, integral 1/3
        q_ = one - dec_;                                     // 0 -> 1, integral 2/3
        Q_ = q_.integral();
        D_ = dec_.integral();
    }

    /// Rising profile q(t), integral 2/3.
    Jet2 rise(double t) const {
        if (t <= 0.0) return {0.0, 0.0, 0.0};
        if (t >= 1.0) return {1.0, 0.0, 0.0};
        return q_.jet(t);
    }

    /// Falling profile 1 - q-like (non-increasing), integral 1/3.
    Jet2 fall(double t) const {
        if (t <= 0.0) return {1.0, 0.0, 0.0};
        if (t >= 1.0) return {0.0, 0.0, 0.0};
        return dec_.jet(t);
    }

    /// Antiderivative of rise with RQ(0) = 0; RQ(1) = 2/3.
    double rise_integral(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 2.0 / 3.0 + (t - 1.0);
        return Q_(t);
    }

    /// Antiderivative of fall with FD(0) = 0; FD(1) = 1/3.
    double fall_integral(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0 / 3.0;
        return D_(t);
    }

    static const TransitionProfile& instance() {
        static const TransitionProfile p;
        return p;
    }

  private:
    Poly q_, dec_, Q_, D_;
};

/// Cutoff zeta: 1 on [0,1/2], 0 on [1,inf), smooth non-increasing,
/// |zeta'|^2 + |zeta''| <= 100 (checked in tests).
inline Jet2 zeta_jet(double x) {
    if (x <= 0.5) return {1.0, 0.0, 0.0};
    if (x >= 1.0) return {0.0, 0.0, 0.0};
    Jet2 s = smoothstep_jet((x - 0.5) * 2.0);
    return {1.0 - s.v, -2.0 * s.d1, -4.0 * s.d2};
}

/// Antiderivative of (1 - zeta) with value 0 at 0.
inline double one_minus_zeta_integral(double x) {
    static const Poly S = smoothstep_poly().integral();
    if (x <= 0.5) return 0.0;
    if (x >= 1.0) return 0.25 + (x - 1.0);  // S(1)/2 = 1/4
    return 0.5 * S((x - 0.5) * 2.0);
}

}  // namespace dpgeo
