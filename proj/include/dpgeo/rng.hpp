#pragma once

#include <cstdint>
#include <random>

namespace dpgeo {

/// Deterministic RNG wrapper. mt19937_64 sequences are pinned by the standard;
/// uniform doubles are generated from raw bits directly (distribution classes
/// are implementation-defined and would break bit-for-bit reproducibility).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) { return eng_() % n; }

    /// Standard normal via Box-Muller on pinned uniforms.
    double normal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace dpgeo
