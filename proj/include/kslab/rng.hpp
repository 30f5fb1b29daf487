#pragma once

// Deterministic random numbers for corpus generation and initial data.
// std::mt19937_64 has a fixed specified output sequence; the double
// extraction below is done by hand because the <random> distributions are
// implementation-defined and would break cross-toolchain reproducibility.

#include <cstdint>
#include <random>

namespace kslab {

class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1): top 53 bits of the engine output.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace kslab
