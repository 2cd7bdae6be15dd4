#ifndef YMLENS_RNG_HPP
#define YMLENS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "ymlens/types.hpp"

namespace ymlens {

// Deterministic random stream. mt19937_64 output is pinned by the standard
// and the uniform/normal transforms are hand-rolled, so a given seed yields
// the same sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec normal_vector(int n) {
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ymlens

#endif
