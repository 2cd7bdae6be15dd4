#ifndef YMLENS_FINITE_DIFF_HPP
#define YMLENS_FINITE_DIFF_HPP

#include <functional>

#include "ymlens/types.hpp"

namespace ymlens {

// 4th-order central difference of a scalar/matrix-valued field along
// coordinate direction k with step h:
//   f'(x) ~ (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / (12 h)
template <typename F>
auto central_diff4(const F& f, const Vec& z, int k, double h) -> decltype(f(z)) {
  Vec zp = z, zm = z, zpp = z, zmm = z;
  zp[k] += h;
  zm[k] -= h;
  zpp[k] += 2.0 * h;
  zmm[k] -= 2.0 * h;
  return (8.0 * (f(zp) - f(zm)) - (f(zpp) - f(zmm))) / (12.0 * h);
}

// 2nd-order one-sided stencils used at boundaries where only t >= 0 samples
// exist: f'(0) from {f0, f1, f2} at spacing h, f''(0) from {f0..f3}.
template <typename T>
T one_sided_first(const T& f0, const T& f1, const T& f2, double h) {
  return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
}

template <typename T>
T one_sided_second(const T& f0, const T& f1, const T& f2, const T& f3, double h) {
  return (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
}

}  // namespace ymlens

#endif
