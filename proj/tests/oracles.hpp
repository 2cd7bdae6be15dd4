#ifndef YMLENS_TESTS_ORACLES_HPP
#define YMLENS_TESTS_ORACLES_HPP

// Test-only closed-form oracles, independent of the integrator code paths.

#include <cmath>
#include <optional>

#include "ymlens/catalog.hpp"
#include "ymlens/types.hpp"

namespace ymlens::oracles {

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// Straight chord through the Euclidean unit ball: travel time and exit point.
inline double chord_time(const Vec& x, const Vec& v) { return -2.0 * x.dot(v); }
inline Vec chord_exit(const Vec& x, const Vec& v) { return x + chord_time(x, v) * v; }

// Helix of a charged particle in the uniform abelian field F_12 = b with
// charge xi: rotation rate omega = b xi in the (z1, z2) plane.
struct Helix {
  Vec z0, v0;
  double omega;

  Vec position(double t) const {
    const double c = std::cos(omega * t), s = std::sin(omega * t);
    Vec z(3);
    if (std::abs(omega) < 1e-14) return z0 + t * v0;
    z[0] = z0[0] + (v0[0] * s - v0[1] * c + v0[1]) / omega;
    z[1] = z0[1] + (v0[1] * s + v0[0] * c - v0[0]) / omega;
    z[2] = z0[2] + v0[2] * t;
    return z;
  }
  Vec velocity(double t) const {
    const double c = std::cos(omega * t), s = std::sin(omega * t);
    Vec v(3);
    if (std::abs(omega) < 1e-14) return v0;
    v[0] = v0[0] * c + v0[1] * s;
    v[1] = -v0[0] * s + v0[1] * c;
    v[2] = v0[2];
    return v;
  }

  // First positive time at which |z(t)| = radius, assuming the start is on
  // the sphere moving inward. March + bisection on the closed form only.
  std::optional<double> exit_time(double radius, double t_max) const {
    auto q = [&](double t) { return position(t).squaredNorm() - radius * radius; };
    const double dt = 1e-3;
    double t_prev = dt;  // skip the departure from the sphere itself
    if (q(t_prev) >= 0.0) {
      // immediately outward or glancing; refine from 0
      t_prev = 0.0;
    }
    double t = t_prev + dt;
    while (t <= t_max) {
      if (q(t) >= 0.0 && q(t_prev) < 0.0) {
        double lo = t_prev, hi = t;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          (q(mid) < 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
      }
      t_prev = t;
      t += dt;
    }
    return std::nullopt;
  }
};

}  // namespace ymlens::oracles

#endif
