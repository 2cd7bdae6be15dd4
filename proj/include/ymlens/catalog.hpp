#ifndef YMLENS_CATALOG_HPP
#define YMLENS_CATALOG_HPP

#include <string>
#include <vector>

#include "ymlens/gauge_field.hpp"
#include "ymlens/lie_algebra.hpp"
#include "ymlens/manifold.hpp"

namespace ymlens {

// Smooth compactly supported radial profile in u = |z - c|^2 / r^2:
// chi(u) = exp(1 - 1/(1 - u)) inside, 0 outside, with closed-form derivatives.
struct RadialBump {
  Vec center;
  double radius = 1.0;

  double u_of(const Vec& z) const { return (z - center).squaredNorm() / (radius * radius); }
  double value(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  Mat hessian(const Vec& z) const;
  // third[k](i, j) = d_k d_i d_j chi
  std::vector<Mat> third(const Vec& z) const;
};

// Metric families: "euclidean", "conformal" (phi = c0 + c.z + q |z|^2 with
// coefficients [c0, c_1..c_n, q]).
Chart make_chart(int dim, const std::string& metric_family, const Vec& metric_coeffs,
                 const std::string& boundary_family, const Vec& boundary_coeffs,
                 const Vec& box_lo, const Vec& box_hi);

// Connection families:
//   "zero"
//   "constant"        coeffs = row-major n x d
//   "linear"          coeffs = row-major n x d x n (A^a_i = L[i][a][j] z_j)
//   "uniform_field_u1" coeffs = [B] (dim 3, d = 1): A = B/2 (-z2 dz1 + z1 dz2)
//   "bump"            coeffs = [c_1..c_n, r, C row-major n x d]
//   "angular_bump"    coeffs = [c_1..c_n, r, amp, alpha]:
//                     amp chi (z1 dz2 - z2 dz1) on Lie coordinate alpha
Connection make_connection(const std::string& family, const Vec& coeffs, int n, int d);

struct GaugeBumpSpec {
  Vec center;
  double radius = 1.0;
  double amp = 1.0;
  Vec zeta;  // Lie-algebra coordinates of the exponent direction
};

// u(z) = prod_k exp(amp_k chi_k(z) zeta_k), with analytic derivatives.
GaugeMap make_gauge_map(const LieAlgebra& algebra, const std::vector<GaugeBumpSpec>& factors);

// Gauge transform of `base` by the bump gauge, with analytic first partials
// (the generic gauge_transform falls back to finite differences).
Connection make_gauged_connection(const LieAlgebra& algebra, const Chart& chart,
                                  const Connection& base,
                                  const std::vector<GaugeBumpSpec>& factors);

// Scalar fields for convexity checks: "half_norm_squared" with optional
// center coefficients.
ScalarField make_scalar_field(const std::string& name, const Vec& coeffs, int dim);

}  // namespace ymlens

#endif
