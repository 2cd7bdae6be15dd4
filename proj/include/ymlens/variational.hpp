#ifndef YMLENS_VARIATIONAL_HPP
#define YMLENS_VARIATIONAL_HPP

#include <functional>
#include <utility>
#include <vector>

#include "ymlens/wong_dynamics.hpp"

namespace ymlens {

// Flow Jacobian dPhi/dphi with the (z, v, xi) block layout.
struct JacobianState {
  int n = 0, d = 0;
  Mat j;

  JacobianState() = default;
  JacobianState(int n_, int d_, Mat m) : n(n_), d(d_), j(std::move(m)) {}

  auto dXdz() const { return j.block(0, 0, n, n); }
  auto dXdv() const { return j.block(0, n, n, n); }
  auto dXdxi() const { return j.block(0, 2 * n, n, d); }
  auto dThetadz() const { return j.block(n, 0, n, n); }
  auto dThetadv() const { return j.block(n, n, n, n); }
  auto dThetadxi() const { return j.block(n, 2 * n, n, d); }
  auto dXidz() const { return j.block(2 * n, 0, d, n); }
  auto dXidv() const { return j.block(2 * n, n, d, n); }
  auto dXidxi() const { return j.block(2 * n, 2 * n, d, d); }
};

// Derivative of the generating vector field. The v- and xi-blocks are exact;
// the z-block differentiates the coefficient fields (analytically when the
// catalog provides second derivatives, by finite differences otherwise).
Mat wong_rhs_jacobian(const WongSystem& sys, const Vec& state);

// Brute-force oracle: central differences of the full right-hand side with
// step 1e-6 (1 + |phi|).
Mat wong_rhs_jacobian_fd(const WongSystem& sys, const Vec& state);

// Integrates the augmented system (phi' = X(phi), J' = dX/dphi J, J(0) = Id)
// with shared adaptive stepping.
std::pair<PhasePoint, JacobianState> flow_with_jacobian(const WongSystem& sys, const Vec& state0,
                                                        double t_end,
                                                        const IntegratorConfig& config);

struct WeightPair {
  Mat w;  // n x n
  Mat q;  // n x d
};

// For each node time s, launches the tilde-system Jacobian flow from the base
// trajectory state at s for the remaining time ell - s and extracts
// W = dTheta~/dv g^{-1}, Q = -dTheta~/dxi.
std::vector<WeightPair> weights_along(const WongSystem& sys_tilde, const Chart& chart,
                                      const ode::DensePath& base_path, double ell,
                                      const std::vector<double>& node_times,
                                      const IntegratorConfig& config);

struct PseudoLinearizationResult {
  Vec lhs;
  Vec rhs;
  double travel_time = 0.0;
  int node_count = 0;

  Vec residual() const { return lhs - rhs; }
  double relative_residual() const { return residual().norm() / (1.0 + rhs.norm()); }
};

// Checks the exact flow-difference identity: the time integral of the
// tilde-flow Jacobian applied to (X - X~) along the base trajectory equals
// Phi(tau) - Phi~(tau). Composite 2-point Gauss-Legendre with node_count
// nodes in total.
PseudoLinearizationResult pseudo_linearization_residual(const WongSystem& sys,
                                                        const WongSystem& sys_tilde,
                                                        const PhasePoint& entry, int node_count,
                                                        const IntegratorConfig& config);

// Inputs of the weighted ray transform: a Lie-algebra valued 2-form field and
// the charge-rotation coefficient field of a connection difference.
struct XRayInput {
  // two_form(z)[i][j]: d-vector, antisymmetric in (i, j)
  std::function<std::vector<std::vector<Vec>>(const Vec&)> two_form;
  // one_form(z)[k]: d x d matrix m with (m xi)_a = c^b_{a mu} y_k^mu xi_b
  std::function<std::vector<Mat>(const Vec&)> one_form;
};

// f = F_A - F_Atilde, beta = c-contracted (A - Atilde).
XRayInput build_xray_input(const LieAlgebra& algebra, const StructureConstants& constants,
                           const Chart& chart, const Connection& conn_a,
                           const Connection& conn_b);

// I_w[f, beta](phi): integral along the (g, A)-trajectory of
// W f(gamma')·xi + Q beta(gamma')·xi with weights from the tilde system.
Vec xray_transform(const WongSystem& sys, const WongSystem& sys_tilde, const XRayInput& input,
                   const PhasePoint& entry, int node_count, const IntegratorConfig& config);

// Composite 2-point Gauss-Legendre nodes/weights over [0, length].
std::vector<std::pair<double, double>> gauss_legendre_nodes(double length, int node_count);

}  // namespace ymlens

#endif
