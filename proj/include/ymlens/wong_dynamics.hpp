#ifndef YMLENS_WONG_DYNAMICS_HPP
#define YMLENS_WONG_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ymlens/gauge_field.hpp"
#include "ymlens/lie_algebra.hpp"
#include "ymlens/manifold.hpp"
#include "ymlens/ode.hpp"

namespace ymlens {

// A point of the phase space: chart position, tangent vector, and the color
// charge in inner-product coordinates xi_a.
struct PhasePoint {
  Vec z, v, xi;

  Vec packed() const;
  static PhasePoint unpack(int n, int d, const Vec& state);
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_time = 200.0;
  double event_tol = 1e-12;
  double initial_step = 1e-3;
  double max_step = 0.0;  // 0 = auto (quarter of the box diameter)
  long max_steps = 2000000;
  double exit_level = 0.0;      // exit surface {rho = exit_level}
  double glancing_tol = 1e-8;   // |g(v,nu)| below this flags a glancing entry
  std::string method = "dopri5";

  void validate() const;
  ode::Options ode_options(double horizon_scale) const;
};

// Everything needed to evaluate the equations of motion.
struct WongSystem {
  const Chart* chart = nullptr;
  const Connection* conn = nullptr;
  const LieAlgebra* algebra = nullptr;
  StructureConstants constants;

  int n() const { return chart->dim; }
  int d() const { return algebra->dim(); }
  int state_dim() const { return 2 * n() + d(); }

  // (z', v', xi') = (v, -Gamma(v,v) + g^{-1} F(.,v) xi, -M(A(v)) xi)
  Vec rhs(const Vec& state) const;
  ode::Rhs rhs_callable() const;
};

WongSystem make_system(const Chart& chart, const Connection& conn, const LieAlgebra& algebra);

struct ExitEvent {
  bool trapped = false;
  bool glancing = false;
  double time = 0.0;
  PhasePoint state;
};

struct IntegrationResult {
  ode::DensePath path;
  ExitEvent exit;
  double max_speed_drift = 0.0;
  double max_charge_drift = 0.0;

  PhasePoint at(int n, int d, double t) const { return PhasePoint::unpack(n, d, path.eval(t)); }
};

// Integrates from `start` until the trajectory crosses {rho = exit_level}
// outward, refining the crossing to |rho - exit_level| <= event_tol, or until
// max_time (trapped). A start on the exit surface moving outward exits at
// time zero.
IntegrationResult integrate(const WongSystem& sys, const PhasePoint& start,
                            const IntegratorConfig& config);

// Fixed-horizon integration of the same system with no exit detection; used
// by the flow-difference machinery which runs on the extended domain.
ode::DensePath integrate_to_time(const WongSystem& sys, const Vec& state0, double t_end,
                                 const IntegratorConfig& config);

// Travel time; empty when trapped.
std::optional<double> exit_time(const WongSystem& sys, const PhasePoint& phi,
                                const IntegratorConfig& config);

struct LensDatum {
  PhasePoint entry;
  PhasePoint exit;
  double travel_time = 0.0;
  bool trapped = false;
  bool glancing = false;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// Batch lens computation; per-entry failures are recorded in the row and the
// batch continues. Rows are ordered like `entries` regardless of thread count.
std::vector<LensDatum> lens_data(const WongSystem& sys, const std::vector<PhasePoint>& entries,
                                 const IntegratorConfig& config, int threads = 1);

struct ConvexityReport {
  double minimum = 0.0;
  Vec argmin_z, argmin_v, argmin_xi;
  int samples = 0;
};

// min over the sampled grid of Hess f(v,v) + <F(v, grad f), xi>.
ConvexityReport ym_convex_function_check(const WongSystem& sys, const ScalarField& f,
                                         const std::vector<Vec>& xi_samples,
                                         const std::vector<std::pair<Vec, Vec>>& zv_samples);

// min over the sampled boundary grid of Lambda(v,v) + <F(v, nu), xi>.
ConvexityReport ym_convex_boundary_check(const WongSystem& sys,
                                         const std::vector<Vec>& xi_samples,
                                         const std::vector<std::pair<Vec, Vec>>& zv_samples);

struct TrappingReport {
  int total = 0;
  int trapped = 0;
  double fraction = 0.0;
  double max_time = 0.0;
};

TrappingReport nontrapping_probe(const WongSystem& sys, const std::vector<PhasePoint>& starts,
                                 const IntegratorConfig& config, int threads = 1);

// Deterministic sample builders used by the checks above.
std::vector<Vec> sample_interior_points(const Chart& chart, int count, std::uint64_t seed);
std::vector<Vec> sample_boundary_points(const Chart& chart, int count, std::uint64_t seed);
// Unit tangent vectors at interior points; antipodal pairs included.
std::vector<std::pair<Vec, Vec>> sample_sphere_grid(const Chart& chart, int count,
                                                    std::uint64_t seed);
std::vector<std::pair<Vec, Vec>> sample_boundary_sphere_grid(const Chart& chart, int count,
                                                             std::uint64_t seed);
std::vector<Vec> sample_orbit(const LieAlgebra& algebra, const Vec& seed_element, int count,
                              std::uint64_t seed);

}  // namespace ymlens

#endif
