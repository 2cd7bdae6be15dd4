#ifndef YMLENS_JET_RECOVERY_HPP
#define YMLENS_JET_RECOVERY_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ymlens/variational.hpp"
#include "ymlens/wong_dynamics.hpp"

namespace ymlens {

// One-parameter family of entry phase points at a fixed boundary point:
// v(t) = sqrt(1 - (bt)^2) w + bt nu_in with w a unit tangent.
struct BoundaryFamily {
  Vec p;
  Vec w;
  Vec nu_in;
  double b = 0.0;
  Vec xi;
  std::vector<double> t_samples;

  Vec direction(double t) const;
  PhasePoint phase(double t) const { return {p, direction(t), xi}; }
};

BoundaryFamily make_boundary_family(const Chart& chart, const Vec& p, const Vec& w_tangent,
                                    double b, const Vec& xi, std::vector<double> t_samples);

// The data-only doorway of the inverse problem: recovery code sees lens
// records and nothing else.
class LensAccess {
 public:
  virtual ~LensAccess() = default;
  virtual LensDatum query(const PhasePoint& entry) = 0;
};

class SimulatorLensAccess : public LensAccess {
 public:
  SimulatorLensAccess(const WongSystem& sys, IntegratorConfig config)
      : sys_(&sys), config_(std::move(config)) {}
  LensDatum query(const PhasePoint& entry) override;

 private:
  const WongSystem* sys_;
  IntegratorConfig config_;
};

// Serves rows from a precomputed table when the entry matches one, otherwise
// generates the row with the fallback and counts the miss.
class CachedLensAccess : public LensAccess {
 public:
  CachedLensAccess(std::vector<LensDatum> table, std::unique_ptr<LensAccess> fallback,
                   double match_tol = 1e-10);
  LensDatum query(const PhasePoint& entry) override;
  int hits() const { return hits_; }
  int misses() const { return misses_; }

 private:
  std::vector<LensDatum> table_;
  std::unique_ptr<LensAccess> fallback_;
  double match_tol_;
  int hits_ = 0, misses_ = 0;
};

struct FamilyMeasurement {
  std::vector<double> ts;
  std::vector<double> ells;
  std::vector<Vec> r;  // R(t) = lens exit record - reference flow at ell(t)
};

// reference_sys must be the zero-connection system for the same metric.
FamilyMeasurement measure_R(const WongSystem& reference_sys, const BoundaryFamily& family,
                            LensAccess& lens, const IntegratorConfig& config);

// Least-squares slope of ell(t) = c1 t + c2 t^2 through the origin.
// Throws GeometryError when the fitted slope is not positive.
double estimate_ell_prime(const std::vector<double>& ts, const std::vector<double>& ells);

struct DerivativeEstimate {
  Vec value;
  double uncertainty = 0.0;
  bool noisy = false;
};

// One-sided second-order estimate of R'(0) from nodes {h, 2h, 3h}, with a
// cross-check on {h/2, h, 3h/2} reported as the uncertainty.
DerivativeEstimate differentiate_R_at_zero(const std::vector<double>& ts,
                                           const std::vector<Vec>& rs);

struct RecoveryConfig {
  double b_initial = 0.5;
  double h = 1e-2;
  double condition_limit = 1e6;
  // Optional full connection for the YM-convexity precondition check (the
  // recovery itself consumes lens data and iota* A only).
  const Connection* convexity_connection = nullptr;
  IntegratorConfig integrator;
};

struct RecoveryReport {
  Vec p;
  Mat frame;  // columns tau_1 .. tau_{n-1}, nu_in (g-orthonormal at p)
  // recovered_F[i][k]: coordinates of F(frame_i, tau_k); tangential block
  // antisymmetrized after the solve.
  std::vector<std::vector<Vec>> recovered_F;
  std::vector<Vec> recovered_dnA;  // d_n A_k = F(nu_in, tau_k) in the normal gauge
  double condition_number = 0.0;
  double ell_prime_0 = 0.0;
  double antisymmetry_residual = 0.0;
  double xi_row_residual = 0.0;
  double max_uncertainty = 0.0;
  bool noisy = false;
};

RecoveryReport recover_F_at_boundary(const Chart& chart, const LieAlgebra& algebra,
                                     const StructureConstants& constants,
                                     const Connection& iota_star_A,
                                     const AdjointOrbitBasis& orbit, const Vec& p,
                                     LensAccess& lens, const RecoveryConfig& cfg);

struct PatchEntry {
  Vec p;
  std::optional<RecoveryReport> report;
  std::string error;
};

std::vector<PatchEntry> recover_boundary_patch(const Chart& chart, const LieAlgebra& algebra,
                                               const StructureConstants& constants,
                                               const Connection& iota_star_A,
                                               const AdjointOrbitBasis& orbit,
                                               const std::vector<Vec>& boundary_grid,
                                               LensAccess& lens, const RecoveryConfig& cfg);

// Ground-truth curvature expressed in the same frame as a RecoveryReport;
// used by tests and for optional report columns.
std::vector<std::vector<Vec>> curvature_in_frame(const LieAlgebra& algebra,
                                                 const StructureConstants& constants,
                                                 const Chart& chart, const Connection& conn,
                                                 const Vec& p, const Mat& frame);

// g-orthonormal tangent frame columns + inward normal as the last column.
Mat boundary_frame(const Chart& chart, const Vec& p);

}  // namespace ymlens

#endif
