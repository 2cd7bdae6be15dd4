#ifndef YMLENS_SCENARIO_HPP
#define YMLENS_SCENARIO_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ymlens/catalog.hpp"
#include "ymlens/wong_dynamics.hpp"

namespace ymlens {

struct FamilySpec {
  std::string family;
  Vec coefficients;
};

struct GridSpec {
  int entry_count = 100;
  int orbit_samples = 4;
  std::uint64_t seed = 42;
  double min_inward = 0.05;
  int interior_samples = 64;
  int boundary_samples = 32;
};

struct ExperimentSpec {
  int nodes = 64;
  int trajectory_samples = 64;
  std::vector<double> lambda_sweep = {0.25, 0.5, 1.0, 2.0, 4.0};
  std::string convex_function = "half_norm_squared";
  Vec convex_coefficients;
  // recovery
  double recovery_b = 0.5;
  double recovery_h = 0.01;
  Vec recovery_point;      // projected onto the boundary
  int patch_count = 9;
  double patch_radius = 0.3;
  bool ground_truth_columns = true;
};

struct ScenarioConfig {
  int schema_version = 1;
  int dim = 3;
  std::string group = "u1";
  Vec orbit_seed;
  int orbit_sample_count = 64;
  std::uint64_t orbit_rng_seed = 7;
  FamilySpec metric{"euclidean", Vec()};
  FamilySpec boundary{"ball", Vec()};
  Vec box_lo, box_hi;
  FamilySpec connection_a{"zero", Vec()};
  // Either a catalog family or "gauge_of_a" with bump-factor coefficients
  // [count, then per factor: c_1..c_n, r, amp, zeta_1..zeta_d].
  FamilySpec connection_b{"zero", Vec()};
  IntegratorConfig integrator;
  double exit_level = 0.0;
  GridSpec grids;
  ExperimentSpec experiment;
};

ScenarioConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, const std::string& path);

// FNV-1a over the canonical serialization; embedded in every output file.
std::uint64_t config_hash(const ScenarioConfig& config);
std::string config_hash_hex(const ScenarioConfig& config);

// A realized scenario. Heap-allocate and keep in place: the systems hold
// pointers into the members.
struct Scenario {
  ScenarioConfig config;
  LieAlgebra algebra;
  StructureConstants constants;
  Chart chart;
  Connection conn_a;
  Connection conn_b;
  bool b_is_gauge_of_a = false;
  std::vector<GaugeBumpSpec> gauge_factors;
  AdjointOrbitBasis orbit;
  IntegratorConfig integrator;

  Scenario(ScenarioConfig cfg, LieAlgebra alg);

  WongSystem system_a() const;
  WongSystem system_b() const;
  WongSystem system_zero(const Connection& zero_conn) const;
  // Orbit elements in inner-product coordinates, ready for phase points.
  std::vector<Vec> orbit_elements(int count, std::uint64_t seed) const;
};

std::unique_ptr<Scenario> build_scenario(const ScenarioConfig& config);

// Deterministic inward entry grid on the boundary sphere bundle times orbit.
std::vector<PhasePoint> build_entry_grid(const Scenario& scenario, int count,
                                         std::uint64_t seed);

// 3x3-style boundary patch near the configured recovery point.
std::vector<Vec> build_boundary_patch(const Scenario& scenario, const Vec& near_point,
                                      int count, double radius);

}  // namespace ymlens

#endif
