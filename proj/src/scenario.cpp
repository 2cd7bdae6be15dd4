#include "ymlens/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "ymlens/rng.hpp"

namespace ymlens {

using nlohmann::json;

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr, const std::string& key) {
  if (!arr.is_array()) throw ConfigError("expected an array at key: " + key);
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError("expected numbers at key: " + key);
    v[static_cast<int>(i)] = arr[i].get<double>();
  }
  return v;
}

template <typename T>
T get_or(const json& obj, const std::string& key, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

FamilySpec family_from_json(const json& obj, const std::string& key) {
  if (!obj.contains("family")) throw ConfigError("missing 'family' under key: " + key);
  FamilySpec spec;
  spec.family = obj.at("family").get<std::string>();
  if (obj.contains("coefficients")) spec.coefficients = vec_from_json(obj.at("coefficients"), key);
  return spec;
}

json family_to_json(const FamilySpec& spec) {
  return json{{"family", spec.family}, {"coefficients", vec_to_json(spec.coefficients)}};
}

}  // namespace

ScenarioConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.schema_version = get_or(root, "schema_version", 1);
  if (cfg.schema_version != 1) throw ConfigError("unsupported schema_version");
  cfg.dim = get_or(root, "dim", 3);
  if (cfg.dim < 2) throw ConfigError("dim must be >= 2");

  if (!root.contains("group")) throw ConfigError("missing 'group'");
  cfg.group = root.at("group").at("name").get<std::string>();

  if (root.contains("orbit")) {
    const json& orbit = root.at("orbit");
    if (orbit.contains("seed")) cfg.orbit_seed = vec_from_json(orbit.at("seed"), "orbit.seed");
    cfg.orbit_sample_count = get_or(orbit, "sample_count", 64);
    cfg.orbit_rng_seed = get_or(orbit, "rng_seed", std::uint64_t{7});
  }

  if (!root.contains("metric")) throw ConfigError("missing 'metric'");
  cfg.metric = family_from_json(root.at("metric"), "metric");
  if (!root.contains("boundary")) throw ConfigError("missing 'boundary'");
  cfg.boundary = family_from_json(root.at("boundary"), "boundary");

  if (!root.contains("domain_box")) throw ConfigError("missing 'domain_box'");
  cfg.box_lo = vec_from_json(root.at("domain_box").at("lo"), "domain_box.lo");
  cfg.box_hi = vec_from_json(root.at("domain_box").at("hi"), "domain_box.hi");

  if (!root.contains("connection_a")) throw ConfigError("missing 'connection_a'");
  cfg.connection_a = family_from_json(root.at("connection_a"), "connection_a");
  if (root.contains("connection_b"))
    cfg.connection_b = family_from_json(root.at("connection_b"), "connection_b");

  if (root.contains("integrator")) {
    const json& integ = root.at("integrator");
    cfg.integrator.rel_tol = get_or(integ, "rel_tol", 1e-10);
    cfg.integrator.abs_tol = get_or(integ, "abs_tol", 1e-12);
    cfg.integrator.max_time = get_or(integ, "max_time", 200.0);
    cfg.integrator.event_tol = get_or(integ, "event_tol", 1e-12);
    cfg.integrator.initial_step = get_or(integ, "initial_step", 1e-3);
    cfg.integrator.max_step = get_or(integ, "max_step", 0.0);
    cfg.integrator.method = get_or(integ, "method", std::string("dopri5"));
  }
  cfg.integrator.validate();
  cfg.exit_level = get_or(root, "exit_level", 0.0);

  if (root.contains("grids")) {
    const json& grids = root.at("grids");
    cfg.grids.entry_count = get_or(grids, "entry_count", 100);
    cfg.grids.orbit_samples = get_or(grids, "orbit_samples", 4);
    cfg.grids.seed = get_or(grids, "seed", std::uint64_t{42});
    cfg.grids.min_inward = get_or(grids, "min_inward", 0.05);
    cfg.grids.interior_samples = get_or(grids, "interior_samples", 64);
    cfg.grids.boundary_samples = get_or(grids, "boundary_samples", 32);
  }

  if (root.contains("experiment")) {
    const json& exp = root.at("experiment");
    cfg.experiment.nodes = get_or(exp, "nodes", 64);
    cfg.experiment.trajectory_samples = get_or(exp, "trajectory_samples", 64);
    if (exp.contains("lambda_sweep")) {
      cfg.experiment.lambda_sweep.clear();
      for (const auto& v : exp.at("lambda_sweep")) cfg.experiment.lambda_sweep.push_back(v.get<double>());
    }
    cfg.experiment.convex_function = get_or(exp, "convex_function", std::string("half_norm_squared"));
    if (exp.contains("convex_coefficients"))
      cfg.experiment.convex_coefficients = vec_from_json(exp.at("convex_coefficients"), "convex_coefficients");
    if (exp.contains("recovery")) {
      const json& rec = exp.at("recovery");
      cfg.experiment.recovery_b = get_or(rec, "b", 0.5);
      cfg.experiment.recovery_h = get_or(rec, "h", 0.01);
      if (rec.contains("point"))
        cfg.experiment.recovery_point = vec_from_json(rec.at("point"), "recovery.point");
      cfg.experiment.patch_count = get_or(rec, "patch_count", 9);
      cfg.experiment.patch_radius = get_or(rec, "patch_radius", 0.3);
      cfg.experiment.ground_truth_columns = get_or(rec, "ground_truth_columns", true);
    }
  }
  return cfg;
}

std::string config_to_json_text(const ScenarioConfig& cfg) {
  json root;
  root["schema_version"] = cfg.schema_version;
  root["dim"] = cfg.dim;
  root["group"] = json{{"name", cfg.group}};
  root["orbit"] = json{{"seed", vec_to_json(cfg.orbit_seed)},
                       {"sample_count", cfg.orbit_sample_count},
                       {"rng_seed", cfg.orbit_rng_seed}};
  root["metric"] = family_to_json(cfg.metric);
  root["boundary"] = family_to_json(cfg.boundary);
  root["domain_box"] = json{{"lo", vec_to_json(cfg.box_lo)}, {"hi", vec_to_json(cfg.box_hi)}};
  root["connection_a"] = family_to_json(cfg.connection_a);
  root["connection_b"] = family_to_json(cfg.connection_b);
  root["integrator"] = json{{"rel_tol", cfg.integrator.rel_tol},
                            {"abs_tol", cfg.integrator.abs_tol},
                            {"max_time", cfg.integrator.max_time},
                            {"event_tol", cfg.integrator.event_tol},
                            {"initial_step", cfg.integrator.initial_step},
                            {"max_step", cfg.integrator.max_step},
                            {"method", cfg.integrator.method}};
  root["exit_level"] = cfg.exit_level;
  root["grids"] = json{{"entry_count", cfg.grids.entry_count},
                       {"orbit_samples", cfg.grids.orbit_samples},
                       {"seed", cfg.grids.seed},
                       {"min_inward", cfg.grids.min_inward},
                       {"interior_samples", cfg.grids.interior_samples},
                       {"boundary_samples", cfg.grids.boundary_samples}};
  json rec = json{{"b", cfg.experiment.recovery_b},
                  {"h", cfg.experiment.recovery_h},
                  {"patch_count", cfg.experiment.patch_count},
                  {"patch_radius", cfg.experiment.patch_radius},
                  {"ground_truth_columns", cfg.experiment.ground_truth_columns}};
  if (cfg.experiment.recovery_point.size() > 0)
    rec["point"] = vec_to_json(cfg.experiment.recovery_point);
  root["experiment"] = json{{"nodes", cfg.experiment.nodes},
                            {"trajectory_samples", cfg.experiment.trajectory_samples},
                            {"lambda_sweep", cfg.experiment.lambda_sweep},
                            {"convex_function", cfg.experiment.convex_function},
                            {"convex_coefficients", vec_to_json(cfg.experiment.convex_coefficients)},
                            {"recovery", rec}};
  return root.dump(2);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text);
}

void save_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << config_to_json_text(config) << "\n";
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  const std::string canonical = config_to_json_text(config);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash_hex(const ScenarioConfig& config) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  return buf;
}

Scenario::Scenario(ScenarioConfig cfg, LieAlgebra alg)
    : config(std::move(cfg)), algebra(std::move(alg)) {}

WongSystem Scenario::system_a() const {
  WongSystem sys;
  sys.chart = &chart;
  sys.conn = &conn_a;
  sys.algebra = &algebra;
  sys.constants = constants;
  return sys;
}

WongSystem Scenario::system_b() const {
  WongSystem sys;
  sys.chart = &chart;
  sys.conn = &conn_b;
  sys.algebra = &algebra;
  sys.constants = constants;
  return sys;
}

WongSystem Scenario::system_zero(const Connection& zero_conn) const {
  WongSystem sys;
  sys.chart = &chart;
  sys.conn = &zero_conn;
  sys.algebra = &algebra;
  sys.constants = constants;
  return sys;
}

std::vector<Vec> Scenario::orbit_elements(int count, std::uint64_t seed) const {
  return sample_orbit(algebra, algebra.lower(orbit.seed), count, seed);
}

std::unique_ptr<Scenario> build_scenario(const ScenarioConfig& config) {
  LieAlgebra algebra = LieAlgebra::by_name(config.group);
  auto scenario = std::make_unique<Scenario>(config, std::move(algebra));
  scenario->constants = structure_constants(scenario->algebra);

  scenario->chart = make_chart(config.dim, config.metric.family, config.metric.coefficients,
                               config.boundary.family, config.boundary.coefficients,
                               config.box_lo, config.box_hi);

  const int n = config.dim;
  const int d = scenario->algebra.dim();

  Vec seed = config.orbit_seed;
  if (seed.size() == 0) {
    seed = Vec::Zero(d);
    seed[0] = 1.0;
  }
  if (seed.size() != d) throw ConfigError("orbit.seed has wrong dimension for the group");
  scenario->orbit =
      find_basis_in_orbit(scenario->algebra, seed, config.orbit_sample_count, config.orbit_rng_seed);

  scenario->conn_a =
      make_connection(config.connection_a.family, config.connection_a.coefficients, n, d);

  if (config.connection_b.family == "gauge_of_a") {
    const Vec& c = config.connection_b.coefficients;
    if (c.size() < 1) throw ConfigError("gauge_of_a expects [count, factors...]");
    const int count = static_cast<int>(c[0]);
    const int stride = n + 2 + d;
    if (c.size() != 1 + count * stride)
      throw ConfigError("gauge_of_a factor coefficients have the wrong length");
    for (int k = 0; k < count; ++k) {
      GaugeBumpSpec spec;
      const int base = 1 + k * stride;
      spec.center = c.segment(base, n);
      spec.radius = c[base + n];
      spec.amp = c[base + n + 1];
      spec.zeta = c.segment(base + n + 2, d);
      if (spec.radius <= 0.0) throw ConfigError("gauge factor radius must be positive");
      scenario->gauge_factors.push_back(spec);
    }
    scenario->b_is_gauge_of_a = true;
    scenario->conn_b = make_gauged_connection(scenario->algebra, scenario->chart,
                                              scenario->conn_a, scenario->gauge_factors);
  } else {
    scenario->conn_b =
        make_connection(config.connection_b.family, config.connection_b.coefficients, n, d);
  }

  scenario->integrator = config.integrator;
  scenario->integrator.exit_level = config.exit_level;
  return scenario;
}

std::vector<PhasePoint> build_entry_grid(const Scenario& scenario, int count,
                                         std::uint64_t seed) {
  const Chart& chart = scenario.chart;
  const std::vector<Vec> points =
      sample_boundary_points(chart, std::max(1, count), seed ^ 0x5bf03635ull);
  const std::vector<Vec> xis =
      scenario.orbit_elements(std::max(1, scenario.config.grids.orbit_samples), seed ^ 0xa5a5a5ull);

  Rng rng(seed);
  std::vector<PhasePoint> grid;
  grid.reserve(count);
  int guard = 0;
  std::size_t pi = 0;
  while (static_cast<int>(grid.size()) < count && guard < 100 * count + 1000) {
    ++guard;
    const Vec& z = points[pi % points.size()];
    ++pi;
    const Mat g = chart.metric(z);
    const Vec nu = outer_unit_normal(chart, z);
    Vec v = rng.normal_vector(chart.dim);
    if (v.norm() < 1e-12) continue;
    v = unit_normalize(chart, z, v);
    double inward = v.dot(g * nu);
    if (inward > 0.0) {
      v = -v;
      inward = -inward;
    }
    if (inward > -scenario.config.grids.min_inward) continue;  // too glancing
    PhasePoint entry;
    entry.z = z;
    entry.v = v;
    entry.xi = xis[grid.size() % xis.size()];
    grid.push_back(std::move(entry));
  }
  if (static_cast<int>(grid.size()) < count)
    throw GeometryError("failed to build the boundary entry grid");
  return grid;
}

std::vector<Vec> build_boundary_patch(const Scenario& scenario, const Vec& near_point, int count,
                                      double radius) {
  const Chart& chart = scenario.chart;
  // Project the requested centre onto the boundary.
  Vec p = near_point;
  for (int it = 0; it < 50; ++it) {
    const double r = chart.boundary(p);
    if (std::abs(r) < 1e-13) break;
    const Vec g = chart.grad_boundary(p);
    p -= (r / g.squaredNorm()) * g;
  }
  if (std::abs(chart.boundary(p)) > 1e-10)
    throw GeometryError("could not project the recovery point onto the boundary");

  const Mat frame = [&] {
    const Mat g = chart.metric(p);
    const Vec nu = outer_unit_normal(chart, p);
    Mat f(chart.dim, chart.dim - 1);
    std::vector<Vec> ortho{nu};
    int filled = 0;
    for (int i = 0; i < chart.dim && filled < chart.dim - 1; ++i) {
      Vec cand = Vec::Unit(chart.dim, i);
      for (const Vec& b : ortho) cand -= b.dot(g * cand) * b;
      const double nrm = std::sqrt(cand.dot(g * cand));
      if (nrm > 1e-8) {
        cand /= nrm;
        ortho.push_back(cand);
        f.col(filled++) = cand;
      }
    }
    if (filled < chart.dim - 1) throw GeometryError("failed to build a patch frame");
    return f;
  }();

  // Square grid of tangent offsets, projected back onto the boundary.
  const int side = std::max(1, static_cast<int>(std::ceil(std::sqrt(double(count)))));
  std::vector<Vec> patch;
  for (int a = 0; a < side && static_cast<int>(patch.size()) < count; ++a)
    for (int b = 0; b < side && static_cast<int>(patch.size()) < count; ++b) {
      Vec offset = Vec::Zero(chart.dim - 1);
      if (side > 1) {
        offset[0 % (chart.dim - 1)] += radius * (2.0 * a / (side - 1) - 1.0);
        if (chart.dim >= 3) offset[1 % (chart.dim - 1)] += radius * (2.0 * b / (side - 1) - 1.0);
      }
      Vec q = p + frame * offset;
      bool ok = true;
      for (int it = 0; it < 60; ++it) {
        const double r = chart.boundary(q);
        if (std::abs(r) < 1e-13) break;
        const Vec g = chart.grad_boundary(q);
        if (g.squaredNorm() < 1e-20) {
          ok = false;
          break;
        }
        q -= (r / g.squaredNorm()) * g;
      }
      if (ok && std::abs(chart.boundary(q)) < 1e-10) patch.push_back(q);
    }
  if (patch.empty()) throw GeometryError("empty boundary patch");
  return patch;
}

}  // namespace ymlens
