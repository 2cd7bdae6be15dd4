#include "ymlens/harness.hpp"

#include <cmath>
#include <filesystem>

#include "ymlens/csv_io.hpp"
#include "ymlens/jet_recovery.hpp"
#include "ymlens/parallel.hpp"
#include "ymlens/variational.hpp"

namespace ymlens {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

double charge_norm(const Scenario& sc, const Vec& xi) {
  return sc.algebra.norm(sc.algebra.raise(xi));
}

}  // namespace

HarnessSummary run_simulate(const Scenario& scenario, const HarnessOptions& opts) {
  const WongSystem sys = scenario.system_a();
  const int n = sys.n(), d = sys.d();
  const std::vector<PhasePoint> entries =
      build_entry_grid(scenario, scenario.config.grids.entry_count, scenario.config.grids.seed);

  std::vector<IntegrationResult> results(entries.size());
  std::vector<std::string> errors(entries.size());
  parallel_for(entries.size(), opts.threads, [&](std::size_t i) {
    try {
      results[i] = integrate(sys, entries[i], scenario.integrator);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  AtomicFile file(join_path(opts.out_dir, "trajectories.csv"));
  file.comment("ymlens-trajectories", "v1");
  file.comment("config_hash", config_hash_hex(scenario.config));
  std::vector<std::string> cols{"traj", "t"};
  for (int i = 0; i < n; ++i) cols.push_back("z_" + std::to_string(i));
  for (int i = 0; i < n; ++i) cols.push_back("v_" + std::to_string(i));
  for (int a = 0; a < d; ++a) cols.push_back("xi_" + std::to_string(a));
  cols.push_back("speed_drift");
  cols.push_back("charge_drift");
  file.line(csv_join(cols));

  const int samples = std::max(2, scenario.config.experiment.trajectory_samples);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!errors[i].empty()) continue;
    const IntegrationResult& res = results[i];
    const double xi0 = charge_norm(scenario, entries[i].xi);
    for (int s = 0; s < samples; ++s) {
      const double t = res.exit.time * s / (samples - 1);
      const PhasePoint p = res.at(n, d, t);
      std::vector<std::string> cells{std::to_string(i), format_double(t)};
      for (int k = 0; k < n; ++k) cells.push_back(format_double(p.z[k]));
      for (int k = 0; k < n; ++k) cells.push_back(format_double(p.v[k]));
      for (int a = 0; a < d; ++a) cells.push_back(format_double(p.xi[a]));
      cells.push_back(format_double(std::abs(1.0 - metric_norm(scenario.chart, p.z, p.v))));
      cells.push_back(format_double(std::abs(charge_norm(scenario, p.xi) - xi0)));
      file.line(csv_join(cells));
    }
  }
  file.write();

  HarnessSummary summary;
  summary.files.push_back(join_path(opts.out_dir, "trajectories.csv"));
  summary.message = "simulated " + std::to_string(entries.size()) + " trajectories";
  return summary;
}

HarnessSummary run_lens_table(const Scenario& scenario, const HarnessOptions& opts) {
  const WongSystem sys = scenario.system_a();
  const std::vector<PhasePoint> entries =
      build_entry_grid(scenario, scenario.config.grids.entry_count, scenario.config.grids.seed);
  const std::vector<LensDatum> rows = lens_data(sys, entries, scenario.integrator, opts.threads);

  LensTableFile table;
  table.config_hash = config_hash_hex(scenario.config);
  table.n = sys.n();
  table.d = sys.d();
  table.rows = rows;
  const std::string path = join_path(opts.out_dir, "lens_table.csv");
  write_lens_table(path, table);

  // Sidecar log with the failed rows, if any.
  int failures = 0;
  AtomicFile log(join_path(opts.out_dir, "lens_table.errors.log"));
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].ok()) {
      ++failures;
      log.line("row " + std::to_string(i) + ": " + rows[i].error);
    }
  if (failures > 0) log.write();

  HarnessSummary summary;
  summary.files.push_back(path);
  summary.message = "wrote " + std::to_string(rows.size()) + " lens rows (" +
                    std::to_string(failures) + " failures)";
  return summary;
}

HarnessSummary run_verify_identity(const Scenario& scenario, const HarnessOptions& opts) {
  const WongSystem sys_a = scenario.system_a();
  const WongSystem sys_b = scenario.system_b();
  const int n = sys_a.n(), d = sys_a.d();
  const int nodes = scenario.config.experiment.nodes;
  const std::vector<PhasePoint> entries =
      build_entry_grid(scenario, scenario.config.grids.entry_count, scenario.config.grids.seed);
  const XRayInput input =
      build_xray_input(scenario.algebra, scenario.constants, scenario.chart, scenario.conn_a,
                       scenario.conn_b);

  struct Row {
    PhasePoint entry;
    double tau = 0.0, residual = 0.0, rhs = 0.0, relative = 0.0, iw = 0.0;
    std::string error;
  };
  std::vector<Row> rows(entries.size());
  parallel_for(entries.size(), opts.threads, [&](std::size_t i) {
    Row& row = rows[i];
    row.entry = entries[i];
    try {
      const PseudoLinearizationResult res = pseudo_linearization_residual(
          sys_a, sys_b, entries[i], nodes, scenario.integrator);
      row.tau = res.travel_time;
      row.residual = res.residual().norm();
      row.rhs = res.rhs.norm();
      row.relative = res.relative_residual();
      row.iw = xray_transform(sys_a, sys_b, input, entries[i], nodes, scenario.integrator).norm();
    } catch (const Error& e) {
      row.error = e.what();
    }
  });

  AtomicFile file(join_path(opts.out_dir, "identity_report.csv"));
  file.comment("ymlens-identity-report", "v1");
  file.comment("config_hash", config_hash_hex(scenario.config));
  std::vector<std::string> cols;
  for (int i = 0; i < n; ++i) cols.push_back("z_" + std::to_string(i));
  for (int i = 0; i < n; ++i) cols.push_back("v_" + std::to_string(i));
  for (int a = 0; a < d; ++a) cols.push_back("xi_" + std::to_string(a));
  for (const char* c : {"travel_time", "residual_norm", "rhs_norm", "relative_residual",
                        "iw_norm", "node_count", "status"})
    cols.push_back(c);
  file.line(csv_join(cols));
  for (const Row& row : rows) {
    std::vector<std::string> cells;
    for (int k = 0; k < n; ++k) cells.push_back(format_double(row.entry.z[k]));
    for (int k = 0; k < n; ++k) cells.push_back(format_double(row.entry.v[k]));
    for (int a = 0; a < d; ++a) cells.push_back(format_double(row.entry.xi[a]));
    cells.push_back(format_double(row.tau));
    cells.push_back(format_double(row.residual));
    cells.push_back(format_double(row.rhs));
    cells.push_back(format_double(row.relative));
    cells.push_back(format_double(row.iw));
    cells.push_back(std::to_string(nodes));
    cells.push_back(row.error.empty() ? "ok" : "failed");
    file.line(csv_join(cells));
  }
  file.write();

  HarnessSummary summary;
  summary.files.push_back(join_path(opts.out_dir, "identity_report.csv"));
  double worst = 0.0;
  for (const Row& row : rows)
    if (row.error.empty()) worst = std::max(worst, row.relative);
  summary.message = "max relative identity residual " + format_double(worst);
  return summary;
}

HarnessSummary run_recover_jet(const Scenario& scenario, const std::string& lens_table_path,
                               const HarnessOptions& opts) {
  const LensTableFile table = read_lens_table(lens_table_path);
  if (table.config_hash != config_hash_hex(scenario.config))
    throw DataError("stale lens table: config hash mismatch");

  const WongSystem sys = scenario.system_a();
  CachedLensAccess lens(table.rows,
                        std::make_unique<SimulatorLensAccess>(sys, scenario.integrator),
                        1e-10);

  Vec near = scenario.config.experiment.recovery_point;
  if (near.size() == 0) {
    near = Vec::Zero(scenario.chart.dim);
    near[scenario.chart.dim - 1] = scenario.chart.box.hi[scenario.chart.dim - 1];
  }
  const std::vector<Vec> patch =
      build_boundary_patch(scenario, near, scenario.config.experiment.patch_count,
                           scenario.config.experiment.patch_radius);

  RecoveryConfig rcfg;
  rcfg.b_initial = scenario.config.experiment.recovery_b;
  rcfg.h = scenario.config.experiment.recovery_h;
  rcfg.integrator = scenario.integrator;
  rcfg.convexity_connection = &scenario.conn_a;

  const std::vector<PatchEntry> results =
      recover_boundary_patch(scenario.chart, scenario.algebra, scenario.constants,
                             scenario.conn_a, scenario.orbit, patch, lens, rcfg);

  // Structured text report.
  AtomicFile report(join_path(opts.out_dir, "recovery_report.txt"));
  report.line("recovery_report: v1");
  report.line("config_hash: " + config_hash_hex(scenario.config));
  report.line("points: " + std::to_string(results.size()));
  report.line("table_hits: " + std::to_string(lens.hits()));
  report.line("table_misses: " + std::to_string(lens.misses()));
  for (std::size_t i = 0; i < results.size(); ++i) {
    const PatchEntry& entry = results[i];
    report.line("point_" + std::to_string(i) + ":");
    std::string coords;
    for (int k = 0; k < entry.p.size(); ++k) coords += (k ? "," : "") + format_double(entry.p[k]);
    report.line("  p: " + coords);
    if (!entry.error.empty()) {
      report.line("  error: " + entry.error);
      continue;
    }
    const RecoveryReport& r = *entry.report;
    report.line("  ell_prime_0: " + format_double(r.ell_prime_0));
    report.line("  condition_number: " + format_double(r.condition_number));
    report.line("  antisymmetry_residual: " + format_double(r.antisymmetry_residual));
    report.line("  xi_row_residual: " + format_double(r.xi_row_residual));
    report.line("  max_uncertainty: " + format_double(r.max_uncertainty));
    report.line(std::string("  noisy: ") + (r.noisy ? "yes" : "no"));
  }
  report.write();

  // Component table with optional ground-truth columns.
  AtomicFile comp(join_path(opts.out_dir, "recovery_components.csv"));
  comp.comment("ymlens-recovery-components", "v1");
  comp.comment("config_hash", config_hash_hex(scenario.config));
  const bool truth = scenario.config.experiment.ground_truth_columns;
  std::vector<std::string> cols{"point", "frame_i", "tangent_k", "lie_alpha", "recovered"};
  if (truth) {
    cols.push_back("ground_truth");
    cols.push_back("abs_error");
  }
  comp.line(csv_join(cols));
  for (std::size_t i = 0; i < results.size(); ++i) {
    const PatchEntry& entry = results[i];
    if (!entry.report) continue;
    const RecoveryReport& r = *entry.report;
    std::vector<std::vector<Vec>> truth_frame;
    if (truth)
      truth_frame = curvature_in_frame(scenario.algebra, scenario.constants, scenario.chart,
                                       scenario.conn_a, entry.p, r.frame);
    const int n = scenario.chart.dim;
    for (int fi = 0; fi < n; ++fi)
      for (int k = 0; k < n - 1; ++k)
        for (int a = 0; a < scenario.algebra.dim(); ++a) {
          std::vector<std::string> cells{std::to_string(i), std::to_string(fi),
                                         std::to_string(k), std::to_string(a),
                                         format_double(r.recovered_F[fi][k][a])};
          if (truth) {
            cells.push_back(format_double(truth_frame[fi][k][a]));
            cells.push_back(format_double(std::abs(r.recovered_F[fi][k][a] - truth_frame[fi][k][a])));
          }
          comp.line(csv_join(cells));
        }
  }
  comp.write();

  HarnessSummary summary;
  summary.files.push_back(join_path(opts.out_dir, "recovery_report.txt"));
  summary.files.push_back(join_path(opts.out_dir, "recovery_components.csv"));
  int failed = 0;
  for (const auto& entry : results)
    if (!entry.error.empty()) ++failed;
  summary.message = "recovered " + std::to_string(results.size() - failed) + "/" +
                    std::to_string(results.size()) + " patch points";
  return summary;
}

HarnessSummary run_check_convexity(const Scenario& scenario, const HarnessOptions& opts) {
  const WongSystem sys = scenario.system_a();
  const ScalarField f =
      make_scalar_field(scenario.config.experiment.convex_function,
                        scenario.config.experiment.convex_coefficients, scenario.chart.dim);
  const auto interior = sample_sphere_grid(scenario.chart, scenario.config.grids.interior_samples,
                                           scenario.config.grids.seed);
  const auto boundary = sample_boundary_sphere_grid(
      scenario.chart, scenario.config.grids.boundary_samples, scenario.config.grids.seed + 1);
  const std::vector<Vec> xis = scenario.orbit_elements(scenario.config.grids.orbit_samples,
                                                       scenario.config.grids.seed + 2);

  AtomicFile sweep(join_path(opts.out_dir, "lambda_sweep.csv"));
  sweep.comment("ymlens-convexity", "v1");
  sweep.comment("config_hash", config_hash_hex(scenario.config));
  sweep.line("lambda,interior_min,boundary_min");
  double base_interior = 0.0, base_boundary = 0.0;
  for (double lambda : scenario.config.experiment.lambda_sweep) {
    std::vector<Vec> scaled;
    scaled.reserve(xis.size());
    for (const Vec& xi : xis) scaled.push_back(lambda * xi);
    const ConvexityReport ci = ym_convex_function_check(sys, f, scaled, interior);
    const ConvexityReport cb = ym_convex_boundary_check(sys, scaled, boundary);
    if (std::abs(lambda - 1.0) < 1e-12) {
      base_interior = ci.minimum;
      base_boundary = cb.minimum;
    }
    sweep.line(format_double(lambda) + "," + format_double(ci.minimum) + "," +
               format_double(cb.minimum));
  }
  sweep.write();

  AtomicFile report(join_path(opts.out_dir, "convexity_report.txt"));
  report.line("convexity_report: v1");
  report.line("config_hash: " + config_hash_hex(scenario.config));
  report.line("interior_min_at_lambda_1: " + format_double(base_interior));
  report.line("boundary_min_at_lambda_1: " + format_double(base_boundary));
  report.line("interior_samples: " + std::to_string(interior.size()));
  report.line("boundary_samples: " + std::to_string(boundary.size()));
  report.write();

  HarnessSummary summary;
  summary.files.push_back(join_path(opts.out_dir, "lambda_sweep.csv"));
  summary.files.push_back(join_path(opts.out_dir, "convexity_report.txt"));
  summary.message = "interior/boundary minima at lambda=1: " + format_double(base_interior) +
                    ", " + format_double(base_boundary);
  return summary;
}

HarnessSummary run_gauge_demo(const Scenario& scenario, const HarnessOptions& opts) {
  const WongSystem sys_a = scenario.system_a();

  // Use the configured gauge pair when present, otherwise build a default
  // interior-supported bump gauge.
  Connection demo_b;
  const Connection* conn_b = nullptr;
  if (scenario.b_is_gauge_of_a) {
    conn_b = &scenario.conn_b;
  } else {
    GaugeBumpSpec spec;
    const int n = scenario.chart.dim;
    spec.center = 0.5 * (scenario.chart.box.lo + scenario.chart.box.hi);
    spec.radius = 0.2 * (scenario.chart.box.hi - scenario.chart.box.lo).minCoeff();
    spec.amp = 0.5;
    spec.zeta = Vec::Zero(scenario.algebra.dim());
    spec.zeta[0] = 1.0;
    (void)n;
    demo_b = make_gauged_connection(scenario.algebra, scenario.chart, scenario.conn_a, {spec});
    conn_b = &demo_b;
  }
  WongSystem sys_b = sys_a;
  sys_b.conn = conn_b;

  const std::vector<PhasePoint> entries =
      build_entry_grid(scenario, scenario.config.grids.entry_count, scenario.config.grids.seed);
  const std::vector<LensDatum> rows_a = lens_data(sys_a, entries, scenario.integrator, opts.threads);
  const std::vector<LensDatum> rows_b = lens_data(sys_b, entries, scenario.integrator, opts.threads);

  LensTableFile ta, tb;
  ta.config_hash = tb.config_hash = config_hash_hex(scenario.config);
  ta.n = tb.n = sys_a.n();
  ta.d = tb.d = sys_a.d();
  ta.rows = rows_a;
  tb.rows = rows_b;
  write_lens_table(join_path(opts.out_dir, "gauge_demo_table_a.csv"), ta);
  write_lens_table(join_path(opts.out_dir, "gauge_demo_table_b.csv"), tb);

  double worst = 0.0;
  int compared = 0;
  for (std::size_t i = 0; i < rows_a.size(); ++i) {
    if (!rows_a[i].ok() || !rows_b[i].ok() || rows_a[i].trapped || rows_b[i].trapped) continue;
    ++compared;
    worst = std::max(worst, (rows_a[i].exit.packed() - rows_b[i].exit.packed())
                                .lpNorm<Eigen::Infinity>());
    worst = std::max(worst, std::abs(rows_a[i].travel_time - rows_b[i].travel_time));
  }

  AtomicFile report(join_path(opts.out_dir, "gauge_demo.txt"));
  report.line("gauge_demo: v1");
  report.line("config_hash: " + config_hash_hex(scenario.config));
  report.line("rows_compared: " + std::to_string(compared));
  report.line("max_lens_difference: " + format_double(worst));
  report.write();

  HarnessSummary summary;
  summary.files.push_back(join_path(opts.out_dir, "gauge_demo.txt"));
  summary.message = "max lens difference over gauge pair: " + format_double(worst);
  return summary;
}

}  // namespace ymlens
