#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "ymlens/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string lens_table_path;
  int threads = 1;
  long long seed = -1;
  std::vector<std::string> overrides;
};

void apply_override(ymlens::ScenarioConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ymlens::ConfigError("override must look like KEY=VAL: " + spec);
  const std::string key = spec.substr(0, eq);
  const std::string val = spec.substr(eq + 1);
  double num = 0.0;
  try {
    num = std::stod(val);
  } catch (const std::exception&) {
    throw ymlens::ConfigError("override value is not numeric: " + spec);
  }

  if (key == "integrator.rel_tol") cfg.integrator.rel_tol = num;
  else if (key == "integrator.abs_tol") cfg.integrator.abs_tol = num;
  else if (key == "integrator.event_tol") cfg.integrator.event_tol = num;
  else if (key == "integrator.max_time") cfg.integrator.max_time = num;
  else if (key == "integrator.initial_step") cfg.integrator.initial_step = num;
  else if (key == "integrator.max_step") cfg.integrator.max_step = num;
  else if (key == "exit_level") cfg.exit_level = num;
  else if (key == "grids.entry_count") cfg.grids.entry_count = static_cast<int>(num);
  else if (key == "grids.orbit_samples") cfg.grids.orbit_samples = static_cast<int>(num);
  else if (key == "grids.seed") cfg.grids.seed = static_cast<std::uint64_t>(num);
  else if (key == "grids.min_inward") cfg.grids.min_inward = num;
  else if (key == "grids.interior_samples") cfg.grids.interior_samples = static_cast<int>(num);
  else if (key == "grids.boundary_samples") cfg.grids.boundary_samples = static_cast<int>(num);
  else if (key == "experiment.nodes") cfg.experiment.nodes = static_cast<int>(num);
  else if (key == "experiment.recovery_b") cfg.experiment.recovery_b = num;
  else if (key == "experiment.recovery_h") cfg.experiment.recovery_h = num;
  else if (key == "experiment.patch_count") cfg.experiment.patch_count = static_cast<int>(num);
  else if (key == "experiment.patch_radius") cfg.experiment.patch_radius = num;
  else throw ymlens::ConfigError("unknown override key: " + key);
  cfg.integrator.validate();
}

int dispatch(const std::string& command, const CommonArgs& args) {
  ymlens::ScenarioConfig cfg = ymlens::load_config(args.config_path);
  for (const std::string& ov : args.overrides) apply_override(cfg, ov);
  if (args.seed >= 0) cfg.grids.seed = static_cast<std::uint64_t>(args.seed);

  const auto scenario = ymlens::build_scenario(cfg);
  ymlens::HarnessOptions opts;
  opts.out_dir = args.out_dir;
  opts.threads = args.threads;

  ymlens::HarnessSummary summary;
  if (command == "simulate") summary = run_simulate(*scenario, opts);
  else if (command == "lens-table") summary = run_lens_table(*scenario, opts);
  else if (command == "verify-identity") summary = run_verify_identity(*scenario, opts);
  else if (command == "recover-jet") {
    if (args.lens_table_path.empty())
      throw ymlens::ConfigError("recover-jet requires --lens-table PATH");
    summary = run_recover_jet(*scenario, args.lens_table_path, opts);
  } else if (command == "check-convexity") summary = run_check_convexity(*scenario, opts);
  else if (command == "gauge-demo") summary = run_gauge_demo(*scenario, opts);
  else throw ymlens::ConfigError("unknown subcommand: " + command);

  std::cout << summary.message << "\n";
  for (const std::string& f : summary.files) std::cout << "wrote " << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for colored-particle lens data"};
  app.require_subcommand(1);

  CommonArgs args;
  const std::vector<std::string> commands = {"simulate",    "lens-table",     "verify-identity",
                                             "recover-jet", "check-convexity", "gauge-demo"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "scenario configuration file")->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "override the grid seed");
    sub->add_option("--threads", args.threads, "worker threads for batch loops");
    sub->add_option("--tol-override", args.overrides, "KEY=VAL configuration override")
        ->take_all();
    if (name == "recover-jet")
      sub->add_option("--lens-table", args.lens_table_path, "precomputed lens table");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), args);
  } catch (const ymlens::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
