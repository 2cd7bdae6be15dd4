#ifndef YMLENS_HARNESS_HPP
#define YMLENS_HARNESS_HPP

#include <string>

#include "ymlens/scenario.hpp"

namespace ymlens {

struct HarnessOptions {
  std::string out_dir = "out";
  int threads = 1;
};

struct HarnessSummary {
  std::string message;
  std::vector<std::string> files;
};

HarnessSummary run_simulate(const Scenario& scenario, const HarnessOptions& opts);
HarnessSummary run_lens_table(const Scenario& scenario, const HarnessOptions& opts);
HarnessSummary run_verify_identity(const Scenario& scenario, const HarnessOptions& opts);
HarnessSummary run_recover_jet(const Scenario& scenario, const std::string& lens_table_path,
                               const HarnessOptions& opts);
HarnessSummary run_check_convexity(const Scenario& scenario, const HarnessOptions& opts);
HarnessSummary run_gauge_demo(const Scenario& scenario, const HarnessOptions& opts);

}  // namespace ymlens

#endif
