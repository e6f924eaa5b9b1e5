#pragma once

#include <string>
#include <vector>

#include "regulab/harness.hpp"

namespace regulab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

struct AcceptanceOptions {
  int threads = -1;       ///< -1 reads REGULAB_THREADS
  std::vector<int> only;  ///< empty runs all criteria
};

/// Worker cap from REGULAB_THREADS: unset gives the hardware concurrency, 0 runs serially.
int worker_count();

/// The rate experiments of the suite: flat boundary, power bump, Isaacs
/// manufactured jet, slit domain.
std::vector<ExperimentConfig> suite_experiments();

/// Runs the acceptance criteria (1..11); results are in id order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});
std::string suite_report_json(const std::vector<CriterionResult>& results);

struct SelftestResult {
  int checks = 0;
  std::vector<std::string> failures;
};

/// Quick operator and fit property checks.
SelftestResult run_selftest();

}  // namespace regulab
