#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gpwells {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct VerifyOptions {
  /// Grid side for the near-critical runs (criteria 5 to 9).
  int n = 512;
  /// Grid side for the linear-limit and derivative runs.
  int n_linear = 256;
  /// Sweep artifacts (CSV, plots) are written here when non-empty.
  std::string out_dir;
  /// Scratch directory for the persistence checks; a temporary one when empty.
  std::string scratch_dir;
  /// Restrict to these criterion ids; empty runs all ten.
  std::vector<int> only;
  std::function<void(const CriterionResult&)> on_result;
  std::function<void(const std::string&)> log;
};

std::vector<CriterionResult> run_verification(const VerifyOptions& options = {});

/// "criterion 5 [PASS] energy asymptotics: ... (12.3 s)"
std::string format_result(const CriterionResult& r);

}  // namespace gpwells
