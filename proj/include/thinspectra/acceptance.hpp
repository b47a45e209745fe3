#pragma once

// The acceptance suite behind `thinspectra verify` and the `acceptance`
// test binary. Each criterion reports one PASS/FAIL row.

#include <iosfwd>
#include <string>
#include <vector>

namespace thinspectra {

struct AcceptanceOptions {
  /// Comma-separated tokens; a criterion runs when a token equals its id
  /// ("c2" or "2"), its name or one of its tags. Empty runs everything.
  std::string filter;
  /// Negative control: the arccos criterion compares against a closed form
  /// evaluated at a wrong q, so it must FAIL.
  bool inject_wrong_q = false;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<std::string> tags;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the selected criteria in order and prints one row per criterion.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out);

/// 0 iff every selected row passed
/// (1 otherwise, also when the filter matched nothing).
int acceptance_exit_code(const std::vector<CriterionResult>& results);

}  // namespace thinspectra
