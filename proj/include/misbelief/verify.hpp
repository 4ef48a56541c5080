#pragma once

#include "misbelief/linalg.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace misbelief {

/// One cross-check aggregated over many randomized cases. A check passes when
/// `value` satisfies the comparison against `threshold` (for "<=" checks the
/// value is a worst-case error, for ">" checks a worst-case margin).
struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string comparison;  // "<=", ">" or ">="
  double threshold = 0.0;
  std::size_t trials = 0;
  std::string detail;
  /// Scenario document reproducing the worst case, set only on failure.
  std::string reproduction;
};

struct VerifyOptions {
  std::uint64_t seed = 20240607;
  std::size_t theorem1_instances = 1000;
  std::size_t prop1_scenarios = 1000;
  std::size_t oracle_scenarios = 50;
  std::size_t corollary_scenarios = 200;
  std::size_t extension_scenarios = 200;
};

/// theorem1, prop1, corollaries, prop2, prop3, examples (and "all").
const std::vector<std::string>& suite_names();

/// Runs one suite, or every suite for "all". Unknown names throw
/// UnknownParameter.
std::vector<CheckResult> run_suite(std::string_view suite, const VerifyOptions& options = {});

/// max |a - b| / max(max |b|, 1).
double relative_error(const Matrix& a, const Matrix& b);

/// |A - B|_F / max(|B|_F, 1).
double frobenius_relative_error(const Matrix& a, const Matrix& b);

}  // namespace misbelief
