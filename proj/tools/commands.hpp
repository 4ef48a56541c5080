#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace misbelief::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kParseError = 2,
  kInvariantViolation = 3,
  kNonConvergence = 4,
};

/// What a command produced: human-readable text for stdout, an optional CSV
/// report for --out, and diagnostics for stderr.
struct CommandOutput {
  int exit_code = kOk;
  std::string text;
  std::string csv;
  std::string diagnostics;
};

struct CommonFlags {
  std::string scenario_path;
  bool full_precision = false;
  std::optional<std::uint64_t> seed;
};

struct SolveFlags : CommonFlags {};

struct SweepFlags : CommonFlags {
  std::string param;
  std::string grid;  // comma-separated values
};

struct SimulateFlags : CommonFlags {
  std::uint64_t steps = 100000;
  std::string checkpoints;  // comma-separated; empty means powers of ten up to steps
};

struct VerifyFlags {
  std::string suite = "all";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;  // overrides every randomized count
  bool full_precision = false;
};

CommandOutput run_solve(const SolveFlags& flags);
CommandOutput run_sweep(const SweepFlags& flags);
CommandOutput run_simulate(const SimulateFlags& flags);
CommandOutput run_verify(const VerifyFlags& flags);

/// Parses "1,2.5,1e3" strictly; InvalidGrid on malformed or non-finite entries.
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace misbelief::cli
