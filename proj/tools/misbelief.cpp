#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace misbelief::cli;

void add_common(CLI::App* cmd, CommonFlags& flags, std::string& out_path) {
  cmd->add_option("scenario,--scenario", flags.scenario_path, "Scenario JSON file")->required();
  cmd->add_option("--out", out_path, "Write the CSV report here");
  cmd->add_option("--seed", flags.seed, "Override the scenario's seed");
  cmd->add_flag("--full-precision", flags.full_precision, "Print 17 significant digits");
}

int emit(const CommandOutput& output, const std::string& out_path) {
  std::cout << output.text;
  std::cerr << output.diagnostics;
  if (!out_path.empty() && !output.csv.empty()) {
    std::ofstream file(out_path, std::ios::binary);
    file << output.csv;
    if (!file) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kParseError;
    }
  }
  return output.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit beliefs of learners with a dogmatic, overconfident prior"};
  app.set_version_flag("--version", std::string("misbelief ") + MISBELIEF_VERSION);
  app.require_subcommand(1);

  std::string out_path;

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "Closed-form biases with an independent cross-check");
  add_common(solve_cmd, solve, out_path);

  SweepFlags sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Biases along a grid of one parameter");
  add_common(sweep_cmd, sweep, out_path);
  sweep_cmd->add_option("--param", sweep.param, "v_q[n], v_eta[n], v_a, I, v_q_o, v_a_o or a_tilde_i")->required();
  sweep_cmd->add_option("--grid", sweep.grid, "Comma-separated values")->required();

  SimulateFlags simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Stream signals and track the learner's belief");
  add_common(simulate_cmd, simulate, out_path);
  simulate_cmd->add_option("--steps", simulate.steps, "Number of signals")->capture_default_str();
  simulate_cmd->add_option("--checkpoints", simulate.checkpoints, "Comma-separated increasing step counts");

  VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the randomized verification suites");
  verify_cmd->add_option("--suite", verify.suite, "theorem1, prop1, corollaries, prop2, prop3, examples or all")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "Master seed");
  verify_cmd->add_option("--trials", verify.trials, "Randomized cases per check");
  verify_cmd->add_option("--out", out_path, "Write the CSV report here");
  verify_cmd->add_flag("--full-precision", verify.full_precision, "Print 17 significant digits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  }

  if (*solve_cmd) return emit(run_solve(solve), out_path);
  if (*sweep_cmd) return emit(run_sweep(sweep), out_path);
  if (*simulate_cmd) return emit(run_simulate(simulate), out_path);
  return emit(run_verify(verify), out_path);
}
