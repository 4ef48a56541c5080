#include "commands.hpp"

#include "misbelief/errors.hpp"
#include "misbelief/report.hpp"
#include "misbelief/scenario_file.hpp"
#include "misbelief/simulate.hpp"
#include "misbelief/verify.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

namespace misbelief::cli {

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::UnknownParameter:
    case ErrorKind::InvalidGrid:
      return kParseError;
    case ErrorKind::NonConvergence:
      return kNonConvergence;
    default:
      return kInvariantViolation;
  }
}

template <class Body>
CommandOutput guarded(Body body) {
  try {
    return body();
  } catch (const Error& e) {
    CommandOutput out;
    out.exit_code = exit_code_for(e.kind());
    out.diagnostics = std::string("error: ") + e.what() + "\n";
    return out;
  } catch (const std::exception& e) {
    CommandOutput out;
    out.exit_code = kInvariantViolation;
    out.diagnostics = std::string("error: ") + e.what() + "\n";
    return out;
  }
}

struct Digits {
  int csv;
  int text;
};

Digits digits_for(bool full) { return full ? Digits{kFullDigits, kFullDigits} : Digits{kCsvDigits, kTableDigits}; }

/// One reported quantity. `cross_check` is the independent path: the general
/// solver for closed forms, the numeric oracle for raw models.
struct Row {
  std::string section;
  std::string index;
  std::string label;
  double closed_form = 0.0;
  std::optional<double> cross_check;
  std::string tag;
};

std::string pair_index(Eigen::Index r, Eigen::Index c) { return std::to_string(r + 1) + ":" + std::to_string(c + 1); }

void add_sigma_rows(std::vector<Row>& rows, const std::string& section, const Matrix& closed,
                    const std::optional<Matrix>& cross) {
  for (Eigen::Index r = 0; r < closed.rows(); ++r)
    for (Eigen::Index c = r; c < closed.cols(); ++c) {
      Row row{section, pair_index(r, c), "", closed(r, c), std::nullopt, ""};
      if (cross) row.cross_check = (*cross)(r, c);
      rows.push_back(std::move(row));
    }
}

std::vector<Row> society_rows(const ScenarioFile& file, const Scenario& s, bool full_report) {
  std::vector<Row> rows;
  const BiasReport closed = biases_closed_form(s);
  const BiasReport theorem = biases_via_theorem(s);
  for (Eigen::Index k = 0; k < s.groups(); ++k)
    rows.push_back({"theta_bias", std::to_string(k + 1), file.group_label(k), closed.theta_bias(k),
                    theorem.theta_bias(k), ""});
  for (Eigen::Index j = 0; j < s.individuals(); ++j)
    rows.push_back({"caliber_bias", std::to_string(j + 1), j == s.agent ? "agent" : "individual" + std::to_string(j + 1),
                    closed.caliber_bias(j), theorem.caliber_bias(j),
                    std::string(to_string(closed.classifications[static_cast<std::size_t>(j)]))});
  if (!full_report) return rows;
  add_sigma_rows(rows, "sigma_bias", closed.sigma_bias, theorem.sigma_bias);
  for (const auto& check : corollary_checks(s).checks) {
    Row row{"corollary", "", check.name, check.applicable ? check.margin : 0.0, std::nullopt, ""};
    row.tag = !check.applicable ? "n/a (" + check.reason + ")" : (check.passed ? "pass" : "fail");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Row> correlated_rows(const CorrelatedScenario& cs, bool full_report) {
  std::vector<Row> rows;
  const CorrelatedReport closed = correlated_biases(cs);
  const CorrelatedReport theorem = correlated_biases_via_theorem(cs);
  for (Eigen::Index j = 0; j < cs.individuals(); ++j)
    rows.push_back({"caliber_bias", std::to_string(j + 1), j == cs.agent ? "agent" : "individual" + std::to_string(j + 1),
                    closed.caliber_bias(j), theorem.caliber_bias(j),
                    std::string(to_string(closed.tags[static_cast<std::size_t>(j)]))});
  if (full_report) add_sigma_rows(rows, "sigma_bias", closed.sigma_bias, theorem.sigma_bias);
  return rows;
}

std::vector<Row> contact_rows(const ContactScenario& ks) {
  std::vector<Row> rows;
  const ContactReport closed = contact_biases(ks);
  const auto n = ks.individuals();
  const ContactReport theorem = contact_biases_via_theorem(ks.signs, Vector::Constant(n, ks.v_q), ks.v_eta,
                                                           Vector::Constant(n, ks.v_a), ks.agent, ks.overconfidence());
  rows.push_back({"theta_bias", "1", "group", closed.theta_bias, theorem.theta_bias, ""});
  for (Eigen::Index j = 0; j < n; ++j)
    rows.push_back({"caliber_bias", std::to_string(j + 1), j == ks.agent ? "agent" : "individual" + std::to_string(j + 1),
                    closed.caliber_bias(j), theorem.caliber_bias(j), ""});
  return rows;
}

std::vector<Row> example1_rows(const RicherObservationScenario& e) {
  const RicherObservationRatios closed = example1_biases(e.v_q_out, e.v_a_out);
  const RicherObservationRatios theorem = example1_via_theorem(e.v_q_out, e.v_a_out);
  const double d = e.overconfidence;
  return {
      {"bias_ratio", "3", "a3", closed.competitor_first, theorem.competitor_first, ""},
      {"bias_ratio", "4", "a4", closed.competitor_second, theorem.competitor_second, ""},
      {"bias_ratio", "1", "theta", closed.discrimination, theorem.discrimination, ""},
      {"bias", "3", "a3", closed.competitor_first * d, theorem.competitor_first * d, ""},
      {"bias", "4", "a4", closed.competitor_second * d, theorem.competitor_second * d, ""},
      {"bias", "1", "theta", closed.discrimination * d, theorem.discrimination * d, ""},
  };
}

std::vector<Row> example2_rows(const MultiAttributeScenario& ms) {
  const MultiAttributeReport closed = example2_biases(ms);
  const MultiAttributeReport theorem = example2_via_theorem(ms);
  return {
      {"bias", "", "a2", closed.talent_other, theorem.talent_other, "talent, out-group"},
      {"bias", "", "m1", closed.morality_other, theorem.morality_other, "morality, out-group"},
      {"bias", "", "theta1", closed.discrimination, theorem.discrimination, "discrimination"},
  };
}

std::vector<Row> raw_rows(const RawScenario& raw, std::uint64_t seed, bool cross_check) {
  std::vector<Row> rows;
  const LimitBelief closed = solve_limit(raw.model, raw.fundamentals, raw.constraint);
  std::optional<LimitBelief> oracle;
  if (cross_check) {
    OracleOptions options;
    options.seed = seed;
    oracle = numeric_oracle(raw.model, raw.fundamentals, raw.constraint, options).belief;
  }
  for (Eigen::Index k = 0; k < closed.f_tilde.size(); ++k) {
    Row row{"f_tilde", std::to_string(k + 1), "", closed.f_tilde(k), std::nullopt, ""};
    if (oracle) row.cross_check = oracle->f_tilde(k);
    if (raw.constraint.pin_mode() == PinMode::PinOne && k == raw.constraint.pinned_index()) row.tag = "pinned";
    if (raw.constraint.pin_mode() == PinMode::PinAll) row.tag = "pinned";
    rows.push_back(std::move(row));
  }
  for (Eigen::Index k = 0; k < closed.f_tilde.size(); ++k)
    rows.push_back({"f_bias", std::to_string(k + 1), "", closed.f_tilde(k) - raw.fundamentals(k),
                    oracle ? std::optional<double>(oracle->f_tilde(k) - raw.fundamentals(k)) : std::nullopt, ""});
  add_sigma_rows(rows, "sigma_tilde", closed.sigma_tilde,
                 oracle ? std::optional<Matrix>(oracle->sigma_tilde) : std::nullopt);
  return rows;
}

std::vector<Row> scenario_rows(const ScenarioFile& file, bool full_report) {
  switch (file.kind) {
    case ScenarioKind::Society: return society_rows(file, *file.society, full_report);
    case ScenarioKind::Correlated: return correlated_rows(*file.correlated, full_report);
    case ScenarioKind::Contact: return contact_rows(*file.contact);
    case ScenarioKind::Example1: return example1_rows(*file.example1);
    case ScenarioKind::Example2: return example2_rows(*file.example2);
    case ScenarioKind::Raw: return raw_rows(*file.raw, file.seed, full_report);
  }
  return {};
}

std::string describe(const ScenarioFile& file) {
  std::ostringstream out;
  out << "scenario: " << file.name << " (" << to_string(file.kind);
  switch (file.kind) {
    case ScenarioKind::Society: {
      const Scenario& s = *file.society;
      out << ", I=" << s.individuals() << ", K=" << s.groups() << ", agent " << s.agent + 1
          << ", overconfidence " << format_number(s.overconfidence(), kTableDigits);
      break;
    }
    case ScenarioKind::Correlated:
      out << ", I=" << file.correlated->individuals() << ", agent " << file.correlated->agent + 1;
      break;
    case ScenarioKind::Contact:
      out << ", I=" << file.contact->individuals() << ", agent " << file.contact->agent + 1;
      break;
    case ScenarioKind::Raw: {
      const auto c = file.raw->constraint.limit_case();
      out << ", D=" << file.raw->model.signal_dim() << ", L=" << file.raw->model.fundamental_dim() << ", case "
          << (c == LimitCase::I ? "I" : c == LimitCase::II ? "II" : "III");
      break;
    }
    case ScenarioKind::Example1:
    case ScenarioKind::Example2:
      break;
  }
  out << ")\n";
  return out.str();
}

Provenance provenance_for(const std::string& command, const ScenarioFile& file, std::uint64_t seed) {
  return Provenance{command, file.name, file.digest, seed};
}

std::string cross_label(const ScenarioFile& file) { return file.kind == ScenarioKind::Raw ? "oracle" : "theorem"; }

}  // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    require(first != std::string::npos, ErrorKind::InvalidGrid, what + ": empty entry");
    const std::string token = item.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    require(ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(v), ErrorKind::InvalidGrid,
            what + ": '" + token + "' is not a finite number");
    values.push_back(v);
  }
  require(!values.empty(), ErrorKind::InvalidGrid, what + ": no values given");
  return values;
}

CommandOutput run_solve(const SolveFlags& flags) {
  return guarded([&] {
    const ScenarioFile file = load_scenario_file(flags.scenario_path);
    const std::uint64_t seed = flags.seed.value_or(file.seed);
    ScenarioFile seeded = file;
    seeded.seed = seed;
    const std::vector<Row> rows = scenario_rows(seeded, true);
    const Digits digits = digits_for(flags.full_precision);

    const std::string cross = cross_label(file);
    Table csv({"section", "index", "label", "closed_form", cross, "abs_difference", "tag"});
    Table text({"section", "index", "label", "closed_form", cross, "abs_difference", "tag"});
    for (const Row& r : rows) {
      auto cells = [&](int d) {
        const std::string diff = r.cross_check ? format_number(std::abs(r.closed_form - *r.cross_check), d) : "";
        return std::vector<std::string>{r.section, r.index, r.label, format_number(r.closed_form, d),
                                        r.cross_check ? format_number(*r.cross_check, d) : "", diff, r.tag};
      };
      csv.add_row(cells(digits.csv));
      text.add_row(cells(digits.text));
    }
    CommandOutput out;
    out.text = describe(file) + text.to_text();
    out.csv = csv.to_csv(provenance_for("solve", file, seed));
    for (const Row& r : rows)
      if (r.section == "corollary" && r.tag == "fail") out.diagnostics += "warning: corollary check failed: " + r.label + "\n";
    return out;
  });
}

// ---------------------------------------------------------------------------

namespace {

struct Parameter {
  std::string name;
  std::optional<Eigen::Index> index;  // zero-based
};

Parameter parse_parameter(const std::string& text) {
  static const std::regex indexed(R"(^(v_q|v_eta)\[(\d+)\]$)");
  std::smatch m;
  if (std::regex_match(text, m, indexed)) {
    const long n = std::stol(m[2].str());
    require(n >= 1, ErrorKind::UnknownParameter, "parameter indices are one-based: '" + text + "'");
    return Parameter{m[1].str(), static_cast<Eigen::Index>(n - 1)};
  }
  for (const char* plain : {"v_a", "v_q_o", "v_a_o", "a_tilde_i", "I"})
    if (text == plain) return Parameter{text, std::nullopt};
  fail(ErrorKind::UnknownParameter, "unknown sweep parameter '" + text +
                                        "' (expected v_q[n], v_eta[n], v_a, v_q_o, v_a_o, a_tilde_i or I)");
}

[[noreturn]] void not_for_kind(const Parameter& p, ScenarioKind kind) {
  fail(ErrorKind::UnknownParameter,
       "parameter '" + p.name + "' does not apply to " + std::string(to_string(kind)) + " scenarios");
}

void require_positive(double v, const std::string& what) {
  require(v > 0.0, ErrorKind::InvalidGrid, what + " grid values must be positive (got " + format_number(v, 17) + ")");
}

/// The scenario with parameter `p` set to `value`.
ScenarioFile apply_parameter(const ScenarioFile& base, const Parameter& p, double value) {
  ScenarioFile f = base;
  const std::string& n = p.name;
  switch (f.kind) {
    case ScenarioKind::Society: {
      Scenario& s = *f.society;
      if (n == "v_q" || n == "v_eta") {
        require_positive(value, n);
        Vector& target = n == "v_q" ? s.v_q : s.v_eta;
        require(*p.index < target.size(), ErrorKind::UnknownParameter,
                n + "[" + std::to_string(*p.index + 1) + "] is out of range (length " + std::to_string(target.size()) + ")");
        target(*p.index) = value;
      } else if (n == "a_tilde_i") {
        s.a_tilde = value;
      } else {
        not_for_kind(p, f.kind);
      }
      break;
    }
    case ScenarioKind::Correlated:
      if (n != "a_tilde_i") not_for_kind(p, f.kind);
      f.correlated->a_tilde = value;
      break;
    case ScenarioKind::Contact: {
      ContactScenario& ks = *f.contact;
      if (n == "v_a") {
        require_positive(value, n);
        ks.v_a = value;
      } else if (n == "a_tilde_i") {
        ks.a_tilde = value;
      } else if (n == "I") {
        require(value == std::floor(value) && value >= static_cast<double>(ks.agent + 1) && value <= 64.0,
                ErrorKind::InvalidGrid, "I grid values must be integers between the agent's index and 64");
        const auto size = static_cast<Eigen::Index>(value);
        const auto old = base.contact->individuals();
        ks.signs.resize(size);
        ks.calibers.resize(size);
        // grow or shrink by cycling the file's people
        for (Eigen::Index j = 0; j < size; ++j) {
          ks.signs(j) = base.contact->signs(j % old);
          ks.calibers(j) = base.contact->calibers(j % old);
        }
      } else {
        not_for_kind(p, f.kind);
      }
      break;
    }
    case ScenarioKind::Example1:
      if (n == "v_q_o") {
        require_positive(value, n);
        f.example1->v_q_out = value;
      } else if (n == "v_a_o") {
        require_positive(value, n);
        f.example1->v_a_out = value;
      } else if (n == "a_tilde_i") {
        f.example1->overconfidence = value;  // true caliber is 0
      } else {
        not_for_kind(p, f.kind);
      }
      break;
    case ScenarioKind::Example2:
      if (n != "a_tilde_i") not_for_kind(p, f.kind);
      f.example2->overconfidence = value - f.example2->talent_self - f.example2->morality_self;
      break;
    case ScenarioKind::Raw:
      not_for_kind(p, f.kind);
  }
  return f;
}

std::string trend(const std::vector<double>& values) {
  if (values.size() < 2) return "single";
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  bool up = false, down = false, flat = false;
  for (std::size_t k = 1; k < values.size(); ++k) {
    const double d = values[k] - values[k - 1];
    if (d > tol) up = true;
    else if (d < -tol) down = true;
    else flat = true;
  }
  if (up && down) return "mixed";
  if (!up && !down) return "constant";
  if (up) return flat ? "weakly_increasing" : "increasing";
  return flat ? "weakly_decreasing" : "decreasing";
}

}  // namespace

CommandOutput run_sweep(const SweepFlags& flags) {
  return guarded([&] {
    const ScenarioFile file = load_scenario_file(flags.scenario_path);
    const Parameter param = parse_parameter(flags.param);
    const std::vector<double> grid = parse_number_list(flags.grid, "--grid");
    const Digits digits = digits_for(flags.full_precision);

    // series key -> value per grid point, in first-seen order
    std::vector<std::vector<Row>> per_point;
    for (double value : grid) {
      const ScenarioFile applied = apply_parameter(file, param, value);
      per_point.push_back(scenario_rows(applied, false));
    }
    std::map<std::string, std::vector<double>> series;
    auto key = [](const Row& r) { return r.section + "|" + r.index + "|" + r.label; };
    for (const auto& rows : per_point)
      for (const Row& r : rows) series[key(r)].push_back(std::abs(r.closed_form));
    std::map<std::string, std::string> trends;
    for (const auto& [k, values] : series)
      trends[k] = values.size() == grid.size() ? trend(values) : "n/a";

    const std::vector<std::string> header = {"param", "grid_value", "quantity", "index", "label", "value", "abs_trend"};
    Table csv(header);
    Table text(header);
    for (std::size_t g = 0; g < grid.size(); ++g)
      for (const Row& r : per_point[g]) {
        csv.add_row({flags.param, format_number(grid[g], digits.csv), r.section, r.index, r.label,
                     format_number(r.closed_form, digits.csv), trends[key(r)]});
        text.add_row({flags.param, format_number(grid[g], digits.text), r.section, r.index, r.label,
                      format_number(r.closed_form, digits.text), trends[key(r)]});
      }
    CommandOutput out;
    out.text = describe(file) + text.to_text();
    out.csv = csv.to_csv(provenance_for("sweep " + flags.param, file, flags.seed.value_or(file.seed)));
    return out;
  });
}

// ---------------------------------------------------------------------------

namespace {

struct SimulationSetup {
  LinearGaussianModel model;
  Vector truth;
  DogmaticConstraint constraint;
};

SimulationSetup simulation_setup(const ScenarioFile& file) {
  switch (file.kind) {
    case ScenarioKind::Raw:
      return {file.raw->model, file.raw->fundamentals, file.raw->constraint};
    case ScenarioKind::Society: {
      SocietyModel sm = build_model(*file.society);
      return {std::move(sm.model), std::move(sm.fundamentals), std::move(sm.constraint)};
    }
    case ScenarioKind::Correlated: {
      const CorrelatedScenario& cs = *file.correlated;
      const auto n = cs.individuals();
      return {LinearGaussianModel(Matrix::Identity(n, n), cs.sigma_q), cs.calibers,
              DogmaticConstraint::case3(cs.agent, cs.a_tilde)};
    }
    case ScenarioKind::Contact: {
      const ContactScenario& ks = *file.contact;
      const auto n = ks.individuals();
      Vector truth(n + 1);
      truth << ks.calibers, ks.discrimination;
      return {contact_model(ks.signs, Vector::Constant(n, ks.v_q), ks.v_eta, Vector::Constant(n, ks.v_a)), truth,
              DogmaticConstraint::case3(ks.agent, ks.a_tilde)};
    }
    case ScenarioKind::Example1: {
      const RicherObservationScenario& e = *file.example1;
      return {example1_model(e.v_q_out, e.v_a_out), Vector::Zero(5), DogmaticConstraint::case3(0, e.overconfidence)};
    }
    case ScenarioKind::Example2: {
      SocietyModel sm = example2_model(*file.example2);
      return {std::move(sm.model), std::move(sm.fundamentals), std::move(sm.constraint)};
    }
  }
  fail(ErrorKind::InvalidScenario, "unsupported scenario kind");
}

std::vector<std::uint64_t> parse_checkpoints(const std::string& text, std::uint64_t steps) {
  std::vector<std::uint64_t> out;
  if (text.empty()) {
    for (std::uint64_t t = 100; t < steps; t *= 10) out.push_back(t);
    out.push_back(steps);
    return out;
  }
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    require(ec == std::errc() && ptr == item.data() + item.size() && v >= 1, ErrorKind::Parse,
            "--checkpoints: '" + item + "' is not a positive integer");
    require(out.empty() || v > out.back(), ErrorKind::Parse, "--checkpoints must be strictly increasing");
    out.push_back(v);
  }
  require(!out.empty(), ErrorKind::Parse, "--checkpoints: no values given");
  require(out.back() <= steps, ErrorKind::Parse, "--steps must be at least the last checkpoint");
  return out;
}

}  // namespace

CommandOutput run_simulate(const SimulateFlags& flags) {
  return guarded([&] {
    const ScenarioFile file = load_scenario_file(flags.scenario_path);
    require(flags.steps >= 1, ErrorKind::Parse, "--steps must be positive");
    const std::vector<std::uint64_t> checkpoints = parse_checkpoints(flags.checkpoints, flags.steps);
    const std::uint64_t seed = flags.seed.value_or(file.seed);
    const SimulationSetup setup = simulation_setup(file);
    const ConvergenceTrace trace =
        convergence_trace(setup.model, setup.truth, setup.constraint, flags.steps, checkpoints, seed);
    const Digits digits = digits_for(flags.full_precision);

    const auto l = setup.model.fundamental_dim();
    const auto d = setup.model.signal_dim();
    std::vector<std::string> header = {"t", "distance"};
    for (Eigen::Index k = 0; k < l; ++k) header.push_back("f" + std::to_string(k + 1));
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = r; c < d; ++c) header.push_back("sigma" + std::to_string(r + 1) + "_" + std::to_string(c + 1));
    Table csv(header);
    for (const auto& point : trace.checkpoints) {
      std::vector<std::string> row = {std::to_string(point.t), format_number(point.distance, digits.csv)};
      for (Eigen::Index k = 0; k < l; ++k) row.push_back(format_number(point.belief.f_tilde(k), digits.csv));
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = r; c < d; ++c) row.push_back(format_number(point.belief.sigma_tilde(r, c), digits.csv));
      csv.add_row(std::move(row));
    }

    Table distances({"t", "distance_to_limit"});
    for (const auto& point : trace.checkpoints)
      distances.add_row({std::to_string(point.t), format_number(point.distance, digits.text)});
    const auto& last = trace.checkpoints.back();
    Table final_table({"coordinate", "limit", "simulated", "abs_difference"});
    for (Eigen::Index k = 0; k < l; ++k)
      final_table.add_row({"f" + std::to_string(k + 1), format_number(trace.limit.f_tilde(k), digits.text),
                           format_number(last.belief.f_tilde(k), digits.text),
                           format_number(std::abs(trace.limit.f_tilde(k) - last.belief.f_tilde(k)), digits.text)});
    const auto c = setup.constraint.limit_case();
    std::ostringstream text;
    text << describe(file) << "learner: "
         << (c == LimitCase::I ? "conjugate posterior mean (fixed covariance)" : "constrained maximum likelihood")
         << ", seed " << seed << ", steps " << flags.steps << "\n"
         << distances.to_text() << "\nfinal belief vs limit\n"
         << final_table.to_text();

    CommandOutput out;
    out.text = text.str();
    out.csv = csv.to_csv(provenance_for("simulate", file, seed));
    return out;
  });
}

// ---------------------------------------------------------------------------

CommandOutput run_verify(const VerifyFlags& flags) {
  return guarded([&] {
    VerifyOptions options;
    if (flags.seed) options.seed = *flags.seed;
    if (flags.trials) {
      const std::size_t n = *flags.trials;
      require(n >= 1, ErrorKind::Parse, "--trials must be positive");
      options.theorem1_instances = options.prop1_scenarios = options.corollary_scenarios =
          options.extension_scenarios = n;
      options.oracle_scenarios = std::min<std::size_t>(options.oracle_scenarios, n);
    }
    const std::vector<CheckResult> results = run_suite(flags.suite, options);
    const Digits digits = digits_for(flags.full_precision);

    const std::vector<std::string> header = {"suite", "check", "status", "value", "comparison", "threshold", "trials",
                                             "detail"};
    Table csv(header);
    Table text({"suite", "check", "status", "value", "needs", "trials"});
    bool all_passed = true;
    std::string reproductions;
    for (const auto& r : results) {
      all_passed = all_passed && r.passed;
      const std::string status = r.passed ? "pass" : "FAIL";
      csv.add_row({r.suite, r.name, status, format_number(r.value, digits.csv), r.comparison,
                   format_number(r.threshold, digits.csv), std::to_string(r.trials), r.detail});
      text.add_row({r.suite, r.name, status, format_number(r.value, digits.text),
                    r.comparison + " " + format_number(r.threshold, digits.text), std::to_string(r.trials)});
      if (!r.passed && !r.reproduction.empty())
        reproductions += "reproduction for " + r.suite + "/" + r.name + ":\n" + r.reproduction + "\n";
    }
    CommandOutput out;
    std::ostringstream summary;
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed;
    summary << "suite: " << flags.suite << ", seed " << options.seed << "\n"
            << text.to_text() << passed << "/" << results.size() << " checks passed\n";
    out.text = summary.str() + reproductions;
    out.csv = csv.to_csv(Provenance{"verify " + flags.suite, "", "", options.seed});
    out.exit_code = all_passed ? kOk : kVerificationFailed;
    return out;
  });
}

}  // namespace misbelief::cli
