#include "misbelief/scenario_file.hpp"

#include "misbelief/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace misbelief {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::Society: return "society";
    case ScenarioKind::Correlated: return "correlated";
    case ScenarioKind::Contact: return "contact";
    case ScenarioKind::Raw: return "raw";
    case ScenarioKind::Example1: return "example1";
    case ScenarioKind::Example2: return "example2";
  }
  return "society";
}

std::string ScenarioFile::group_label(Eigen::Index k) const {
  const auto idx = static_cast<std::size_t>(k);
  if (idx < group_labels.size()) return group_labels[idx];
  return "group" + std::to_string(k + 1);
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  fail(ErrorKind::Parse, "field '" + path + "': " + what);
}

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string element(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

void expect_object(const json& j, const std::string& path, const std::set<std::string>& required,
                   const std::set<std::string>& optional = {}) {
  if (!j.is_object()) parse_fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!required.count(key) && !optional.count(key)) parse_fail(child(path, key), "unknown field");
  }
  for (const auto& key : required)
    if (!j.contains(key)) parse_fail(child(path, key), "missing required field");
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

long long read_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<long long>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) parse_fail(path, "expected a string");
  return j.get<std::string>();
}

Vector read_vector(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = read_number(j[k], element(path, k));
  return v;
}

Matrix read_matrix(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) parse_fail(element(path, r), "expected a row array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols)
      parse_fail(element(path, r), "row has " + std::to_string(j[r].size()) + " entries, expected " +
                                       std::to_string(cols));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          read_number(j[r][c], element(element(path, r), c));
  return m;
}

MembershipMatrix read_int_matrix(const json& j, const std::string& path, Eigen::Index expected_rows) {
  if (!j.is_array()) parse_fail(path, "expected an array of rows");
  // K = 0 may be written as [] instead of I empty rows.
  if (j.empty()) return MembershipMatrix::Zero(expected_rows, 0);
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  MembershipMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array()) parse_fail(element(path, r), "expected a row array");
    if (j[r].size() != cols)
      parse_fail(element(path, r), "row has " + std::to_string(j[r].size()) + " entries, expected " +
                                       std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          static_cast<int>(read_integer(j[r][c], element(element(path, r), c)));
  }
  return m;
}

MembershipVector read_int_vector(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of integers");
  MembershipVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k)
    v(static_cast<Eigen::Index>(k)) = static_cast<int>(read_integer(j[k], element(path, k)));
  return v;
}

/// One-based index in the file, zero-based in memory. Range is an invariant,
/// checked by the scenario's own validation.
Eigen::Index read_index(const json& j, const std::string& path) { return static_cast<Eigen::Index>(read_integer(j, path)) - 1; }

void require_count(Eigen::Index declared, Eigen::Index actual, const std::string& what) {
  require(declared == actual, ErrorKind::InvalidScenario,
          what + " has length " + std::to_string(actual) + " but the declared count is " + std::to_string(declared));
}

Scenario read_society(const json& j, std::vector<std::string>& labels) {
  const std::string p = "society";
  expect_object(j, p, {"I", "K", "C", "A", "Theta", "v_q", "v_eta", "agent", "a_tilde_i"}, {"group_labels"});
  const auto i_count = static_cast<Eigen::Index>(read_integer(j["I"], child(p, "I")));
  const auto k_count = static_cast<Eigen::Index>(read_integer(j["K"], child(p, "K")));
  require(i_count >= 1, ErrorKind::InvalidScenario, "I must be at least 1");
  require(k_count >= 0, ErrorKind::InvalidScenario, "K must be non-negative");
  Scenario s;
  s.memberships = read_int_matrix(j["C"], child(p, "C"), i_count);
  s.calibers = read_vector(j["A"], child(p, "A"));
  s.discrimination = read_vector(j["Theta"], child(p, "Theta"));
  s.v_q = read_vector(j["v_q"], child(p, "v_q"));
  s.v_eta = read_vector(j["v_eta"], child(p, "v_eta"));
  s.agent = read_index(j["agent"], child(p, "agent"));
  s.a_tilde = read_number(j["a_tilde_i"], child(p, "a_tilde_i"));
  if (j.contains("group_labels")) {
    const auto& lj = j["group_labels"];
    const std::string lp = child(p, "group_labels");
    if (!lj.is_array()) parse_fail(lp, "expected an array of strings");
    for (std::size_t k = 0; k < lj.size(); ++k) labels.push_back(read_string(lj[k], element(lp, k)));
    require_count(k_count, static_cast<Eigen::Index>(labels.size()), "group_labels");
  }
  require_count(i_count, s.memberships.rows(), "C (rows)");
  require_count(k_count, s.memberships.cols(), "C (columns)");
  require_count(i_count, s.calibers.size(), "A");
  require_count(k_count, s.discrimination.size(), "Theta");
  require_count(i_count, s.v_q.size(), "v_q");
  require_count(k_count, s.v_eta.size(), "v_eta");
  s.validate();
  return s;
}

CorrelatedScenario read_correlated(const json& j) {
  const std::string p = "correlated";
  expect_object(j, p, {"Sigma_q", "A", "agent", "a_tilde_i"}, {"I"});
  CorrelatedScenario cs;
  cs.sigma_q = read_matrix(j["Sigma_q"], child(p, "Sigma_q"));
  cs.calibers = read_vector(j["A"], child(p, "A"));
  cs.agent = read_index(j["agent"], child(p, "agent"));
  cs.a_tilde = read_number(j["a_tilde_i"], child(p, "a_tilde_i"));
  if (j.contains("I")) require_count(static_cast<Eigen::Index>(read_integer(j["I"], child(p, "I"))), cs.calibers.size(), "A");
  cs.validate();
  return cs;
}

ContactScenario read_contact(const json& j) {
  const std::string p = "contact";
  expect_object(j, p, {"c", "v_q", "v_a", "v_eta", "A", "Theta", "agent", "a_tilde_i"}, {"I"});
  ContactScenario ks;
  ks.signs = read_int_vector(j["c"], child(p, "c"));
  ks.v_q = read_number(j["v_q"], child(p, "v_q"));
  ks.v_a = read_number(j["v_a"], child(p, "v_a"));
  ks.v_eta = read_number(j["v_eta"], child(p, "v_eta"));
  ks.calibers = read_vector(j["A"], child(p, "A"));
  ks.discrimination = read_number(j["Theta"], child(p, "Theta"));
  ks.agent = read_index(j["agent"], child(p, "agent"));
  ks.a_tilde = read_number(j["a_tilde_i"], child(p, "a_tilde_i"));
  if (j.contains("I")) require_count(static_cast<Eigen::Index>(read_integer(j["I"], child(p, "I"))), ks.calibers.size(), "A");
  ks.validate();
  return ks;
}

RawScenario read_raw(const json& j) {
  const std::string p = "raw";
  expect_object(j, p, {"M", "Sigma", "f", "constraint"});
  Matrix design = read_matrix(j["M"], child(p, "M"));
  Matrix sigma = read_matrix(j["Sigma"], child(p, "Sigma"));
  Vector f = read_vector(j["f"], child(p, "f"));

  const json& cj = j["constraint"];
  const std::string cp = child(p, "constraint");
  expect_object(cj, cp, {"pin", "covariance"}, {"index", "value", "vector", "sigma"});
  const std::string pin = read_string(cj["pin"], child(cp, "pin"));
  const std::string cov = read_string(cj["covariance"], child(cp, "covariance"));
  if (pin != "one" && pin != "all") parse_fail(child(cp, "pin"), "expected \"one\" or \"all\"");
  if (cov != "free" && cov != "fixed") parse_fail(child(cp, "covariance"), "expected \"free\" or \"fixed\"");
  const PinMode pin_mode = pin == "one" ? PinMode::PinOne : PinMode::PinAll;
  const CovarianceMode cov_mode = cov == "free" ? CovarianceMode::Free : CovarianceMode::Fixed;

  Eigen::Index index = 0;
  double value = 0.0;
  Vector vector;
  Matrix fixed;
  if (pin_mode == PinMode::PinOne) {
    if (!cj.contains("index")) parse_fail(child(cp, "index"), "missing required field for pin \"one\"");
    if (!cj.contains("value")) parse_fail(child(cp, "value"), "missing required field for pin \"one\"");
    index = read_index(cj["index"], child(cp, "index"));
    value = read_number(cj["value"], child(cp, "value"));
  } else {
    if (!cj.contains("vector")) parse_fail(child(cp, "vector"), "missing required field for pin \"all\"");
    vector = read_vector(cj["vector"], child(cp, "vector"));
  }
  if (cov_mode == CovarianceMode::Fixed) {
    if (!cj.contains("sigma")) parse_fail(child(cp, "sigma"), "missing required field for covariance \"fixed\"");
    fixed = read_matrix(cj["sigma"], child(cp, "sigma"));
  }

  LinearGaussianModel model(std::move(design), std::move(sigma));
  check_fundamentals(model, f);
  DogmaticConstraint constraint =
      DogmaticConstraint::make(pin_mode, cov_mode, index, value, std::move(vector), std::move(fixed));
  constraint.check_against(model);
  return RawScenario{std::move(model), std::move(f), std::move(constraint)};
}

RicherObservationScenario read_example1(const json& j) {
  const std::string p = "example1";
  expect_object(j, p, {"v_q_o", "v_a_o", "Delta"});
  RicherObservationScenario e;
  e.v_q_out = read_number(j["v_q_o"], child(p, "v_q_o"));
  e.v_a_out = read_number(j["v_a_o"], child(p, "v_a_o"));
  e.overconfidence = read_number(j["Delta"], child(p, "Delta"));
  example1_model(e.v_q_out, e.v_a_out);  // validates the variances
  return e;
}

MultiAttributeScenario read_example2(const json& j) {
  const std::string p = "example2";
  expect_object(j, p, {"v_q1", "v_eta1", "Delta1"}, {"a1", "a2", "m1", "m2", "theta1"});
  MultiAttributeScenario ms;
  auto opt = [&](const char* key) { return j.contains(key) ? read_number(j[key], child(p, key)) : 0.0; };
  ms.talent_self = opt("a1");
  ms.talent_other = opt("a2");
  ms.morality_self = opt("m1");
  ms.morality_other = opt("m2");
  ms.discrimination = opt("theta1");
  ms.v_q_self = read_number(j["v_q1"], child(p, "v_q1"));
  ms.v_eta = read_number(j["v_eta1"], child(p, "v_eta1"));
  ms.overconfidence = read_number(j["Delta1"], child(p, "Delta1"));
  ms.validate();
  return ms;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    std::string what = e.what();
    // drop nlohmann's "[json.exception.parse_error.101] " prefix
    if (const auto pos = what.find("] "); pos != std::string::npos) what = what.substr(pos + 2);
    // and its own position prefix, which we restate with a column it gets right
    if (const auto pos = what.find(": "); what.rfind("parse error", 0) == 0 && pos != std::string::npos)
      what = what.substr(pos + 2);
    fail(ErrorKind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
  }

  static const char* const kKinds[] = {"society", "correlated", "contact", "raw", "example1", "example2"};
  expect_object(doc, "", {"schema_version", "meta"},
                {"society", "correlated", "contact", "raw", "example1", "example2"});
  ScenarioFile file;
  file.digest = fnv1a64_hex(text);
  file.schema_version = static_cast<int>(read_integer(doc["schema_version"], "schema_version"));
  if (file.schema_version != kSchemaVersion)
    parse_fail("schema_version", "unsupported version " + std::to_string(file.schema_version) + " (expected " +
                                     std::to_string(kSchemaVersion) + ")");
  const json& meta = doc["meta"];
  expect_object(meta, "meta", {"name"}, {"seed"});
  file.name = read_string(meta["name"], "meta.name");
  if (meta.contains("seed")) {
    if (!meta["seed"].is_number_unsigned()) parse_fail("meta.seed", "expected a non-negative integer");
    file.seed = meta["seed"].get<std::uint64_t>();
  }

  std::vector<std::string> present;
  for (const char* kind : kKinds)
    if (doc.contains(kind)) present.emplace_back(kind);
  if (present.size() != 1)
    parse_fail("<root>", "expected exactly one scenario section (society, correlated, contact, raw, example1, "
                         "example2), found " + std::to_string(present.size()));
  const std::string& kind = present.front();
  const json& body = doc[kind];
  if (kind == "society") {
    file.kind = ScenarioKind::Society;
    file.society = read_society(body, file.group_labels);
  } else if (kind == "correlated") {
    file.kind = ScenarioKind::Correlated;
    file.correlated = read_correlated(body);
  } else if (kind == "contact") {
    file.kind = ScenarioKind::Contact;
    file.contact = read_contact(body);
  } else if (kind == "raw") {
    file.kind = ScenarioKind::Raw;
    file.raw = read_raw(body);
  } else if (kind == "example1") {
    file.kind = ScenarioKind::Example1;
    file.example1 = read_example1(body);
  } else {
    file.kind = ScenarioKind::Example2;
    file.example2 = read_example2(body);
  }
  return file;
}

ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Parse, "cannot read scenario file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

namespace {

ordered_json vector_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

ordered_json header(std::string_view name, std::uint64_t seed) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["meta"] = {{"name", std::string(name)}, {"seed", seed}};
  return doc;
}

}  // namespace

ordered_json scenario_to_json(const Scenario& s, std::string_view name, std::uint64_t seed) {
  ordered_json doc = header(name, seed);
  ordered_json c = ordered_json::array();
  for (Eigen::Index j = 0; j < s.individuals(); ++j) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < s.groups(); ++k) row.push_back(s.memberships(j, k));
    c.push_back(row);
  }
  doc["society"] = {{"I", s.individuals()},      {"K", s.groups()},     {"C", c},
                    {"A", vector_json(s.calibers)}, {"Theta", vector_json(s.discrimination)},
                    {"v_q", vector_json(s.v_q)},  {"v_eta", vector_json(s.v_eta)},
                    {"agent", s.agent + 1},       {"a_tilde_i", s.a_tilde}};
  return doc;
}

ordered_json raw_to_json(const LinearGaussianModel& model, const Vector& f, const DogmaticConstraint& c,
                         std::string_view name, std::uint64_t seed) {
  ordered_json doc = header(name, seed);
  ordered_json constraint;
  constraint["pin"] = c.pin_mode() == PinMode::PinOne ? "one" : "all";
  constraint["covariance"] = c.covariance_mode() == CovarianceMode::Free ? "free" : "fixed";
  if (c.pin_mode() == PinMode::PinOne) {
    constraint["index"] = c.pinned_index() + 1;
    constraint["value"] = c.pinned_value();
  } else {
    constraint["vector"] = vector_json(c.pinned_vector());
  }
  if (c.covariance_mode() == CovarianceMode::Fixed) constraint["sigma"] = matrix_json(c.fixed_sigma());
  doc["raw"] = {{"M", matrix_json(model.design())},
                {"Sigma", matrix_json(model.sigma())},
                {"f", vector_json(f)},
                {"constraint", constraint}};
  return doc;
}

ordered_json correlated_to_json(const CorrelatedScenario& cs, std::string_view name, std::uint64_t seed) {
  ordered_json doc = header(name, seed);
  doc["correlated"] = {{"Sigma_q", matrix_json(cs.sigma_q)},
                       {"A", vector_json(cs.calibers)},
                       {"agent", cs.agent + 1},
                       {"a_tilde_i", cs.a_tilde}};
  return doc;
}

ordered_json contact_to_json(const ContactScenario& ks, std::string_view name, std::uint64_t seed) {
  ordered_json doc = header(name, seed);
  ordered_json signs = ordered_json::array();
  for (Eigen::Index j = 0; j < ks.signs.size(); ++j) signs.push_back(ks.signs(j));
  doc["contact"] = {{"c", signs},
                    {"v_q", ks.v_q},
                    {"v_a", ks.v_a},
                    {"v_eta", ks.v_eta},
                    {"A", vector_json(ks.calibers)},
                    {"Theta", ks.discrimination},
                    {"agent", ks.agent + 1},
                    {"a_tilde_i", ks.a_tilde}};
  return doc;
}

}  // namespace misbelief
