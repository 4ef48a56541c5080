#pragma once

#include "misbelief/extensions.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace misbelief {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { Society, Correlated, Contact, Raw, Example1, Example2 };

std::string_view to_string(ScenarioKind kind) noexcept;

/// A signal model with its true fundamentals and the learner's constraint.
struct RawScenario {
  LinearGaussianModel model;
  Vector fundamentals;
  DogmaticConstraint constraint;
};

struct RicherObservationScenario {
  double v_q_out = 1.0;
  double v_a_out = 1.0;
  double overconfidence = 1.0;
};

/// A parsed scenario document. Exactly one of the optionals is set, matching
/// `kind`. Individual and group indices are one-based in files and zero-based
/// here.
struct ScenarioFile {
  int schema_version = kSchemaVersion;
  std::string name;
  std::uint64_t seed = 0;
  ScenarioKind kind = ScenarioKind::Society;
  std::vector<std::string> group_labels;  // society only, may be empty
  std::string digest;                     // fnv1a64 of the input bytes, hex

  std::optional<Scenario> society;
  std::optional<CorrelatedScenario> correlated;
  std::optional<ContactScenario> contact;
  std::optional<RawScenario> raw;
  std::optional<RicherObservationScenario> example1;
  std::optional<MultiAttributeScenario> example2;

  /// Label for group k: the file's label when given, otherwise "group<k+1>".
  std::string group_label(Eigen::Index k) const;
};

/// FNV-1a 64-bit digest of bytes, as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// Parses a scenario document. Syntax and structure problems (bad JSON,
/// missing or mistyped fields, unknown keys) throw ErrorKind::Parse with a
/// line/column or field path; well-formed documents describing an invalid
/// model throw the model's own error kind (InvalidScenario, InvalidModel, ...).
ScenarioFile parse_scenario(std::string_view text);

/// Reads and parses a file; unreadable files are Parse errors.
ScenarioFile load_scenario_file(const std::string& path);

/// Documents that parse_scenario accepts and that reproduce the input.
nlohmann::ordered_json scenario_to_json(const Scenario& s, std::string_view name = "scenario", std::uint64_t seed = 0);
nlohmann::ordered_json raw_to_json(const LinearGaussianModel& model, const Vector& f, const DogmaticConstraint& c,
                                   std::string_view name = "instance", std::uint64_t seed = 0);
nlohmann::ordered_json correlated_to_json(const CorrelatedScenario& cs, std::string_view name = "scenario",
                                          std::uint64_t seed = 0);
nlohmann::ordered_json contact_to_json(const ContactScenario& ks, std::string_view name = "scenario",
                                       std::uint64_t seed = 0);

}  // namespace misbelief
