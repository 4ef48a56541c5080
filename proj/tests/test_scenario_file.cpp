#include "misbelief/errors.hpp"
#include "misbelief/instances.hpp"
#include "misbelief/scenario_file.hpp"

#include <doctest.h>

#include <filesystem>

using namespace misbelief;

namespace {

ErrorKind kind_of(auto&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Parse;
}

std::string message_of(auto&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const std::filesystem::path kFixtures = MISBELIEF_FIXTURES;

}  // namespace

TEST_CASE("fnv digest reference values") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("every bundled fixture loads") {
  for (const auto& entry : std::filesystem::directory_iterator(kFixtures)) {
    if (entry.path().extension() != ".json") continue;
    const ScenarioFile f = load_scenario_file(entry.path().string());
    CHECK(f.schema_version == kSchemaVersion);
    CHECK(f.digest.size() == 16);
    CHECK_FALSE(f.name.empty());
  }
}

TEST_CASE("society fixture contents use one-based files and zero-based memory") {
  const ScenarioFile f = load_scenario_file((kFixtures / "two_groups.json").string());
  REQUIRE(f.kind == ScenarioKind::Society);
  CHECK(f.society->agent == 0);
  CHECK(f.society->memberships(1, 0) == -1);
  CHECK(f.group_label(0) == "majority");
  CHECK(f.group_label(1) == "group2");
  CHECK(f.seed == 11);
}

TEST_CASE("corrupted fixtures map onto error kinds") {
  const auto load = [](const char* name) {
    return [name] { load_scenario_file((kFixtures / "corrupted" / name).string()); };
  };
  CHECK(kind_of(load("bad_syntax.json")) == ErrorKind::Parse);
  CHECK(message_of(load("bad_syntax.json")).find("line 4, column") != std::string::npos);
  CHECK(kind_of(load("empty.json")) == ErrorKind::Parse);
  CHECK(kind_of(load("missing_field.json")) == ErrorKind::Parse);
  CHECK(message_of(load("missing_field.json")).find("society.v_eta") != std::string::npos);
  CHECK(kind_of(load("unknown_key.json")) == ErrorKind::Parse);
  CHECK(kind_of(load("wrong_schema.json")) == ErrorKind::Parse);
  CHECK(kind_of(load("two_kinds.json")) == ErrorKind::Parse);
  CHECK(kind_of(load("sigma_not_pd.json")) == ErrorKind::InvalidModel);
  CHECK(kind_of(load("rank_deficient.json")) == ErrorKind::InvalidModel);
  CHECK(kind_of(load("negative_variance.json")) == ErrorKind::InvalidScenario);
  CHECK(kind_of(load("bad_membership.json")) == ErrorKind::InvalidScenario);
  CHECK(kind_of(load("dimension_mismatch.json")) == ErrorKind::InvalidScenario);
  CHECK(kind_of([] { load_scenario_file("/nonexistent/file.json"); }) == ErrorKind::Parse);
}

TEST_CASE("type errors name the field") {
  const std::string doc = R"({"schema_version": 1, "meta": {"name": "x"},
    "example1": {"v_q_o": "one", "v_a_o": 1, "Delta": 1}})";
  CHECK(kind_of([&] { parse_scenario(doc); }) == ErrorKind::Parse);
  CHECK(message_of([&] { parse_scenario(doc); }).find("example1.v_q_o") != std::string::npos);
}

TEST_CASE("serializers round trip") {
  CounterRng rng(2);
  for (int n = 0; n < 30; ++n) {
    const Scenario s = random_scenario(rng);
    const ScenarioFile f = parse_scenario(scenario_to_json(s, "round", 5).dump());
    CHECK(f.society->memberships == s.memberships);
    CHECK(f.society->calibers == s.calibers);
    CHECK(f.society->v_eta == s.v_eta);
    CHECK(f.society->agent == s.agent);
    CHECK(f.society->a_tilde == s.a_tilde);
    CHECK(f.seed == 5);

    const CorrelatedScenario cs = random_correlated_scenario(rng);
    const ScenarioFile g = parse_scenario(correlated_to_json(cs).dump());
    CHECK(g.correlated->sigma_q == cs.sigma_q);
    CHECK(g.correlated->agent == cs.agent);

    const RandomInstance inst = random_instance(3, static_cast<std::uint64_t>(n));
    for (const DogmaticConstraint& c : {inst.case1(), inst.case2(), inst.case3()}) {
      const ScenarioFile h = parse_scenario(raw_to_json(inst.model, inst.true_f, c).dump());
      CHECK(h.raw->model.design() == inst.model.design());
      CHECK(h.raw->model.sigma() == inst.model.sigma());
      CHECK(h.raw->constraint.limit_case() == c.limit_case());
    }
  }
  ContactScenario ks;
  ks.signs = MembershipVector(3);
  ks.signs << 1, -1, 1;
  ks.calibers = Vector::Zero(3);
  ks.agent = 2;
  ks.a_tilde = 0.5;
  const ScenarioFile k = parse_scenario(contact_to_json(ks).dump());
  CHECK(k.contact->signs == ks.signs);
  CHECK(k.contact->agent == 2);
}
