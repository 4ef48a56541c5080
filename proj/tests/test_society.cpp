#include "misbelief/errors.hpp"
#include "misbelief/instances.hpp"
#include "misbelief/society.hpp"
#include "misbelief/verify.hpp"

#include <doctest.h>

using namespace misbelief;

namespace {

/// I = 2, K = 1, C = [1; -1], unit variances, agent 0 with overconfidence delta.
Scenario two_groups(double delta = 1.0) {
  Scenario s;
  s.memberships = MembershipMatrix(2, 1);
  s.memberships << 1, -1;
  s.calibers = Vector::Zero(2);
  s.discrimination = Vector::Zero(1);
  s.v_q = Vector::Ones(2);
  s.v_eta = Vector::Ones(1);
  s.agent = 0;
  s.a_tilde = delta;
  return s;
}

ErrorKind kind_of(auto&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Parse;
}

}  // namespace

TEST_CASE("model construction") {
  const SocietyModel sm = build_model(two_groups());
  Matrix expected(3, 3);
  expected << 1, 0, 1, 0, 1, -1, 0, 0, 1;
  CHECK(sm.model.design() == expected);
  CHECK(sm.model.sigma() == Matrix::Identity(3, 3));
  CHECK(sm.constraint.limit_case() == LimitCase::III);
  CHECK(sm.constraint.pinned_value() == 1.0);

  Scenario none = two_groups();
  none.memberships.resize(2, 0);
  none.discrimination.resize(0);
  none.v_eta.resize(0);
  CHECK(build_model(none).model.design() == Matrix::Identity(2, 2));

  CounterRng rng(3);
  for (int k = 0; k < 100; ++k) CHECK(build_model(random_scenario(rng)).model.design().determinant() ==
                                      doctest::Approx(1.0));
}

TEST_CASE("scenario validation") {
  Scenario s = two_groups();
  s.memberships(0, 0) = 2;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidScenario);
  s = two_groups();
  s.v_eta(0) = 0.0;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidScenario);
  s = two_groups();
  s.agent = 2;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidScenario);
  s = two_groups();
  s.calibers = Vector::Zero(3);
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::InvalidScenario);
}

TEST_CASE("two groups worked values") {
  const BiasReport r = biases_closed_form(two_groups());
  CHECK(r.theta_bias(0) == doctest::Approx(-0.5));
  CHECK(r.caliber_bias(0) == 1.0);
  CHECK(r.caliber_bias(1) == doctest::Approx(-0.5));
  CHECK(r.classifications[0] == BiasTag::InGroupFavoritism);
  CHECK(r.classifications[1] == BiasTag::OutGroupDerogation);
  const BiasReport t = biases_via_theorem(two_groups());
  CHECK(relative_error(t.caliber_bias, r.caliber_bias) < 1e-12);
  CHECK(relative_error(t.sigma_bias, r.sigma_bias) < 1e-12);
}

TEST_CASE("zero overconfidence and neutral agents") {
  const BiasReport zero = biases_closed_form(two_groups(0.0));
  CHECK(zero.theta_bias.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.caliber_bias.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.sigma_bias.cwiseAbs().maxCoeff() == 0.0);

  CounterRng rng(5);
  for (int k = 0; k < 200; ++k) {
    const Scenario s = random_neutral_scenario(rng);
    const BiasReport r = biases_closed_form(s);
    CHECK(r.theta_bias.cwiseAbs().sum() == 0.0);
    for (Eigen::Index j = 0; j < s.individuals(); ++j)
      if (j != s.agent) CHECK(r.caliber_bias(j) == 0.0);
  }
}

TEST_CASE("closed form matches the general solver") {
  CounterRng rng(6);
  for (int k = 0; k < 300; ++k) {
    const Scenario s = random_scenario(rng);
    const BiasReport a = biases_closed_form(s);
    const BiasReport b = biases_via_theorem(s);
    CHECK(a.caliber_bias(s.agent) == s.overconfidence());
    CHECK((a.caliber_bias - b.caliber_bias).cwiseAbs().maxCoeff() <= 1e-9);
    if (s.groups() > 0) CHECK((a.theta_bias - b.theta_bias).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((a.sigma_bias - b.sigma_bias).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("sign rule") {
  CounterRng rng(8);
  for (int n = 0; n < 300; ++n) {
    const Scenario s = random_scenario(rng);
    const BiasReport r = biases_closed_form(s);
    const double sd = s.overconfidence() > 0 ? 1.0 : -1.0;
    for (Eigen::Index k = 0; k < s.groups(); ++k) {
      const int c = s.memberships(s.agent, k);
      if (c != 0) CHECK(r.theta_bias(k) * sd * c < 0.0);
    }
    for (Eigen::Index j = 0; j < s.individuals(); ++j) {
      double weight = 0.0;
      for (Eigen::Index k = 0; k < s.groups(); ++k)
        weight += s.memberships(s.agent, k) * s.memberships(j, k) * s.v_eta(k);
      if (j != s.agent && std::abs(weight) > 1e-12) CHECK(r.caliber_bias(j) * weight * sd > 0.0);
    }
  }
}

TEST_CASE("adding groups") {
  const Scenario s = two_groups();
  MembershipVector joiners(2);
  joiners << 1, 1;
  const Scenario both = add_group(s, joiners, 1.0);
  CHECK(both.groups() == 2);
  CHECK(both.discrimination(1) == 0.0);
  // the worked example: the shared second group cancels the bias about the other person
  CHECK(biases_closed_form(s).caliber_bias(1) == doctest::Approx(-0.5));
  CHECK(std::abs(biases_closed_form(both).caliber_bias(1)) < 1e-15);

  MembershipVector outsiders(2);
  outsiders << 0, 1;
  const BiasReport before = biases_closed_form(s);
  const BiasReport after = biases_closed_form(add_group(s, outsiders, 2.0));
  CHECK(after.caliber_bias == before.caliber_bias);
  CHECK(after.theta_bias(0) == before.theta_bias(0));
  CHECK(after.theta_bias(1) == 0.0);

  MembershipVector bad(3);
  bad << 1, 0, 0;
  CHECK(kind_of([&] { add_group(s, bad, 1.0); }) == ErrorKind::InvalidScenario);
}

TEST_CASE("partition detection") {
  MembershipMatrix c(3, 2);
  c << 1, 0, 0, 1, 1, 0;
  std::vector<Eigen::Index> group_of;
  CHECK(is_partitional(c, &group_of));
  CHECK(group_of == std::vector<Eigen::Index>{0, 1, 0});
  // competitor relations are allowed when every member of a group shares them
  c(1, 0) = -1;
  CHECK(is_partitional(c));
  c(2, 1) = -1;
  CHECK_FALSE(is_partitional(c));
  c(2, 1) = 0;
  c(0, 1) = 1;
  CHECK_FALSE(is_partitional(c));
}

TEST_CASE("corollaries on randomized admissible scenarios") {
  CounterRng rng(9);
  for (int n = 0; n < 100; ++n) {
    const CorollaryCheck c1 = check_in_group_superiority(random_partitional_scenario(rng));
    CHECK(c1.applicable);
    CHECK(c1.passed);
    CHECK(c1.margin > kMarginTol);

    const Scenario s = random_engaged_scenario(rng);
    const std::vector<CorollaryCheck> checks = {
        check_irrelevant_group(s, random_engaged_memberships(rng, s.individuals(), s.agent), rng.uniform(0.2, 3)),
        check_competitor_group(s, 0, rng.uniform(0.2, 3)),
        check_bias_substitution(s, 0, 0.9),
        check_outsider_group(s, 2, 1.0),
    };
    for (const auto& c : checks) {
      CHECK_MESSAGE((!c.applicable || c.passed), c.name, " ", c.detail);
      if (c.applicable) CHECK(c.margin > kMarginTol);
      else CHECK_FALSE(c.reason.empty());
    }
    CHECK(corollary_checks(s).all_passed());
  }
}

TEST_CASE("corollary preconditions are reported, not thrown") {
  const CorollaryReport zero = corollary_checks(two_groups(0.0));
  for (const auto& c : zero.checks) {
    CHECK_FALSE(c.applicable);
    CHECK_FALSE(c.reason.empty());
  }
  CHECK(zero.all_passed());
}

TEST_CASE("agreement between agents") {
  // footnote case: K = 2, first agent c = (1, 1), target c = (1, -1)
  Scenario s;
  s.memberships = MembershipMatrix(4, 2);
  s.memberships << 1, 1, 1, -1, -1, -1, 1, -1;
  s.calibers = Vector::Zero(4);
  s.discrimination = Vector::Zero(2);
  s.v_q = Vector::Ones(4);
  s.v_eta = Vector::Ones(2);
  s.agent = 0;
  s.a_tilde = 1.0;
  const Scenario opposite = s.with_agent(2, 1.0);
  const Scenario mixed = s.with_agent(3, 1.0);
  const AgreementReport a = agreement_report(s, opposite);
  const AgreementReport b = agreement_report(s, mixed);
  CHECK(a.individual_agree[1]);
  CHECK_FALSE(b.individual_agree[1]);
  CHECK(a.direction_rule_holds);
  CHECK(b.direction_rule_holds);

  const AgreementReport self = agreement_report(s, s);
  CHECK(self.caliber_belief_difference.cwiseAbs().maxCoeff() == 0.0);

  const AgreementReport calm = agreement_report(s.with_agent(0, 0.0), s.with_agent(3, 0.0));
  for (bool v : calm.individual_agree) CHECK(v);

  Scenario other = s;
  other.v_q(1) = 2.0;
  CHECK(kind_of([&] { agreement_report(s, other.with_agent(1, 1.0)); }) == ErrorKind::MismatchedSocieties);
}
