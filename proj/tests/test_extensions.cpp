#include "misbelief/errors.hpp"
#include "misbelief/extensions.hpp"
#include "misbelief/instances.hpp"
#include "misbelief/verify.hpp"

#include <doctest.h>

using namespace misbelief;

TEST_CASE("correlated errors worked values") {
  CorrelatedScenario cs;
  cs.sigma_q = Matrix(2, 2);
  cs.sigma_q << 1, 0.5, 0.5, 1;
  cs.calibers = Vector::Zero(2);
  cs.agent = 0;
  cs.a_tilde = 1.0;
  const CorrelatedReport r = correlated_biases(cs);
  CHECK(r.caliber_bias(0) == 1.0);
  CHECK(r.caliber_bias(1) == doctest::Approx(0.5));
  Matrix expected(2, 2);
  expected << 1, 0.5, 0.5, 0.25;
  CHECK((r.sigma_bias - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(r.tags[1] == GroupTag::InGroup);

  cs.sigma_q(0, 1) = cs.sigma_q(1, 0) = 0.0;
  const CorrelatedReport diag = correlated_biases(cs);
  CHECK(diag.caliber_bias(1) == 0.0);
  CHECK(diag.tags[1] == GroupTag::Neutral);
  CHECK(diag.sigma_bias(0, 0) == 1.0);
  CHECK(diag.sigma_bias.cwiseAbs().sum() == 1.0);
}

TEST_CASE("correlated closed form matches the general solver and keeps relative covariances") {
  CounterRng rng(14);
  for (int n = 0; n < 100; ++n) {
    const CorrelatedScenario cs = random_correlated_scenario(rng);
    const CorrelatedReport a = correlated_biases(cs);
    const CorrelatedReport b = correlated_biases_via_theorem(cs);
    CHECK(relative_error(a.caliber_bias, b.caliber_bias) <= 1e-10);
    CHECK(relative_error(a.sigma_bias, b.sigma_bias) <= 1e-10);
    const Matrix learned = cs.sigma_q + a.sigma_bias;
    const auto i = cs.agent;
    for (Eigen::Index j = 0; j < cs.individuals(); ++j)
      CHECK(std::abs(learned(i, j) / learned(i, i) - cs.sigma_q(i, j) / cs.sigma_q(i, i)) <= 1e-10);
  }
}

TEST_CASE("correlated society is additive") {
  CounterRng rng(15);
  for (int n = 0; n < 50; ++n) {
    const Scenario s = random_scenario(rng);
    const Matrix sigma_q = random_spd(rng, s.individuals());
    const CorrelatedSocietyReport r = correlated_society_biases(s, sigma_q);
    CHECK(relative_error(r.biases.caliber_bias, r.additive_prediction) <= 1e-9);
  }
}

TEST_CASE("personal contact worked values") {
  ContactScenario ks;
  ks.signs = MembershipVector(2);
  ks.signs << 1, -1;
  ks.calibers = Vector::Zero(2);
  ks.agent = 0;
  ks.a_tilde = 1.0;
  const ContactReport r = contact_biases(ks);
  CHECK(r.theta_bias == doctest::Approx(-0.4));
  CHECK(r.caliber_bias(1) == doctest::Approx(-0.2));
  const ContactReport t = contact_biases_via_theorem(ks.signs, Vector::Ones(2), 1.0, Vector::Ones(2), 0, 1.0);
  CHECK(t.theta_bias == doctest::Approx(-0.4));
  CHECK(t.caliber_bias(1) == doctest::Approx(-0.2));

  ks.v_a = 1e-12;
  CHECK(std::abs(contact_biases(ks).caliber_bias(1)) < 1e-10);
}

TEST_CASE("more people lowers contact biases") {
  ContactScenario ks;
  ks.agent = 0;
  ks.a_tilde = 1.0;
  double last_theta = 1e9;
  for (Eigen::Index n = 2; n <= 8; ++n) {
    ks.signs = MembershipVector::Ones(n);
    ks.signs(1) = -1;
    ks.calibers = Vector::Zero(n);
    const ContactReport r = contact_biases(ks);
    CHECK(std::abs(r.theta_bias) < last_theta);
    last_theta = std::abs(r.theta_bias);
  }
}

TEST_CASE("gram identity for sign vectors") {
  CounterRng rng(16);
  for (int n = 0; n < 100; ++n)
    CHECK(contact_gram_identity_holds(random_signs(rng, static_cast<Eigen::Index>(rng.integer(1, 12)))));
  MembershipVector with_zero(3);
  with_zero << 1, 0, -1;
  CHECK_FALSE(contact_gram_identity_holds(with_zero));
}

TEST_CASE("richer observations") {
  const RicherObservationRatios unit = example1_biases(1, 1);
  CHECK(unit.competitor_first == doctest::Approx(-1.0 / 7.0));
  CHECK(unit.competitor_second == doctest::Approx(-1.0 / 7.0));
  CHECK(unit.discrimination == doctest::Approx(-2.0 / 7.0));
  const RicherObservationRatios via = example1_via_theorem(1, 1);
  CHECK(via.competitor_first == doctest::Approx(-1.0 / 7.0));
  CHECK(via.discrimination == doctest::Approx(-2.0 / 7.0));
  CHECK(example1_model(1, 1).signal_dim() == 9);
  CHECK(example1_model(1, 1).fundamental_dim() == 5);

  const RicherObservationRatios clear = example1_biases(1.5, 1e-12);
  CHECK(std::abs(clear.competitor_first) < 1e-11);
  CHECK(clear.discrimination == doctest::Approx(-2.0 * 1.5 / (5.0 * 1.5 + 4.0)));

  const RicherObservationRatios sharper = example1_biases(0.5, 1);
  CHECK(std::abs(sharper.competitor_first) > std::abs(unit.competitor_first));
  CHECK(std::abs(sharper.discrimination) < std::abs(unit.discrimination));
}

TEST_CASE("multi-attribute example") {
  MultiAttributeScenario ms;
  ms.overconfidence = 1.0;
  const MultiAttributeReport r = example2_biases(ms);
  CHECK(r.talent_other == doctest::Approx(0.5));
  CHECK(r.morality_other == doctest::Approx(-1.0));
  CHECK(r.discrimination == doctest::Approx(-0.5));
  const MultiAttributeReport t = example2_via_theorem(ms);
  CHECK(t.talent_other == doctest::Approx(0.5));
  CHECK(t.morality_other == doctest::Approx(-1.0));
  CHECK(t.discrimination == doctest::Approx(-0.5));

  ms.overconfidence = 0.0;
  const MultiAttributeReport zero = example2_biases(ms);
  CHECK(zero.talent_other == 0.0);
  CHECK(zero.morality_other == 0.0);
  CHECK(zero.discrimination == 0.0);

  ms.v_eta = -1.0;
  CHECK_THROWS_AS(ms.validate(), Error);
}
