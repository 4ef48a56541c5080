#include "misbelief/extensions.hpp"

#include "misbelief/errors.hpp"

#include <cmath>

namespace misbelief {

void CorrelatedScenario::validate() const {
  const auto n = individuals();
  require(n >= 1, ErrorKind::InvalidScenario, "need at least one individual");
  require(sigma_q.rows() == n && sigma_q.cols() == n, ErrorKind::InvalidScenario, "Sigma_q must be I x I");
  require(all_finite(sigma_q) && is_positive_definite(sigma_q), ErrorKind::InvalidScenario,
          "Sigma_q must be symmetric positive definite");
  require(calibers.allFinite(), ErrorKind::InvalidScenario, "calibers must be finite");
  require(agent >= 0 && agent < n, ErrorKind::InvalidScenario, "agent index out of range");
  require(std::isfinite(a_tilde) && std::isfinite(overconfidence()), ErrorKind::InvalidScenario,
          "overconfidence must be finite");
}

std::string_view to_string(GroupTag tag) noexcept {
  switch (tag) {
    case GroupTag::InGroup: return "in-group";
    case GroupTag::OutGroup: return "out-group";
    case GroupTag::Neutral: return "neutral";
  }
  return "neutral";
}

namespace {

std::vector<GroupTag> covariance_tags(const CorrelatedScenario& cs) {
  std::vector<GroupTag> tags;
  for (Eigen::Index j = 0; j < cs.individuals(); ++j) {
    const double cov = cs.sigma_q(cs.agent, j);
    tags.push_back(cov > kClassificationTol ? GroupTag::InGroup
                   : cov < -kClassificationTol ? GroupTag::OutGroup
                                               : GroupTag::Neutral);
  }
  return tags;
}

}  // namespace

CorrelatedReport correlated_biases(const CorrelatedScenario& cs) {
  cs.validate();
  const auto i = cs.agent;
  CorrelatedReport report;
  report.caliber_bias = cs.sigma_q.row(i).transpose() / cs.sigma_q(i, i) * cs.overconfidence();
  report.caliber_bias(i) = cs.overconfidence();
  report.sigma_bias = report.caliber_bias * report.caliber_bias.transpose();
  report.tags = covariance_tags(cs);
  return report;
}

CorrelatedReport correlated_biases_via_theorem(const CorrelatedScenario& cs) {
  cs.validate();
  const auto n = cs.individuals();
  const LinearGaussianModel model(Matrix::Identity(n, n), cs.sigma_q);
  const LimitBelief belief = solve_case3(model, cs.calibers, DogmaticConstraint::case3(cs.agent, cs.a_tilde));
  CorrelatedReport report;
  report.caliber_bias = belief.f_tilde - cs.calibers;
  report.sigma_bias = belief.sigma_tilde - cs.sigma_q;
  report.tags = covariance_tags(cs);
  return report;
}

SocietyModel build_correlated_society_model(const Scenario& s, const Matrix& sigma_q) {
  s.validate();
  const auto i_count = s.individuals();
  const auto k_count = s.groups();
  require(sigma_q.rows() == i_count && sigma_q.cols() == i_count, ErrorKind::InvalidScenario,
          "Sigma_q must be I x I");
  SocietyModel base = build_model(s);
  Matrix sigma = Matrix::Zero(i_count + k_count, i_count + k_count);
  sigma.topLeftCorner(i_count, i_count) = sigma_q;
  sigma.bottomRightCorner(k_count, k_count) = s.v_eta.asDiagonal();
  return SocietyModel{base.model.with_sigma(std::move(sigma)), std::move(base.fundamentals),
                      std::move(base.constraint)};
}

CorrelatedSocietyReport correlated_society_biases(const Scenario& s, const Matrix& sigma_q) {
  const SocietyModel sm = build_correlated_society_model(s, sigma_q);
  const LimitBelief belief = solve_case3(sm.model, sm.fundamentals, sm.constraint);
  const Vector delta = belief.f_tilde - sm.fundamentals;

  CorrelatedSocietyReport out;
  out.biases.caliber_bias = delta.head(s.individuals());
  out.biases.theta_bias = delta.tail(s.groups());
  out.biases.sigma_bias = belief.sigma_tilde - sm.model.sigma();
  for (Eigen::Index j = 0; j < s.individuals(); ++j) {
    const double b = out.biases.caliber_bias(j);
    out.biases.classifications.push_back(b > kClassificationTol    ? BiasTag::InGroupFavoritism
                                         : b < -kClassificationTol ? BiasTag::OutGroupDerogation
                                                                   : BiasTag::Unbiased);
  }

  const auto i = s.agent;
  const Vector c_agent = s.memberships.row(i).cast<double>().transpose();
  const double denominator = sigma_q(i, i) + c_agent.array().square().matrix().dot(s.v_eta);
  out.additive_prediction.resize(s.individuals());
  for (Eigen::Index j = 0; j < s.individuals(); ++j) {
    const Vector c_j = s.memberships.row(j).cast<double>().transpose();
    const double shared = (c_agent.array() * c_j.array() * s.v_eta.array()).sum();
    out.additive_prediction(j) = (sigma_q(i, j) + shared) / denominator * s.overconfidence();
  }
  return out;
}

void ContactScenario::validate() const {
  const auto n = individuals();
  require(n >= 1, ErrorKind::InvalidScenario, "need at least one individual");
  require(signs.size() == n, ErrorKind::InvalidScenario, "signs must have length I");
  for (Eigen::Index j = 0; j < n; ++j)
    require(signs(j) == 1 || signs(j) == -1, ErrorKind::InvalidScenario,
            "contact signs must be +1 or -1 (entry " + std::to_string(j) + ")");
  for (double v : {v_q, v_a, v_eta})
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidScenario, "variances must be positive");
  require(calibers.allFinite() && std::isfinite(discrimination), ErrorKind::InvalidScenario,
          "fundamentals must be finite");
  require(agent >= 0 && agent < n, ErrorKind::InvalidScenario, "agent index out of range");
  require(std::isfinite(a_tilde) && std::isfinite(overconfidence()), ErrorKind::InvalidScenario,
          "overconfidence must be finite");
}

ContactReport contact_biases(const ContactScenario& ks) {
  ks.validate();
  const double n = static_cast<double>(ks.individuals());
  const double denominator = (ks.v_q + ks.v_eta) * (ks.v_q + ks.v_a) + (n - 1.0) * ks.v_q * ks.v_eta;
  const double ci = ks.signs(ks.agent);
  const double delta = ks.overconfidence();
  ContactReport report;
  report.theta_bias = -ks.v_eta * (ks.v_q + ks.v_a) * ci / denominator * delta;
  report.caliber_bias = (ks.v_eta * ks.v_a * ci / denominator * delta) * ks.signs.cast<double>();
  report.caliber_bias(ks.agent) = delta;
  return report;
}

LinearGaussianModel contact_model(const MembershipVector& signs, const Vector& v_q, double v_eta, const Vector& v_a) {
  const auto n = signs.size();
  require(n >= 1 && v_q.size() == n && v_a.size() == n, ErrorKind::InvalidScenario,
          "signs and variance vectors must share length I");
  require((v_q.array() > 0.0).all() && (v_a.array() > 0.0).all() && v_eta > 0.0, ErrorKind::InvalidScenario,
          "variances must be positive");
  Matrix design = Matrix::Zero(2 * n + 1, n + 1);
  design.topLeftCorner(n, n).setIdentity();
  design.block(0, n, n, 1) = signs.cast<double>();
  design(n, n) = 1.0;
  design.bottomLeftCorner(n, n).setIdentity();
  Vector variances(2 * n + 1);
  variances << v_q, v_eta, v_a;
  return LinearGaussianModel(std::move(design), variances.asDiagonal().toDenseMatrix());
}

ContactReport contact_biases_via_theorem(const MembershipVector& signs, const Vector& v_q, double v_eta,
                                         const Vector& v_a, Eigen::Index agent, double overconfidence) {
  const LinearGaussianModel model = contact_model(signs, v_q, v_eta, v_a);
  require(agent >= 0 && agent < signs.size(), ErrorKind::InvalidScenario, "agent index out of range");
  const Vector truth = Vector::Zero(model.fundamental_dim());
  const LimitBelief belief = solve_case3(model, truth, DogmaticConstraint::case3(agent, overconfidence));
  ContactReport report;
  report.caliber_bias = belief.f_tilde.head(signs.size());
  report.theta_bias = belief.f_tilde(signs.size());
  return report;
}

bool contact_gram_identity_holds(const MembershipVector& signs) {
  const Eigen::MatrixXi c = signs;
  const Eigen::MatrixXi gram = c * c.transpose();
  return gram * gram == static_cast<int>(signs.size()) * gram;
}

RicherObservationRatios example1_biases(double v_q_out, double v_a_out) {
  require(std::isfinite(v_q_out) && v_q_out > 0.0 && std::isfinite(v_a_out) && v_a_out > 0.0,
          ErrorKind::InvalidScenario, "out-group variances must be positive");
  const double denominator = 5.0 * v_q_out + 5.0 * v_a_out + 4.0;
  RicherObservationRatios r;
  r.competitor_first = -2.0 * v_a_out / denominator;
  r.competitor_second = r.competitor_first;
  r.discrimination = -2.0 * (v_q_out + v_a_out) / denominator;
  return r;
}

LinearGaussianModel example1_model(double v_q_out, double v_a_out) {
  require(std::isfinite(v_q_out) && v_q_out > 0.0 && std::isfinite(v_a_out) && v_a_out > 0.0,
          ErrorKind::InvalidScenario, "out-group variances must be positive");
  MembershipVector signs(4);
  signs << 1, 1, -1, -1;
  Vector v_q(4), v_a(4);
  v_q << 1.0, 1.0, v_q_out, v_q_out;
  v_a << 1.0, 1.0, v_a_out, v_a_out;
  return contact_model(signs, v_q, 1.0, v_a);
}

RicherObservationRatios example1_via_theorem(double v_q_out, double v_a_out) {
  const LinearGaussianModel model = example1_model(v_q_out, v_a_out);
  const Vector ratios = bias_ratios(model.design(), model.sigma(), 0);
  return RicherObservationRatios{ratios(2), ratios(3), ratios(4)};
}

void MultiAttributeScenario::validate() const {
  for (double x : {talent_self, talent_other, morality_self, morality_other, discrimination, overconfidence})
    require(std::isfinite(x), ErrorKind::InvalidScenario, "attributes must be finite");
  require(std::isfinite(v_q_self) && v_q_self > 0.0 && std::isfinite(v_eta) && v_eta > 0.0,
          ErrorKind::InvalidScenario, "variances must be positive");
}

MultiAttributeReport example2_biases(const MultiAttributeScenario& ms) {
  ms.validate();
  const double scale = ms.overconfidence / (1.0 + ms.v_q_self / ms.v_eta);
  return MultiAttributeReport{scale, -2.0 * scale, -scale};
}

SocietyModel example2_model(const MultiAttributeScenario& ms) {
  ms.validate();
  Matrix design(4, 4);
  design << 1, 0, 1, 0,
            0, 1, -1, 0,
            0, 1, 0, 1,
            0, 0, 1, 0;
  Vector variances(4);
  variances << ms.v_q_self, 1.0, 1.0, ms.v_eta;
  Vector truth(4);
  truth << ms.talent_self + ms.morality_self, ms.talent_other + ms.morality_other, ms.discrimination,
      ms.talent_other;
  const double pinned = truth(0) + ms.overconfidence;
  return SocietyModel{LinearGaussianModel(std::move(design), variances.asDiagonal().toDenseMatrix()),
                      std::move(truth), DogmaticConstraint::case3(0, pinned)};
}

MultiAttributeReport example2_via_theorem(const MultiAttributeScenario& ms) {
  const SocietyModel sm = example2_model(ms);
  const Vector delta = solve_case3(sm.model, sm.fundamentals, sm.constraint).f_tilde - sm.fundamentals;
  // morality = composite - talent
  return MultiAttributeReport{delta(3), delta(1) - delta(3), delta(2)};
}

}  // namespace misbelief
