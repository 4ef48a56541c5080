#include "misbelief/society.hpp"

#include "misbelief/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace misbelief {

void Scenario::validate() const {
  const auto i_count = individuals();
  const auto k_count = groups();
  require(i_count >= 1, ErrorKind::InvalidScenario, "need at least one individual");
  require(memberships.rows() == i_count && memberships.cols() == k_count, ErrorKind::InvalidScenario,
          "C must be I x K (" + std::to_string(i_count) + " x " + std::to_string(k_count) + ")");
  require(v_q.size() == i_count, ErrorKind::InvalidScenario, "v_q must have length I");
  require(v_eta.size() == k_count, ErrorKind::InvalidScenario, "v_eta must have length K");
  for (Eigen::Index j = 0; j < i_count; ++j)
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const int c = memberships(j, k);
      require(c == -1 || c == 0 || c == 1, ErrorKind::InvalidScenario,
              "C entries must be -1, 0 or 1 (row " + std::to_string(j) + ", column " + std::to_string(k) + ")");
    }
  require(calibers.allFinite() && discrimination.allFinite(), ErrorKind::InvalidScenario,
          "calibers and discrimination must be finite");
  require(v_q.allFinite() && (v_q.array() > 0.0).all(), ErrorKind::InvalidScenario, "v_q must be positive");
  require(v_eta.allFinite() && (v_eta.array() > 0.0).all(), ErrorKind::InvalidScenario, "v_eta must be positive");
  require(agent >= 0 && agent < i_count, ErrorKind::InvalidScenario, "agent index out of range");
  require(std::isfinite(a_tilde) && std::isfinite(a_tilde - calibers(agent)), ErrorKind::InvalidScenario,
          "overconfidence must be finite");
}

Scenario Scenario::with_agent(Eigen::Index new_agent, double new_a_tilde) const {
  Scenario s = *this;
  s.agent = new_agent;
  s.a_tilde = new_a_tilde;
  s.validate();
  return s;
}

std::string_view to_string(BiasTag tag) noexcept {
  switch (tag) {
    case BiasTag::InGroupFavoritism: return "in-group-favoritism";
    case BiasTag::OutGroupDerogation: return "out-group-derogation";
    case BiasTag::Unbiased: return "unbiased";
  }
  return "unbiased";
}

namespace {

Matrix design_matrix(const MembershipMatrix& c) {
  const auto i_count = c.rows();
  const auto k_count = c.cols();
  Matrix m = Matrix::Identity(i_count + k_count, i_count + k_count);
  m.topRightCorner(i_count, k_count) = c.cast<double>();
  return m;
}

std::vector<BiasTag> classify(const Vector& caliber_bias) {
  std::vector<BiasTag> tags;
  tags.reserve(static_cast<std::size_t>(caliber_bias.size()));
  for (Eigen::Index j = 0; j < caliber_bias.size(); ++j) {
    const double b = caliber_bias(j);
    tags.push_back(b > kClassificationTol    ? BiasTag::InGroupFavoritism
                   : b < -kClassificationTol ? BiasTag::OutGroupDerogation
                                             : BiasTag::Unbiased);
  }
  return tags;
}

void finish_report(const Scenario& s, BiasReport& report) {
  const auto i_count = s.individuals();
  const auto k_count = s.groups();
  Vector delta(i_count + k_count);
  delta << report.caliber_bias, report.theta_bias;
  const Vector y = design_matrix(s.memberships) * delta;
  report.sigma_bias = y * y.transpose();
  report.classifications = classify(report.caliber_bias);
}

}  // namespace

SocietyModel build_model(const Scenario& s) {
  s.validate();
  const auto i_count = s.individuals();
  const auto k_count = s.groups();
  Vector variances(i_count + k_count);
  variances << s.v_q, s.v_eta;
  Vector f(i_count + k_count);
  f << s.calibers, s.discrimination;
  return SocietyModel{LinearGaussianModel(design_matrix(s.memberships), variances.asDiagonal().toDenseMatrix()),
                      std::move(f), DogmaticConstraint::case3(s.agent, s.a_tilde)};
}

BiasReport biases_closed_form(const Scenario& s) {
  s.validate();
  const auto i = s.agent;
  const double overconfidence = s.overconfidence();
  const Vector c_agent = s.memberships.row(i).cast<double>().transpose();
  // v_q[i] + sum_k c_ik^2 v_eta[k]
  const double denominator = s.v_q(i) + c_agent.array().square().matrix().dot(s.v_eta);

  BiasReport report;
  report.theta_bias = (-c_agent.array() * s.v_eta.array() / denominator * overconfidence).matrix();
  report.caliber_bias.resize(s.individuals());
  for (Eigen::Index j = 0; j < s.individuals(); ++j) {
    const Vector c_j = s.memberships.row(j).cast<double>().transpose();
    const double shared = (c_agent.array() * c_j.array() * s.v_eta.array()).sum();
    report.caliber_bias(j) = shared / denominator * overconfidence;
  }
  report.caliber_bias(i) = overconfidence;
  finish_report(s, report);
  return report;
}

BiasReport biases_via_theorem(const Scenario& s) {
  const SocietyModel sm = build_model(s);
  const LimitBelief belief = solve_case3(sm.model, sm.fundamentals, sm.constraint);
  const Vector delta = belief.f_tilde - sm.fundamentals;
  BiasReport report;
  report.caliber_bias = delta.head(s.individuals());
  report.theta_bias = delta.tail(s.groups());
  report.sigma_bias = belief.sigma_tilde - sm.model.sigma();
  report.classifications = classify(report.caliber_bias);
  return report;
}

Scenario add_group(const Scenario& s, const MembershipVector& memberships, double v_eta_new) {
  s.validate();
  require(memberships.size() == s.individuals(), ErrorKind::InvalidScenario, "membership vector must have length I");
  require(std::isfinite(v_eta_new) && v_eta_new > 0.0, ErrorKind::InvalidScenario, "new v_eta must be positive");
  Scenario out = s;
  const auto k_count = s.groups();
  out.memberships.conservativeResize(Eigen::NoChange, k_count + 1);
  out.memberships.col(k_count) = memberships;
  out.discrimination.conservativeResize(k_count + 1);
  out.discrimination(k_count) = 0.0;
  out.v_eta.conservativeResize(k_count + 1);
  out.v_eta(k_count) = v_eta_new;
  out.validate();
  return out;
}

bool is_partitional(const MembershipMatrix& c, std::vector<Eigen::Index>* group_of) {
  const auto i_count = c.rows();
  const auto k_count = c.cols();
  if (k_count == 0) return false;
  std::vector<Eigen::Index> owner(static_cast<std::size_t>(i_count), -1);
  for (Eigen::Index j = 0; j < i_count; ++j) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      if (c(j, k) != 1) continue;
      if (owner[static_cast<std::size_t>(j)] != -1) return false;  // member of two groups
      owner[static_cast<std::size_t>(j)] = k;
    }
    if (owner[static_cast<std::size_t>(j)] == -1) return false;  // member of none
  }
  std::vector<Eigen::Index> representative(static_cast<std::size_t>(k_count), -1);
  for (Eigen::Index j = 0; j < i_count; ++j) {
    auto& rep = representative[static_cast<std::size_t>(owner[static_cast<std::size_t>(j)])];
    if (rep == -1) {
      rep = j;
    } else if (c.row(j) != c.row(rep)) {
      return false;
    }
  }
  if (std::find(representative.begin(), representative.end(), -1) != representative.end()) return false;
  if (group_of) *group_of = std::move(owner);
  return true;
}

bool CorollaryReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CorollaryCheck& c) { return !c.applicable || c.passed; });
}

namespace {

CorollaryCheck not_applicable(std::string name, std::string reason) {
  CorollaryCheck check;
  check.name = std::move(name);
  check.reason = std::move(reason);
  return check;
}

CorollaryCheck finish(std::string name, double margin, std::string detail) {
  CorollaryCheck check;
  check.name = std::move(name);
  check.applicable = true;
  check.margin = margin;
  check.passed = margin > kMarginTol;
  check.detail = std::move(detail);
  return check;
}

/// Agent's belief about the average caliber of the given members.
double believed_mean(const Scenario& s, const BiasReport& r, const std::vector<Eigen::Index>& members) {
  double total = 0.0;
  for (auto j : members) total += s.calibers(j) + r.caliber_bias(j);
  return total / static_cast<double>(members.size());
}

double true_mean(const Scenario& s, const std::vector<Eigen::Index>& members) {
  double total = 0.0;
  for (auto j : members) total += s.calibers(j);
  return total / static_cast<double>(members.size());
}

}  // namespace

CorollaryCheck check_in_group_superiority(const Scenario& s) {
  const std::string name = "in_group_superiority";
  s.validate();
  std::vector<Eigen::Index> group_of;
  if (!is_partitional(s.memberships, &group_of)) return not_applicable(name, "group structure is not partitional");
  if (!(s.overconfidence() > 0.0)) return not_applicable(name, "agent is not overconfident");
  const auto k_count = s.groups();
  if (k_count < 2) return not_applicable(name, "needs at least two groups");

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k_count));
  for (Eigen::Index j = 0; j < s.individuals(); ++j) members[static_cast<std::size_t>(group_of[static_cast<std::size_t>(j)])].push_back(j);
  const auto own = group_of[static_cast<std::size_t>(s.agent)];
  const double reference = true_mean(s, members[0]);
  double scale = 1.0;
  for (const auto& g : members) scale = std::max(scale, std::abs(true_mean(s, g)));
  bool equal_means = true;
  for (const auto& g : members) equal_means = equal_means && std::abs(true_mean(s, g) - reference) <= 1e-12 * scale;
  if (!equal_means) return not_applicable(name, "group mean calibers differ");

  const BiasReport r = biases_closed_form(s);
  double margin = std::numeric_limits<double>::infinity();
  std::ostringstream detail;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    if (k == own) continue;
    const double gap = believed_mean(s, r, members[static_cast<std::size_t>(own)]) -
                       believed_mean(s, r, members[static_cast<std::size_t>(k)]);
    margin = std::min(margin, gap);
    detail << "own-vs-group" << k << "=" << gap << ' ';
  }

  // Outsider comparison: the argument needs every cross-group product
  // c_gk c_hk to be non-positive (no shared competitor groups).
  bool no_shared_competitors = true;
  for (Eigen::Index g = 0; g < k_count && no_shared_competitors; ++g)
    for (Eigen::Index h = g + 1; h < k_count && no_shared_competitors; ++h) {
      const auto row_g = s.memberships.row(members[static_cast<std::size_t>(g)].front());
      const auto row_h = s.memberships.row(members[static_cast<std::size_t>(h)].front());
      for (Eigen::Index k = 0; k < k_count; ++k)
        if (row_g(k) * row_h(k) > 0) no_shared_competitors = false;
    }
  if (no_shared_competitors) {
    const auto& own_members = members[static_cast<std::size_t>(own)];
    for (Eigen::Index k = 0; k < k_count; ++k) {
      if (k == own) continue;
      const auto& other_members = members[static_cast<std::size_t>(k)];
      const auto outsider = other_members.front();
      const Scenario other = s.with_agent(outsider, s.calibers(outsider) + s.overconfidence());
      const BiasReport ro = biases_closed_form(other);
      const double level = believed_mean(s, r, own_members) - believed_mean(other, ro, own_members);
      const double lead = (believed_mean(s, r, own_members) - believed_mean(s, r, other_members)) -
                          (believed_mean(other, ro, own_members) - believed_mean(other, ro, other_members));
      margin = std::min({margin, level, lead});
      detail << "vs-outsider" << outsider << " level=" << level << " lead=" << lead << ' ';
    }
  }
  return finish(name, margin, detail.str());
}

CorollaryCheck check_irrelevant_group(const Scenario& s, const MembershipVector& memberships, double v_eta_new) {
  const std::string name = "irrelevant_group_raises_total_discrimination_bias";
  s.validate();
  require(memberships.size() == s.individuals(), ErrorKind::InvalidScenario, "membership vector must have length I");
  if (memberships(s.agent) == 0) return not_applicable(name, "agent is neutral toward the new group");
  if (s.overconfidence() == 0.0) return not_applicable(name, "overconfidence is zero");
  const double before = biases_closed_form(s).theta_bias.cwiseAbs().sum();
  const double after = biases_closed_form(add_group(s, memberships, v_eta_new)).theta_bias.cwiseAbs().sum();
  std::ostringstream detail;
  detail << "total_before=" << before << " total_after=" << after;
  return finish(name, after - before, detail.str());
}

CorollaryCheck check_competitor_group(const Scenario& s, Eigen::Index kappa, double v_eta_new) {
  const std::string name = "competitor_group_shift";
  s.validate();
  require(kappa >= 0 && kappa < s.groups(), ErrorKind::InvalidScenario, "group index out of range");
  if (s.memberships(s.agent, kappa) != 1) return not_applicable(name, "agent is not a member of the group");
  if (!(s.overconfidence() > 0.0)) return not_applicable(name, "agent is not overconfident");

  MembershipVector column = MembershipVector::Zero(s.individuals());
  for (Eigen::Index j = 0; j < s.individuals(); ++j) {
    if (s.memberships(j, kappa) == 1) column(j) = -1;
    if (s.memberships(j, kappa) == -1) column(j) = 1;
  }
  const BiasReport before = biases_closed_form(s);
  const BiasReport after = biases_closed_form(add_group(s, column, v_eta_new));
  double margin = std::numeric_limits<double>::infinity();
  int compared = 0;
  for (Eigen::Index j = 0; j < s.individuals(); ++j) {
    if (j == s.agent) continue;
    if (column(j) == -1) {
      margin = std::min(margin, after.caliber_bias(j) - before.caliber_bias(j));
      ++compared;
    } else if (column(j) == 1) {
      margin = std::min(margin, before.caliber_bias(j) - after.caliber_bias(j));
      ++compared;
    }
  }
  if (compared == 0) return not_applicable(name, "nobody besides the agent is affected");
  return finish(name, margin, "compared=" + std::to_string(compared));
}

CorollaryCheck check_bias_substitution(const Scenario& s, Eigen::Index k, double factor) {
  const std::string name = "bias_substitution";
  s.validate();
  require(k >= 0 && k < s.groups(), ErrorKind::InvalidScenario, "group index out of range");
  require(factor > 0.0 && factor < 1.0, ErrorKind::InvalidScenario, "shrink factor must lie in (0, 1)");
  if (s.memberships(s.agent, k) == 0) return not_applicable(name, "agent is neutral toward the group");
  if (s.overconfidence() == 0.0) return not_applicable(name, "overconfidence is zero");
  Scenario sharper = s;
  sharper.v_eta(k) *= factor;
  const Vector before = biases_closed_form(s).theta_bias.cwiseAbs();
  const Vector after = biases_closed_form(sharper).theta_bias.cwiseAbs();
  double margin = std::min(before(k) - after(k), before.sum() - after.sum());
  for (Eigen::Index other = 0; other < s.groups(); ++other)
    if (other != k && s.memberships(s.agent, other) != 0) margin = std::min(margin, after(other) - before(other));
  std::ostringstream detail;
  detail << "own_before=" << before(k) << " own_after=" << after(k);
  return finish(name, margin, detail.str());
}

CorollaryCheck check_outsider_group(const Scenario& s, Eigen::Index newcomers, double newcomer_v_q) {
  const std::string name = "outsider_group_unifies_incumbents";
  s.validate();
  require(newcomers >= 1, ErrorKind::InvalidScenario, "need at least one newcomer");
  require(newcomer_v_q > 0.0, ErrorKind::InvalidScenario, "newcomer variance must be positive");
  if (!(s.overconfidence() > 0.0)) return not_applicable(name, "agent is not overconfident");

  const auto i_old = s.individuals();
  const auto k_old = s.groups();
  Scenario grown = s;
  const auto i_new = i_old + newcomers;
  grown.memberships = MembershipMatrix::Zero(i_new, k_old + 1);
  grown.memberships.topLeftCorner(i_old, k_old) = s.memberships;
  grown.memberships.col(k_old).head(i_old).setConstant(-1);
  grown.memberships.col(k_old).tail(newcomers).setConstant(1);
  grown.calibers.conservativeResize(i_new);
  grown.calibers.tail(newcomers).setConstant(s.calibers.mean());
  grown.v_q.conservativeResize(i_new);
  grown.v_q.tail(newcomers).setConstant(newcomer_v_q);
  grown.discrimination.conservativeResize(k_old + 1);
  grown.discrimination(k_old) = 0.0;
  grown.v_eta.conservativeResize(k_old + 1);

  auto at = [&](double v) {
    grown.v_eta(k_old) = v;
    return biases_closed_form(grown);
  };
  auto incumbent_min = [&](const BiasReport& r) { return r.caliber_bias.head(i_old).minCoeff(); };
  auto newcomer_max = [&](const BiasReport& r) { return r.caliber_bias.tail(newcomers).maxCoeff(); };

  // Smallest v_eta of the new group above which every incumbent is rated positively.
  double lo = 0.0;
  double hi = 1.0;
  while (incumbent_min(at(hi)) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    require(hi < 1e300, ErrorKind::NotApplicable, "no finite threshold found");
  }
  if (incumbent_min(at(1e-300)) > 0.0) {
    hi = 0.0;
  } else {
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * (1.0 + hi); ++iter) {
      const double mid = 0.5 * (lo + hi);
      (incumbent_min(at(mid)) > 0.0 ? hi : lo) = mid;
    }
  }
  const double threshold = hi;

  double margin = std::numeric_limits<double>::infinity();
  for (double v : {0.5 * threshold + 0.25, 1.5 * threshold + 0.5, 4.0 * threshold + 1.0, 100.0 * threshold + 10.0}) {
    const BiasReport r = at(v);
    margin = std::min(margin, -newcomer_max(r));
    if (v > threshold) margin = std::min(margin, incumbent_min(r));
  }
  std::ostringstream detail;
  detail << "v_eta_threshold=" << threshold;
  return finish(name, margin, detail.str());
}

CorollaryReport corollary_checks(const Scenario& s) {
  s.validate();
  CorollaryReport report;
  report.checks.push_back(check_in_group_superiority(s));

  MembershipVector joiner = MembershipVector::Zero(s.individuals());
  joiner(s.agent) = 1;
  const double typical_v_eta = s.groups() > 0 ? s.v_eta.mean() : 1.0;
  report.checks.push_back(check_irrelevant_group(s, joiner, typical_v_eta));

  bool any_membership = false;
  for (Eigen::Index k = 0; k < s.groups(); ++k) {
    if (s.memberships(s.agent, k) != 1) continue;
    any_membership = true;
    auto check = check_competitor_group(s, k, typical_v_eta);
    check.name += "[group " + std::to_string(k + 1) + "]";  // one-based, as in scenario files
    report.checks.push_back(std::move(check));
  }
  if (!any_membership) report.checks.push_back(not_applicable("competitor_group_shift", "agent belongs to no group"));

  bool any_relation = false;
  for (Eigen::Index k = 0; k < s.groups(); ++k) {
    if (s.memberships(s.agent, k) == 0) continue;
    any_relation = true;
    auto check = check_bias_substitution(s, k, 0.9);
    check.name += "[group " + std::to_string(k + 1) + "]";  // one-based, as in scenario files
    report.checks.push_back(std::move(check));
  }
  if (!any_relation) report.checks.push_back(not_applicable("bias_substitution", "agent is neutral toward every group"));

  report.checks.push_back(check_outsider_group(s, 2, s.v_q.mean()));
  return report;
}

AgreementReport agreement_report(const Scenario& first, const Scenario& second) {
  first.validate();
  second.validate();
  const bool same = first.memberships == second.memberships && first.calibers == second.calibers &&
                    first.discrimination == second.discrimination && first.v_q == second.v_q &&
                    first.v_eta == second.v_eta;
  require(same, ErrorKind::MismatchedSocieties, "scenarios must differ only in agent and self-belief");

  const BiasReport r1 = biases_closed_form(first);
  const BiasReport r2 = biases_closed_form(second);
  auto sign = [](double x) { return x > kClassificationTol ? 1 : (x < -kClassificationTol ? -1 : 0); };

  AgreementReport out;
  out.direction_rule_holds = true;
  for (Eigen::Index k = 0; k < first.groups(); ++k) {
    out.theta_sign_first.push_back(sign(r1.theta_bias(k)));
    out.theta_sign_second.push_back(sign(r2.theta_bias(k)));
    out.group_agree.push_back(out.theta_sign_first.back() == out.theta_sign_second.back());
    out.same_relationship.push_back(first.memberships(first.agent, k) == second.memberships(second.agent, k));
    out.direction_rule_holds = out.direction_rule_holds && out.group_agree.back() == out.same_relationship.back();
  }
  // Beliefs, not biases: each agent's own caliber belief is his a_tilde.
  out.caliber_belief_difference = r1.caliber_bias - r2.caliber_bias;
  for (Eigen::Index j = 0; j < first.individuals(); ++j)
    out.individual_agree.push_back(std::abs(out.caliber_belief_difference(j)) <= kClassificationTol);
  const double o1 = first.overconfidence();
  const double o2 = second.overconfidence();
  out.equal_positive_overconfidence = o1 > 0.0 && o1 == o2;
  return out;
}

}  // namespace misbelief
