#pragma once

#include "misbelief/limit_solver.hpp"

#include <string>
#include <vector>

namespace misbelief {

using MembershipMatrix = Eigen::MatrixXi;
using MembershipVector = Eigen::VectorXi;

/// A society seen from one agent's perspective.
///
/// Individual j's recognition is q_j = a_j + sum_k c_jk theta_k + noise with
/// variance v_q[j]; group k's discrimination signal is eta_k = theta_k + noise
/// with variance v_eta[k]. The agent believes his own caliber is a_tilde.
/// Indices are zero-based.
struct Scenario {
  MembershipMatrix memberships;  // I x K, entries in {-1, 0, 1}
  Vector calibers;               // true a_j, length I
  Vector discrimination;         // true theta_k, length K
  Vector v_q;                    // length I, positive
  Vector v_eta;                  // length K, positive
  Eigen::Index agent = 0;
  double a_tilde = 0.0;

  Eigen::Index individuals() const noexcept { return calibers.size(); }
  Eigen::Index groups() const noexcept { return discrimination.size(); }
  double overconfidence() const { return a_tilde - calibers(agent); }

  /// Throws InvalidScenario naming the first violated invariant.
  void validate() const;

  /// Same society seen by another agent with the given belief about himself.
  Scenario with_agent(Eigen::Index agent, double a_tilde) const;
};

enum class BiasTag { InGroupFavoritism, OutGroupDerogation, Unbiased };

std::string_view to_string(BiasTag tag) noexcept;

/// Tolerance below which a caliber bias counts as zero.
inline constexpr double kClassificationTol = 1e-12;

struct BiasReport {
  Vector theta_bias;    // length K
  Vector caliber_bias;  // length I; entry `agent` equals the overconfidence
  Matrix sigma_bias;    // (I+K) x (I+K)
  std::vector<BiasTag> classifications;
};

struct SocietyModel {
  LinearGaussianModel model;
  Vector fundamentals;  // (A, Theta)
  DogmaticConstraint constraint;
};

/// M = [[Id, C], [0, Id]], Sigma = diag(v_q, v_eta), f = (A, Theta), and the
/// agent's own caliber pinned with the covariance learned.
SocietyModel build_model(const Scenario& s);

/// Biases from the explicit per-group and per-individual ratios.
BiasReport biases_closed_form(const Scenario& s);

/// Same report through build_model and the general solver.
BiasReport biases_via_theorem(const Scenario& s);

/// Appends a group with the given relationships and no true discrimination.
Scenario add_group(const Scenario& s, const MembershipVector& memberships, double v_eta_new);

/// Disjoint groups covering everyone (each individual a member of exactly one
/// group) with identical relationship rows within each group. On success
/// `group_of[j]` is j's group.
bool is_partitional(const MembershipMatrix& c, std::vector<Eigen::Index>* group_of = nullptr);

/// Outcome of one comparative-statics check. `margin` is the smallest of the
/// signed quantities the check requires to be positive.
struct CorollaryCheck {
  std::string name;
  bool applicable = false;
  std::string reason;  // why not applicable
  double margin = 0.0;
  bool passed = false;
  std::string detail;
};

struct CorollaryReport {
  std::vector<CorollaryCheck> checks;
  bool all_passed() const;  // every applicable check passed
};

/// Margins must exceed this to pass.
inline constexpr double kMarginTol = 1e-9;

/// Partitional society with equal group-mean calibers: the agent believes his
/// own group has a higher average caliber than every other group. When no two
/// groups share a relationship of the same sign toward a third, it also checks
/// that another group's member (with equal overconfidence) rates the agent's
/// group, and its lead over his own group, lower than the agent does.
CorollaryCheck check_in_group_superiority(const Scenario& s);

/// Adding a group with no true discrimination and c_agent != 0 strictly raises
/// sum_k |theta bias|.
CorollaryCheck check_irrelevant_group(const Scenario& s, const MembershipVector& memberships, double v_eta_new);

/// For a group kappa the agent belongs to, adding a group that every member of
/// kappa competes with (and every competitor of kappa joins) raises the agent's
/// view of kappa's members and lowers it for the new group's members.
CorollaryCheck check_competitor_group(const Scenario& s, Eigen::Index kappa, double v_eta_new);

/// Shrinking v_eta[k] (c_agent,k != 0) by `factor` lowers |theta bias k| and the
/// total, and raises |theta bias k'| for every other k' the agent relates to.
CorollaryCheck check_bias_substitution(const Scenario& s, Eigen::Index k, double factor);

/// Adding `newcomers` individuals forming a new group that every incumbent
/// competes with: newcomers are rated negatively; above a v_eta threshold
/// (found by bisection) every incumbent is rated positively.
CorollaryCheck check_outsider_group(const Scenario& s, Eigen::Index newcomers, double newcomer_v_q);

/// Runs every check with default constructions; inapplicable checks are kept
/// with applicable = false.
CorollaryReport corollary_checks(const Scenario& s);

/// Comparison of two agents' long-run beliefs about the same society.
struct AgreementReport {
  std::vector<int> theta_sign_first;
  std::vector<int> theta_sign_second;
  std::vector<bool> group_agree;         // same sign of theta bias
  std::vector<bool> same_relationship;   // c_{i1,k} == c_{i2,k}
  Vector caliber_belief_difference;      // first minus second
  std::vector<bool> individual_agree;    // |difference| <= kClassificationTol
  /// Group agreement coincides with equal relationships; only meaningful when
  /// both agents share the same positive overconfidence.
  bool direction_rule_holds = false;
  bool equal_positive_overconfidence = false;
};

/// Throws MismatchedSocieties unless the scenarios differ only in agent / a_tilde.
AgreementReport agreement_report(const Scenario& first, const Scenario& second);

}  // namespace misbelief
