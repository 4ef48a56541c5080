#pragma once

#include "misbelief/society.hpp"

#include <vector>

namespace misbelief {

// ---------------------------------------------------------------------------
// Correlated recognition errors, no explicit groups (M = Id, Sigma = Sigma_q).

struct CorrelatedScenario {
  Matrix sigma_q;   // I x I, symmetric positive definite
  Vector calibers;  // length I
  Eigen::Index agent = 0;
  double a_tilde = 0.0;

  Eigen::Index individuals() const noexcept { return calibers.size(); }
  double overconfidence() const { return a_tilde - calibers(agent); }
  void validate() const;
};

/// Endogenous group relative to the agent: sign of the error covariance.
enum class GroupTag { InGroup, OutGroup, Neutral };

std::string_view to_string(GroupTag tag) noexcept;

struct CorrelatedReport {
  Vector caliber_bias;
  Matrix sigma_bias;  // caliber_bias * caliber_bias^T
  std::vector<GroupTag> tags;
};

/// caliber_bias[j] = Sigma_q(agent, j) / Sigma_q(agent, agent) * overconfidence.
CorrelatedReport correlated_biases(const CorrelatedScenario& cs);

/// Same quantities from the general solver on M = Id, Sigma = Sigma_q.
CorrelatedReport correlated_biases_via_theorem(const CorrelatedScenario& cs);

/// Society whose recognition errors are correlated: Sigma = blockdiag(Sigma_q,
/// diag(v_eta)). The scenario's own v_q is ignored.
SocietyModel build_correlated_society_model(const Scenario& s, const Matrix& sigma_q);

/// Caliber and discrimination biases of the correlated society, from the
/// general solver. The caliber numerator is Sigma_q(i,j) plus the shared-group
/// term sum_k c_ik c_jk v_eta[k]; `additive_prediction` evaluates that sum.
struct CorrelatedSocietyReport {
  BiasReport biases;
  Vector additive_prediction;
};
CorrelatedSocietyReport correlated_society_biases(const Scenario& s, const Matrix& sigma_q);

// ---------------------------------------------------------------------------
// Personal contact: direct noisy observations of every caliber, one group.

struct ContactScenario {
  MembershipVector signs;  // +1 member, -1 competitor
  double v_q = 1.0;
  double v_a = 1.0;
  double v_eta = 1.0;
  Vector calibers;
  double discrimination = 0.0;
  Eigen::Index agent = 0;
  double a_tilde = 0.0;

  Eigen::Index individuals() const noexcept { return calibers.size(); }
  double overconfidence() const { return a_tilde - calibers(agent); }
  void validate() const;
};

struct ContactReport {
  double theta_bias = 0.0;
  Vector caliber_bias;
};

/// Closed form for common variances.
ContactReport contact_biases(const ContactScenario& ks);

/// Rows: recognitions q_j = a_j + c_j theta, the discrimination signal, then
/// caliber observations s_j = a_j. Fundamentals (a_1..a_I, theta). Per-person
/// variances are allowed here; there is no closed form for that case.
LinearGaussianModel contact_model(const MembershipVector& signs, const Vector& v_q, double v_eta, const Vector& v_a);

/// Contact biases from the general solver, possibly with per-person variances.
ContactReport contact_biases_via_theorem(const MembershipVector& signs, const Vector& v_q, double v_eta,
                                         const Vector& v_a, Eigen::Index agent, double overconfidence);

/// (C C^T)^2 == I * C C^T for a sign vector, in exact integer arithmetic.
bool contact_gram_identity_holds(const MembershipVector& signs);

// ---------------------------------------------------------------------------
// Richer observations with four individuals: agent and one more member,
// two competitors whose recognition and caliber are seen with variances
// v_q_out and v_a_out.

/// Biases per unit of overconfidence.
struct RicherObservationRatios {
  double competitor_first = 0.0;   // individual 3
  double competitor_second = 0.0;  // individual 4
  double discrimination = 0.0;
};

RicherObservationRatios example1_biases(double v_q_out, double v_a_out);

/// 9 x 5 model: four recognitions, the discrimination signal, four caliber
/// observations; fundamentals (a_1..a_4, theta).
LinearGaussianModel example1_model(double v_q_out, double v_a_out);

RicherObservationRatios example1_via_theorem(double v_q_out, double v_a_out);

// ---------------------------------------------------------------------------
// Two-dimensional attributes: talent a and morality m. The agent (member) and a
// representative competitor; status q_j = a_j + m_j +/- theta, the
// competitor's business success 2 a_2 + m_2, and a discrimination signal.

struct MultiAttributeScenario {
  double talent_self = 0.0;
  double talent_other = 0.0;
  double morality_self = 0.0;
  double morality_other = 0.0;
  double discrimination = 0.0;
  double v_q_self = 1.0;
  double v_eta = 1.0;
  double overconfidence = 0.0;  // about talent_self + morality_self

  void validate() const;
};

struct MultiAttributeReport {
  double talent_other = 0.0;    // reported as a2
  double morality_other = 0.0;  // reported as m1 (the competitor's morality)
  double discrimination = 0.0;  // reported as theta1
};

MultiAttributeReport example2_biases(const MultiAttributeScenario& ms);

/// 4 x 4 model over (a_1 + m_1, a_2 + m_2, theta, a_2) with
/// Sigma = diag(v_q_self, 1, 1, v_eta); the agent's composite is pinned.
SocietyModel example2_model(const MultiAttributeScenario& ms);

MultiAttributeReport example2_via_theorem(const MultiAttributeScenario& ms);

}  // namespace misbelief
