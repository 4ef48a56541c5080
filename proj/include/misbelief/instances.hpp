#pragma once

#include "misbelief/extensions.hpp"
#include "misbelief/rng.hpp"

#include <cstdint>

namespace misbelief {

/// Random symmetric positive definite matrix L L^T with L lower triangular,
/// diagonal uniform in [0.5, 1.5] and off-diagonal N(0, 0.5^2).
Matrix random_spd(CounterRng& rng, Eigen::Index d);

/// A random signal model with everything needed to pose all three limit
/// problems on it.
struct RandomInstance {
  LinearGaussianModel model;
  Vector true_f;
  Eigen::Index pinned_index = 0;
  double overconfidence = 0.0;  // |.| <= 3
  Matrix fixed_sigma;           // learner's covariance for the fixed-covariance problem
  Vector pinned_vector;         // true_f plus a bias of at most 3 per entry

  DogmaticConstraint case1() const;
  DogmaticConstraint case2() const;
  DogmaticConstraint case3() const;
};

struct InstanceLimits {
  Eigen::Index max_signal_dim = 8;
  Eigen::Index max_fundamental_dim = 6;
  double max_overconfidence = 3.0;
  /// Draws whose information matrices are worse conditioned than this are
  /// redrawn, so relative comparisons stay meaningful.
  double max_condition = 1e4;
};

/// Instance number `index` of the stream keyed by `seed`.
RandomInstance random_instance(std::uint64_t seed, std::uint64_t index, const InstanceLimits& limits = {});

/// Random society with 1..max_individuals people and 0..max_groups groups,
/// memberships uniform over {-1, 0, 1}, variances in [0.2, 3], overconfidence
/// uniform in [-3, 3].
Scenario random_scenario(CounterRng& rng, Eigen::Index max_individuals = 6, Eigen::Index max_groups = 3);

/// Random society in which the agent is neutral toward every group.
Scenario random_neutral_scenario(CounterRng& rng, Eigen::Index max_individuals = 6, Eigen::Index max_groups = 3);

/// Partitional society: 2..max_groups groups of 1..3 members, each group a
/// random competitor of the others, calibers shifted so that all group means
/// coincide, and a positive overconfidence.
Scenario random_partitional_scenario(CounterRng& rng, Eigen::Index max_groups = 3);

/// Random society with K >= 1, positive overconfidence, and the agent a
/// member of group 0.
Scenario random_engaged_scenario(CounterRng& rng, Eigen::Index max_individuals = 6, Eigen::Index max_groups = 3);

/// Random membership vector with a nonzero entry for the agent.
MembershipVector random_engaged_memberships(CounterRng& rng, Eigen::Index individuals, Eigen::Index agent);

/// Random correlated-error scenario with I in [1, max_individuals].
CorrelatedScenario random_correlated_scenario(CounterRng& rng, Eigen::Index max_individuals = 6);

/// Random vector over {-1, 1}.
MembershipVector random_signs(CounterRng& rng, Eigen::Index n);

}  // namespace misbelief
