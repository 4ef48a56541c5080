#pragma once

#include "misbelief/limit_solver.hpp"

#include <cstdint>
#include <vector>

namespace misbelief {

/// Gaussian posterior over the free fundamentals of a single-pin, fixed
/// covariance learner. The pinned coordinate is not part of the state.
struct PosteriorState {
  Vector mean;       // length L - 1
  Matrix precision;  // (L-1) x (L-1)
  std::uint64_t t = 0;
  Eigen::Index pinned_index = 0;
  double pinned_value = 0.0;

  /// Mean over all L fundamentals with the pinned value re-inserted.
  Vector full_mean() const;
};

/// Prior precision used by the simulations: diffuse, 1e-6 * Id.
inline constexpr double kDiffusePriorPrecision = 1e-6;

/// Zero-mean prior with precision `prior_precision` * Id over the free coordinates.
PosteriorState initial_posterior(const LinearGaussianModel& model, const DogmaticConstraint& c,
                                 double prior_precision = kDiffusePriorPrecision);

/// Conjugate update with one signal row under the learner's likelihood
/// N(M f, Sigma~) with f_i clamped to the pinned value.
PosteriorState update_case1(const PosteriorState& state, const LinearGaussianModel& model,
                            const DogmaticConstraint& c, const Vector& signal_row);

/// Same as applying update_case1 to each row in turn, via summed statistics.
PosteriorState update_case1_batch(const PosteriorState& state, const LinearGaussianModel& model,
                                  const DogmaticConstraint& c, const Matrix& rows);

/// Sufficient statistics of a signal stream.
struct RunningMoments {
  std::uint64_t count = 0;
  Vector sum;
  Matrix cross;  // sum of r r^T

  explicit RunningMoments(Eigen::Index d = 0) : sum(Vector::Zero(d)), cross(Matrix::Zero(d, d)) {}
  void add(const Matrix& rows);
  Vector mean() const;
  /// Maximum-likelihood (divide by count) covariance.
  Matrix covariance() const;
};

struct MleOptions {
  /// Polish the profile solution with the same BFGS/Cholesky search the
  /// numeric oracle uses.
  bool refine = true;
  OracleOptions oracle{1, 0x5eed, {}};
};

/// Constrained maximum-likelihood fit of (f, Sigma) for a covariance-learning
/// constraint (Cases II and III).
LimitBelief constrained_mle(const LinearGaussianModel& model, const DogmaticConstraint& c, const SignalBatch& batch,
                            const MleOptions& options = {});

/// Same fit from precomputed moments.
LimitBelief constrained_mle(const LinearGaussianModel& model, const DogmaticConstraint& c,
                            const RunningMoments& moments, const MleOptions& options = {});

/// Average log-likelihood of a batch under a candidate (f, Sigma).
double average_log_likelihood(const LinearGaussianModel& model, const LimitBelief& belief, const SignalBatch& batch);

/// sqrt(|f_a - f_b|^2 + |Sigma_a - Sigma_b|_F^2).
double belief_distance(const LimitBelief& a, const LimitBelief& b);

struct TraceCheckpoint {
  std::uint64_t t = 0;
  LimitBelief belief;
  double distance = 0.0;  // to the limit solver's point
};

struct ConvergenceTrace {
  std::vector<TraceCheckpoint> checkpoints;
  LimitBelief limit;
  std::uint64_t seed = 0;
};

/// Streams t_max signals from the true model, tracks the learner (posterior
/// mean in Case I, constrained MLE otherwise) and records the distance to the
/// closed-form limit at each checkpoint. Checkpoints must be strictly
/// increasing and at most t_max.
ConvergenceTrace convergence_trace(const LinearGaussianModel& model, const Vector& true_f,
                                   const DogmaticConstraint& c, std::uint64_t t_max,
                                   const std::vector<std::uint64_t>& checkpoints, std::uint64_t seed,
                                   const MleOptions& options = {});

/// Least-squares slope of log(distance) on log(t).
double log_log_slope(const std::vector<std::uint64_t>& t, const std::vector<double>& distance);

}  // namespace misbelief
