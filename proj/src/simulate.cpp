#include "misbelief/simulate.hpp"

#include "misbelief/errors.hpp"

#include <algorithm>
#include <cmath>

namespace misbelief {

namespace {

void require_case1(const DogmaticConstraint& c) {
  require(c.limit_case() == LimitCase::I, ErrorKind::InvalidConstraint,
          "conjugate updating needs a single pin with a fixed covariance");
}

Matrix drop_column(const Matrix& m, Eigen::Index col) {
  Matrix out(m.rows(), m.cols() - 1);
  out.leftCols(col) = m.leftCols(col);
  out.rightCols(m.cols() - col - 1) = m.rightCols(m.cols() - col - 1);
  return out;
}

/// Whitened pieces of the learner's likelihood: X = L^-1 M_free and the
/// whitened pinned column, with L the Cholesky factor of Sigma~.
struct Case1Likelihood {
  Matrix chol;
  Matrix free_whitened;
  Vector pinned_column;  // unwhitened column i of M

  Case1Likelihood(const LinearGaussianModel& model, const DogmaticConstraint& c) {
    chol = cholesky_lower(c.fixed_sigma(), "fixed covariance");
    free_whitened = chol.triangularView<Eigen::Lower>().solve(drop_column(model.design(), c.pinned_index()));
    pinned_column = model.design().col(c.pinned_index());
  }
};

PosteriorState apply_update(const PosteriorState& state, const Case1Likelihood& lik, const Vector& residual_sum,
                            std::uint64_t rows) {
  const double n = static_cast<double>(rows);
  const Vector z = lik.chol.triangularView<Eigen::Lower>().solve(residual_sum);
  PosteriorState next = state;
  const Vector information = state.precision * state.mean + lik.free_whitened.transpose() * z;
  next.precision = state.precision + n * (lik.free_whitened.transpose() * lik.free_whitened);
  next.mean = next.precision.llt().solve(information);
  next.t = state.t + rows;
  return next;
}

void check_state(const PosteriorState& state, const LinearGaussianModel& model, const DogmaticConstraint& c) {
  const auto free = model.fundamental_dim() - 1;
  require(state.mean.size() == free && state.precision.rows() == free && state.precision.cols() == free,
          ErrorKind::DimensionMismatch, "posterior state does not match the free coordinates");
  require(state.pinned_index == c.pinned_index(), ErrorKind::DimensionMismatch,
          "posterior state pins a different coordinate");
}

}  // namespace

Vector PosteriorState::full_mean() const {
  Vector out(mean.size() + 1);
  out.head(pinned_index) = mean.head(pinned_index);
  out(pinned_index) = pinned_value;
  out.tail(mean.size() - pinned_index) = mean.tail(mean.size() - pinned_index);
  return out;
}

PosteriorState initial_posterior(const LinearGaussianModel& model, const DogmaticConstraint& c,
                                 double prior_precision) {
  require_case1(c);
  c.check_against(model);
  require(prior_precision > 0.0, ErrorKind::InvalidModel, "prior precision must be positive");
  const auto free = model.fundamental_dim() - 1;
  PosteriorState state;
  state.mean = Vector::Zero(free);
  state.precision = prior_precision * Matrix::Identity(free, free);
  state.pinned_index = c.pinned_index();
  state.pinned_value = c.pinned_value();
  return state;
}

PosteriorState update_case1(const PosteriorState& state, const LinearGaussianModel& model,
                            const DogmaticConstraint& c, const Vector& signal_row) {
  require_case1(c);
  check_state(state, model, c);
  require(signal_row.size() == model.signal_dim(), ErrorKind::DimensionMismatch, "signal row must have length D");
  const Case1Likelihood lik(model, c);
  return apply_update(state, lik, signal_row - lik.pinned_column * c.pinned_value(), 1);
}

PosteriorState update_case1_batch(const PosteriorState& state, const LinearGaussianModel& model,
                                  const DogmaticConstraint& c, const Matrix& rows) {
  require_case1(c);
  check_state(state, model, c);
  require(rows.cols() == model.signal_dim(), ErrorKind::DimensionMismatch, "signal rows must have D columns");
  if (rows.rows() == 0) return state;
  const Case1Likelihood lik(model, c);
  const auto n = static_cast<std::uint64_t>(rows.rows());
  const Vector residual_sum =
      rows.colwise().sum().transpose() - lik.pinned_column * (c.pinned_value() * static_cast<double>(n));
  return apply_update(state, lik, residual_sum, n);
}

void RunningMoments::add(const Matrix& rows) {
  require(rows.cols() == sum.size(), ErrorKind::DimensionMismatch, "signal rows must have D columns");
  count += static_cast<std::uint64_t>(rows.rows());
  sum += rows.colwise().sum().transpose();
  cross.noalias() += rows.transpose() * rows;
}

Vector RunningMoments::mean() const { return sum / static_cast<double>(count); }

Matrix RunningMoments::covariance() const {
  const Vector m = mean();
  return symmetrize(cross / static_cast<double>(count) - m * m.transpose());
}

LimitBelief constrained_mle(const LinearGaussianModel& model, const DogmaticConstraint& c,
                            const RunningMoments& moments, const MleOptions& options) {
  require(c.covariance_mode() == CovarianceMode::Free, ErrorKind::InvalidConstraint,
          "constrained MLE needs a learned covariance");
  c.check_against(model);
  require(moments.sum.size() == model.signal_dim(), ErrorKind::DimensionMismatch, "moments must be D-dimensional");
  require(moments.count > static_cast<std::uint64_t>(model.signal_dim()), ErrorKind::InvalidModel,
          "need more than D signals for a covariance fit");
  const Vector sample_mean = moments.mean();
  const Matrix sample_cov = moments.covariance();
  const Matrix chol = cholesky_lower(sample_cov, "sample covariance");

  // For fixed f the optimal covariance is S + u u^T with u = mean - M f, and
  // the profile objective is increasing in u^T S^-1 u: a GLS fit.
  LimitBelief profile;
  if (c.pin_mode() == PinMode::PinAll) {
    profile.f_tilde = c.pinned_vector();
  } else {
    const auto i = c.pinned_index();
    const Matrix x = chol.triangularView<Eigen::Lower>().solve(drop_column(model.design(), i));
    const Vector z = chol.triangularView<Eigen::Lower>().solve(sample_mean - model.design().col(i) * c.pinned_value());
    const Vector free = x.cols() == 0 ? Vector() : Vector(x.colPivHouseholderQr().solve(z));
    profile.f_tilde.resize(model.fundamental_dim());
    profile.f_tilde.head(i) = free.head(i);
    profile.f_tilde(i) = c.pinned_value();
    profile.f_tilde.tail(free.size() - i) = free.tail(free.size() - i);
  }
  const Vector u = sample_mean - model.design() * profile.f_tilde;
  profile.sigma_tilde = sample_cov + u * u.transpose();
  if (!options.refine) return profile;

  const GaussianTarget target{sample_mean, sample_cov};
  return minimize_kl_over_support(model.design(), target, c, options.oracle, profile).belief;
}

LimitBelief constrained_mle(const LinearGaussianModel& model, const DogmaticConstraint& c, const SignalBatch& batch,
                            const MleOptions& options) {
  require(batch.size() >= 1, ErrorKind::InvalidModel, "batch must be non-empty");
  RunningMoments moments(model.signal_dim());
  moments.add(batch.rows);
  return constrained_mle(model, c, moments, options);
}

double average_log_likelihood(const LinearGaussianModel& model, const LimitBelief& belief, const SignalBatch& batch) {
  const LinearGaussianModel candidate = model.with_sigma(belief.sigma_tilde);
  return log_likelihood(candidate, belief.f_tilde, batch) / static_cast<double>(batch.size());
}

double belief_distance(const LimitBelief& a, const LimitBelief& b) {
  require(a.f_tilde.size() == b.f_tilde.size() && a.sigma_tilde.rows() == b.sigma_tilde.rows(),
          ErrorKind::DimensionMismatch, "beliefs differ in dimension");
  return std::sqrt((a.f_tilde - b.f_tilde).squaredNorm() + (a.sigma_tilde - b.sigma_tilde).squaredNorm());
}

ConvergenceTrace convergence_trace(const LinearGaussianModel& model, const Vector& true_f,
                                   const DogmaticConstraint& c, std::uint64_t t_max,
                                   const std::vector<std::uint64_t>& checkpoints, std::uint64_t seed,
                                   const MleOptions& options) {
  require(!checkpoints.empty(), ErrorKind::InvalidModel, "need at least one checkpoint");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    require(checkpoints[k] >= 1 && (k == 0 || checkpoints[k] > checkpoints[k - 1]), ErrorKind::InvalidModel,
            "checkpoints must be positive and strictly increasing");
  }
  require(checkpoints.back() <= t_max, ErrorKind::InvalidModel, "t_max must be at least the last checkpoint");

  ConvergenceTrace trace;
  trace.seed = seed;
  trace.limit = solve_limit(model, true_f, c);
  const bool conjugate = c.limit_case() == LimitCase::I;

  PosteriorState posterior;
  if (conjugate) posterior = initial_posterior(model, c);
  RunningMoments moments(model.signal_dim());

  constexpr std::uint64_t kChunk = 4096;
  std::uint64_t consumed = 0;
  for (const auto target : checkpoints) {
    while (consumed < target) {
      const auto count = std::min(kChunk, target - consumed);
      const Matrix rows = sample_signal_rows(model, true_f, consumed, static_cast<std::size_t>(count), seed);
      if (conjugate) {
        posterior = update_case1_batch(posterior, model, c, rows);
      } else {
        moments.add(rows);
      }
      consumed += count;
    }
    TraceCheckpoint point;
    point.t = target;
    if (conjugate) {
      point.belief = LimitBelief{posterior.full_mean(), c.fixed_sigma()};
    } else {
      point.belief = constrained_mle(model, c, moments, options);
    }
    point.distance = belief_distance(point.belief, trace.limit);
    trace.checkpoints.push_back(std::move(point));
  }
  return trace;
}

double log_log_slope(const std::vector<std::uint64_t>& t, const std::vector<double>& distance) {
  require(t.size() == distance.size() && t.size() >= 2, ErrorKind::DimensionMismatch,
          "need at least two matching points");
  const auto n = static_cast<Eigen::Index>(t.size());
  Vector x(n), y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    require(t[static_cast<std::size_t>(k)] > 0 && distance[static_cast<std::size_t>(k)] > 0.0,
            ErrorKind::InvalidModel, "log-log fit needs positive values");
    x(k) = std::log(static_cast<double>(t[static_cast<std::size_t>(k)]));
    y(k) = std::log(distance[static_cast<std::size_t>(k)]);
  }
  const double xm = x.mean();
  const double ym = y.mean();
  return ((x.array() - xm) * (y.array() - ym)).sum() / (x.array() - xm).square().sum();
}

}  // namespace misbelief
