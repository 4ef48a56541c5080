#include "misbelief/errors.hpp"
#include "misbelief/instances.hpp"
#include "misbelief/simulate.hpp"

#include <doctest.h>

using namespace misbelief;

TEST_CASE("single observation with a vanishing prior is least squares") {
  const LinearGaussianModel model(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  const DogmaticConstraint c = DogmaticConstraint::case1(0, 0.5, Matrix::Identity(2, 2));
  Vector row(2);
  row << 3.0, -1.25;
  const PosteriorState s = update_case1(initial_posterior(model, c, 1e-12), model, c, row);
  CHECK(s.t == 1);
  CHECK(s.mean(0) == doctest::Approx(-1.25));
  const Vector full = s.full_mean();
  CHECK(full(0) == 0.5);
  CHECK(full(1) == doctest::Approx(-1.25));
}

TEST_CASE("conjugate updates are order independent and match the batch form") {
  const RandomInstance inst = random_instance(3, 4);
  const DogmaticConstraint c = inst.case1();
  const SignalBatch batch = sample_signals(inst.model, inst.true_f, 300, 9);
  PosteriorState forward = initial_posterior(inst.model, c);
  PosteriorState backward = forward;
  for (Eigen::Index r = 0; r < batch.size(); ++r) {
    forward = update_case1(forward, inst.model, c, batch.rows.row(r).transpose());
    backward = update_case1(backward, inst.model, c, batch.rows.row(batch.size() - 1 - r).transpose());
  }
  const PosteriorState block = update_case1_batch(initial_posterior(inst.model, c), inst.model, c, batch.rows);
  CHECK((forward.mean - backward.mean).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((forward.mean - block.mean).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((forward.precision - block.precision).cwiseAbs().maxCoeff() <= 1e-8 * forward.precision.norm());
  const Eigen::SelfAdjointEigenSolver<Matrix> growth(block.precision - initial_posterior(inst.model, c).precision);
  CHECK(growth.eigenvalues().minCoeff() >= -1e-9);
}

TEST_CASE("case I posterior concentrates near the limit") {
  int within = 0;
  const int replications = 200;
  for (int k = 0; k < replications; ++k) {
    const RandomInstance inst = random_instance(100, static_cast<std::uint64_t>(k));
    const DogmaticConstraint c = inst.case1();
    const LimitBelief limit = solve_case1(inst.model, inst.true_f, c);
    const Matrix rows = sample_signal_rows(inst.model, inst.true_f, 0, 10000, 1000 + k);
    const PosteriorState s = update_case1_batch(initial_posterior(inst.model, c), inst.model, c, rows);
    const Matrix cov = s.precision.inverse();
    within += (s.full_mean() - limit.f_tilde).norm() <= 10.0 * std::sqrt(cov.trace());
  }
  CHECK(within >= 190);
}

TEST_CASE("running moments") {
  RunningMoments m(2);
  Matrix rows(3, 2);
  rows << 1, 2, 3, 4, 5, 9;
  m.add(rows.topRows(1));
  m.add(rows.bottomRows(2));
  CHECK(m.count == 3);
  CHECK(m.mean()(0) == doctest::Approx(3.0));
  const Matrix centered = rows.rowwise() - rows.colwise().mean();
  CHECK((m.covariance() - centered.transpose() * centered / 3.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constrained mle with correct dogma recovers the truth") {
  const RandomInstance inst = random_instance(5, 2);
  const Eigen::Index i = inst.pinned_index;
  const DogmaticConstraint c = DogmaticConstraint::case3(i, inst.true_f(i));
  const SignalBatch batch = sample_signals(inst.model, inst.true_f, 100000, 6);
  const LimitBelief mle = constrained_mle(inst.model, c, batch);
  CHECK((mle.f_tilde - inst.true_f).norm() < 0.05);
  CHECK((mle.sigma_tilde - inst.model.sigma()).norm() < 0.05);
}

TEST_CASE("case II mle is the residual covariance") {
  const RandomInstance inst = random_instance(5, 3);
  const SignalBatch batch = sample_signals(inst.model, inst.true_f, 5000, 7);
  const DogmaticConstraint c = DogmaticConstraint::case2(inst.true_f);
  const LimitBelief mle = constrained_mle(inst.model, c, batch);
  const Matrix resid = batch.rows.rowwise() - (inst.model.design() * inst.true_f).transpose();
  const Matrix expected = resid.transpose() * resid / static_cast<double>(batch.size());
  CHECK((mle.sigma_tilde - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("constrained mle is at least as likely as the limit point") {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const RandomInstance inst = random_instance(8, k);
    const SignalBatch batch = sample_signals(inst.model, inst.true_f, 2000, 20 + k);
    const LimitBelief limit = solve_case3(inst.model, inst.true_f, inst.case3());
    const LimitBelief mle = constrained_mle(inst.model, inst.case3(), batch);
    CHECK(average_log_likelihood(inst.model, mle, batch) >= average_log_likelihood(inst.model, limit, batch) - 1e-9);
  }
}

TEST_CASE("mle needs more rows than signals") {
  const RandomInstance inst = random_instance(8, 0);
  const SignalBatch batch = sample_signals(inst.model, inst.true_f, 1, 1);
  CHECK_THROWS_AS(constrained_mle(inst.model, inst.case3(), batch), Error);
}

TEST_CASE("traces are deterministic and converge") {
  const RandomInstance inst = random_instance(9, 1);
  const std::vector<std::uint64_t> points = {100, 1000, 10000, 100000};
  const ConvergenceTrace a = convergence_trace(inst.model, inst.true_f, inst.case3(), 100000, points, 77);
  const ConvergenceTrace b = convergence_trace(inst.model, inst.true_f, inst.case3(), 100000, points, 77);
  REQUIRE(a.checkpoints.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(a.checkpoints[k].t == points[k]);
    CHECK(a.checkpoints[k].distance == b.checkpoints[k].distance);
    CHECK((a.checkpoints[k].belief.f_tilde.array() == b.checkpoints[k].belief.f_tilde.array()).all());
  }
  CHECK(a.checkpoints.back().distance < a.checkpoints.front().distance);

  CHECK_THROWS_AS(convergence_trace(inst.model, inst.true_f, inst.case3(), 1000, points, 1), Error);
  CHECK_THROWS_AS(convergence_trace(inst.model, inst.true_f, inst.case3(), 1000, {10, 10}, 1), Error);
}

TEST_CASE("zero-overconfidence trace converges to the truth") {
  const RandomInstance inst = random_instance(9, 2);
  const Eigen::Index i = inst.pinned_index;
  const DogmaticConstraint c = DogmaticConstraint::case3(i, inst.true_f(i));
  const ConvergenceTrace t = convergence_trace(inst.model, inst.true_f, c, 100000, {1000, 100000}, 5);
  CHECK((t.limit.f_tilde - inst.true_f).norm() == 0.0);
  CHECK((t.checkpoints.back().belief.f_tilde - inst.true_f).norm() < 0.05);
}

TEST_CASE("log-log slope of an exact power law") {
  const std::vector<std::uint64_t> t = {10, 100, 1000, 10000};
  std::vector<double> d;
  for (auto v : t) d.push_back(3.0 * std::pow(static_cast<double>(v), -0.5));
  CHECK(log_log_slope(t, d) == doctest::Approx(-0.5));
}
