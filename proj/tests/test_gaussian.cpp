#include "misbelief/errors.hpp"
#include "misbelief/gaussian.hpp"
#include "misbelief/instances.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace misbelief;

namespace {

Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

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

TEST_CASE("model validation") {
  CHECK(kind_of([] { LinearGaussianModel(Matrix::Identity(2, 3), Matrix::Identity(2, 2)); }) == ErrorKind::InvalidModel);
  Matrix rank1(3, 2);
  rank1 << 1, 2, 2, 4, 3, 6;
  CHECK(kind_of([&] { LinearGaussianModel(rank1, Matrix::Identity(3, 3)); }) == ErrorKind::InvalidModel);
  Matrix not_pd(2, 2);
  not_pd << 1, 2, 2, 1;
  CHECK(kind_of([&] { LinearGaussianModel(Matrix::Identity(2, 2), not_pd); }) == ErrorKind::InvalidModel);
  CHECK(kind_of([] { LinearGaussianModel(Matrix::Identity(2, 2), Matrix::Identity(3, 3)); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { LinearGaussianModel(Matrix::Identity(4, 4), Matrix::Identity(4, 4), 3); }) ==
        ErrorKind::InvalidModel);
}

TEST_CASE("kl divergence hand values") {
  const LinearGaussianModel unit(m1(1), m1(1));
  CHECK(kl_divergence(Vector::Zero(1), unit, Vector::Zero(1), unit) == doctest::Approx(0.0));
  CHECK(kl_divergence(Vector::Zero(1), unit, Vector::Ones(1), unit) == doctest::Approx(0.5));
  const LinearGaussianModel wide(m1(1), m1(2));
  CHECK(kl_divergence(Vector::Zero(1), unit, Vector::Zero(1), wide) ==
        doctest::Approx(0.5 * (0.5 - 1.0 + std::log(2.0))));
  CHECK(kl_divergence(Vector::Zero(1), unit, Vector::Zero(1), wide) == doctest::Approx(0.0966).epsilon(1e-3));
}

TEST_CASE("kl divergence is nonnegative and vanishes only at the truth") {
  CounterRng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = static_cast<Eigen::Index>(rng.integer(1, 6));
    const auto l = static_cast<Eigen::Index>(rng.integer(1, d));
    Matrix design(d, l);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < l; ++c) design(r, c) = rng.normal();
    if (!has_full_column_rank(design)) continue;
    const LinearGaussianModel truth(design, random_spd(rng, d));
    const LinearGaussianModel cand = truth.with_sigma(random_spd(rng, d));
    Vector f(l), g(l);
    for (Eigen::Index k = 0; k < l; ++k) {
      f(k) = rng.normal();
      g(k) = rng.normal();
    }
    CHECK(kl_divergence(f, truth, f, truth) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kl_divergence(f, truth, g, cand) > 0.0);
  }
}

TEST_CASE("dimension mismatch in kl") {
  const LinearGaussianModel a(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(kind_of([&] { kl_divergence(Vector::Zero(3), a, Vector::Zero(2), a); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("log likelihood hand values") {
  const LinearGaussianModel unit(m1(1), m1(1));
  SignalBatch batch;
  batch.rows = Matrix::Constant(1, 1, 2.0);
  CHECK(log_likelihood(unit, Vector::Zero(1), batch) ==
        doctest::Approx(-0.5 * (std::log(2 * std::numbers::pi) + 4.0)));

  const LinearGaussianModel id3(Matrix::Identity(3, 2), Matrix::Identity(3, 3));
  Vector f(2);
  f << 0.3, -0.7;
  SignalBatch exact;
  exact.rows = (id3.design() * f).transpose();
  CHECK(log_likelihood(id3, f, exact) == doctest::Approx(-1.5 * std::log(2 * std::numbers::pi)));

  SignalBatch sampled = sample_signals(id3, f, 50, 3);
  SignalBatch doubled;
  doubled.rows.resize(100, 3);
  doubled.rows << sampled.rows, sampled.rows;
  CHECK(log_likelihood(id3, f, doubled) == doctest::Approx(2.0 * log_likelihood(id3, f, sampled)));
}

TEST_CASE("sampling is deterministic and prefix-stable") {
  CounterRng rng(5);
  const LinearGaussianModel model(Matrix::Identity(3, 3), random_spd(rng, 3));
  const Vector f = Vector::LinSpaced(3, -1, 1);
  const SignalBatch a = sample_signals(model, f, 200, 17);
  const SignalBatch b = sample_signals(model, f, 200, 17);
  CHECK((a.rows.array() == b.rows.array()).all());
  const SignalBatch prefix = sample_signals(model, f, 50, 17);
  CHECK((prefix.rows.array() == a.rows.topRows(50).array()).all());
  const Matrix middle = sample_signal_rows(model, f, 120, 30, 17);
  CHECK((middle.array() == a.rows.middleRows(120, 30).array()).all());
  CHECK(a.model_digest == model.digest());
  CHECK_FALSE((sample_signals(model, f, 200, 18).rows.array() == a.rows.array()).all());
}

TEST_CASE("sample moments converge") {
  const std::size_t t = 100000;
  const double bound = 5.0 / std::sqrt(static_cast<double>(t));
  {
    const LinearGaussianModel id(Matrix::Identity(3, 3), Matrix::Identity(3, 3));
    const SignalBatch batch = sample_signals(id, Vector::Zero(3), t, 1);
    const Vector mean = batch.rows.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < bound);
  }
  {
    const LinearGaussianModel column(Matrix::Ones(2, 1), Matrix::Identity(2, 2));
    const SignalBatch batch = sample_signals(column, Vector::Constant(1, 2.0), t, 2);
    const Vector mean = batch.rows.colwise().mean();
    CHECK((mean.array() - 2.0).abs().maxCoeff() < bound);
  }
  {
    CounterRng rng(8);
    const Matrix sigma = random_spd(rng, 4);
    const LinearGaussianModel model(Matrix::Identity(4, 4), sigma);
    const SignalBatch batch = sample_signals(model, Vector::Zero(4), t, 3);
    const Matrix centered = batch.rows.rowwise() - batch.rows.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(t);
    CHECK((cov - sigma).norm() < 10.0 * std::sqrt(16.0 / static_cast<double>(t)));
  }
}

TEST_CASE("average log-likelihood ratio estimates the kl divergence") {
  CounterRng rng(21);
  const Matrix sigma = random_spd(rng, 3);
  const LinearGaussianModel truth(Matrix::Identity(3, 2), sigma);
  const LinearGaussianModel cand = truth.with_sigma(sigma + Matrix::Identity(3, 3) * 0.5);
  Vector f(2), g(2);
  f << 0.2, -0.1;
  g << 0.7, 0.4;
  const std::size_t t = 100000;
  const SignalBatch batch = sample_signals(truth, f, t, 4);
  const Vector ratio = log_density_rows(truth, f, batch.rows) - log_density_rows(cand, g, batch.rows);
  const double mean = ratio.mean();
  const double sd = std::sqrt((ratio.array() - mean).square().sum() / static_cast<double>(t - 1));
  const double stderr_ = sd / std::sqrt(static_cast<double>(t));
  CHECK(std::abs(mean - kl_divergence(f, truth, g, cand)) <= 10.0 * stderr_);
}
