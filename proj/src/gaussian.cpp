#include "misbelief/gaussian.hpp"

#include "misbelief/errors.hpp"
#include "misbelief/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

namespace misbelief {
namespace {

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

LinearGaussianModel::LinearGaussianModel(Matrix design, Matrix sigma, std::size_t dimension_cap)
    : design_(std::move(design)), sigma_(std::move(sigma)) {
  const auto d = design_.rows();
  const auto l = design_.cols();
  require(d > 0 && l > 0, ErrorKind::InvalidModel, "M must be non-empty");
  require(static_cast<std::size_t>(d) <= dimension_cap && static_cast<std::size_t>(l) <= dimension_cap,
          ErrorKind::InvalidModel,
          "dimensions exceed the cap of " + std::to_string(dimension_cap));
  require(d >= l, ErrorKind::InvalidModel,
          "need D >= L, got D=" + std::to_string(d) + " L=" + std::to_string(l));
  require(sigma_.rows() == d && sigma_.cols() == d, ErrorKind::DimensionMismatch,
          "Sigma must be D x D with D=" + std::to_string(d));
  require(design_.allFinite() && sigma_.allFinite(), ErrorKind::InvalidModel, "non-finite entries");
  require(has_full_column_rank(design_), ErrorKind::InvalidModel, "M does not have rank L");
  require(is_symmetric(sigma_), ErrorKind::InvalidModel, "Sigma is not symmetric");
  require(is_positive_definite(sigma_), ErrorKind::InvalidModel, "Sigma is not positive definite");
  sigma_ = symmetrize(sigma_);
  sigma_chol_ = cholesky_lower(sigma_, "Sigma");
}

LinearGaussianModel LinearGaussianModel::with_sigma(Matrix sigma) const {
  return LinearGaussianModel(design_, std::move(sigma));
}

std::uint64_t LinearGaussianModel::digest() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t dims[2] = {design_.rows(), design_.cols()};
  fnv_mix(h, dims, sizeof dims);
  fnv_mix(h, design_.data(), sizeof(double) * static_cast<std::size_t>(design_.size()));
  fnv_mix(h, sigma_.data(), sizeof(double) * static_cast<std::size_t>(sigma_.size()));
  return h;
}

void check_fundamentals(const LinearGaussianModel& model, const Vector& f) {
  require(f.size() == model.fundamental_dim(), ErrorKind::DimensionMismatch,
          "fundamentals have length " + std::to_string(f.size()) + ", expected " +
              std::to_string(model.fundamental_dim()));
  require(f.allFinite(), ErrorKind::InvalidModel, "fundamentals must be finite");
}

Matrix sample_signal_rows(const LinearGaussianModel& model, const Vector& f, std::uint64_t first_row,
                          std::size_t count, std::uint64_t seed) {
  check_fundamentals(model, f);
  const auto d = model.signal_dim();
  const Vector mean = model.design() * f;
  const Matrix& chol = model.sigma_cholesky();
  const CounterRng rng(seed);
  Matrix rows(static_cast<Eigen::Index>(count), d);
  Vector z(d);
  for (Eigen::Index row = 0; row < static_cast<Eigen::Index>(count); ++row) {
    const auto base = (first_row + static_cast<std::uint64_t>(row)) * static_cast<std::uint64_t>(d);
    for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal_at(base + static_cast<std::uint64_t>(c));
    rows.row(row) = (mean + chol.triangularView<Eigen::Lower>() * z).transpose();
  }
  return rows;
}

SignalBatch sample_signals(const LinearGaussianModel& model, const Vector& f, std::size_t t,
                           std::uint64_t seed) {
  require(t >= 1, ErrorKind::InvalidModel, "need at least one signal");
  SignalBatch batch;
  batch.rows = sample_signal_rows(model, f, 0, t, seed);
  batch.seed = seed;
  batch.model_digest = model.digest();
  return batch;
}

double kl_divergence(const Vector& true_f, const LinearGaussianModel& true_model, const Vector& cand_f,
                     const LinearGaussianModel& cand_model) {
  require(true_model.signal_dim() == cand_model.signal_dim() &&
              true_model.fundamental_dim() == cand_model.fundamental_dim(),
          ErrorKind::DimensionMismatch, "models differ in dimension");
  require(true_model.design() == cand_model.design(), ErrorKind::DimensionMismatch,
          "models must share the design matrix M");
  check_fundamentals(true_model, true_f);
  check_fundamentals(cand_model, cand_f);

  const auto d = static_cast<double>(true_model.signal_dim());
  const auto cand_l = cand_model.sigma_cholesky().triangularView<Eigen::Lower>();
  // tr(S^-1 Sigma) = |L^-1 chol(Sigma)|_F^2
  const Matrix whitened = cand_l.solve(true_model.sigma_cholesky());
  const Vector shift = cand_l.solve(true_model.design() * (cand_f - true_f));
  const double log_det_ratio = 2.0 * (cand_model.sigma_cholesky().diagonal().array().log().sum() -
                                      true_model.sigma_cholesky().diagonal().array().log().sum());
  const double kl = 0.5 * (whitened.squaredNorm() + shift.squaredNorm() - d + log_det_ratio);
  return kl < 0.0 ? 0.0 : kl;
}

Vector log_density_rows(const LinearGaussianModel& model, const Vector& f, const Matrix& rows) {
  check_fundamentals(model, f);
  require(rows.cols() == model.signal_dim(), ErrorKind::DimensionMismatch,
          "signal rows have " + std::to_string(rows.cols()) + " columns, expected " +
              std::to_string(model.signal_dim()));
  const auto d = static_cast<double>(model.signal_dim());
  const double log_det = 2.0 * model.sigma_cholesky().diagonal().array().log().sum();
  const double constant = -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det);
  const Matrix residuals = (rows.rowwise() - (model.design() * f).transpose()).transpose();
  const Matrix whitened = model.sigma_cholesky().triangularView<Eigen::Lower>().solve(residuals);
  return (constant - 0.5 * whitened.colwise().squaredNorm().array()).matrix().transpose();
}

double log_likelihood(const LinearGaussianModel& model, const Vector& f, const SignalBatch& batch) {
  return log_density_rows(model, f, batch.rows).sum();
}

}  // namespace misbelief
