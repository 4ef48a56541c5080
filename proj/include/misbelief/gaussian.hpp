#pragma once

#include "misbelief/linalg.hpp"

#include <cstddef>
#include <cstdint>

namespace misbelief {

/// Signal process r_t = M f + e_t with e_t ~ N(0, Sigma).
///
/// Construction validates the model: D >= L, M of full column rank,
/// Sigma symmetric positive definite, both finite, and D within the cap.
/// Values are immutable afterwards.
class LinearGaussianModel {
 public:
  LinearGaussianModel(Matrix design, Matrix sigma, std::size_t dimension_cap = kDefaultDimensionCap);

  const Matrix& design() const noexcept { return design_; }
  const Matrix& sigma() const noexcept { return sigma_; }
  /// Lower Cholesky factor of Sigma.
  const Matrix& sigma_cholesky() const noexcept { return sigma_chol_; }

  Eigen::Index signal_dim() const noexcept { return design_.rows(); }
  Eigen::Index fundamental_dim() const noexcept { return design_.cols(); }

  /// Same design matrix, different error covariance.
  LinearGaussianModel with_sigma(Matrix sigma) const;

  /// FNV-1a digest over dimensions and the raw bytes of M and Sigma.
  std::uint64_t digest() const noexcept;

 private:
  Matrix design_;
  Matrix sigma_;
  Matrix sigma_chol_;
};

/// Realizations r_1..r_T stored row-wise.
struct SignalBatch {
  Matrix rows;  // T x D
  std::uint64_t seed = 0;
  std::uint64_t model_digest = 0;

  Eigen::Index size() const noexcept { return rows.rows(); }
};

/// Checks the fundamentals vector has length L and finite entries.
void check_fundamentals(const LinearGaussianModel& model, const Vector& f);

/// T i.i.d. draws of M f + chol(Sigma) z. Row t depends only on (seed, t), so a
/// shorter batch with the same seed is a prefix of a longer one.
SignalBatch sample_signals(const LinearGaussianModel& model, const Vector& f, std::size_t t,
                           std::uint64_t seed);

/// Rows first_row .. first_row + count - 1 of the stream sample_signals draws.
Matrix sample_signal_rows(const LinearGaussianModel& model, const Vector& f, std::uint64_t first_row,
                          std::size_t count, std::uint64_t seed);

/// KL( N(M f, Sigma) || N(M f_hat, Sigma_hat) ) for two models sharing M.
double kl_divergence(const Vector& true_f, const LinearGaussianModel& true_model, const Vector& cand_f,
                     const LinearGaussianModel& cand_model);

/// Sum over rows of log N(r_z; M f, Sigma).
double log_likelihood(const LinearGaussianModel& model, const Vector& f, const SignalBatch& batch);

/// Per-row log densities, for variance estimates.
Vector log_density_rows(const LinearGaussianModel& model, const Vector& f, const Matrix& rows);

}  // namespace misbelief
