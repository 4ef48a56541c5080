#pragma once

#include "misbelief/gaussian.hpp"
#include "misbelief/optimize.hpp"

#include <cstdint>
#include <optional>

namespace misbelief {

enum class PinMode { PinOne, PinAll };
enum class CovarianceMode { Free, Fixed };

/// Which of the three inference problems a constraint describes:
/// I   one fundamental pinned, covariance fixed;
/// II  every fundamental pinned, covariance learned;
/// III one fundamental pinned, covariance learned.
enum class LimitCase { I, II, III };

/// The part of the learner's prior that is degenerate.
class DogmaticConstraint {
 public:
  /// Generic constructor; rejects PinAll with a fixed covariance and
  /// non-PD fixed covariances.
  static DogmaticConstraint make(PinMode pin, CovarianceMode cov, Eigen::Index pinned_index,
                                 double pinned_value, Vector pinned_vector, Matrix fixed_sigma);

  static DogmaticConstraint case1(Eigen::Index pinned_index, double pinned_value, Matrix fixed_sigma);
  static DogmaticConstraint case2(Vector pinned_vector);
  static DogmaticConstraint case3(Eigen::Index pinned_index, double pinned_value);

  PinMode pin_mode() const noexcept { return pin_; }
  CovarianceMode covariance_mode() const noexcept { return cov_; }
  LimitCase limit_case() const noexcept;

  Eigen::Index pinned_index() const noexcept { return index_; }
  double pinned_value() const noexcept { return value_; }
  const Vector& pinned_vector() const noexcept { return vector_; }
  const Matrix& fixed_sigma() const noexcept { return fixed_sigma_; }

  /// Same constraint with a different pinned value (PinOne only).
  DogmaticConstraint with_pinned_value(double value) const;

  /// Throws InvalidConstraint when the constraint does not fit the model.
  void check_against(const LinearGaussianModel& model) const;

 private:
  DogmaticConstraint() = default;

  PinMode pin_ = PinMode::PinOne;
  CovarianceMode cov_ = CovarianceMode::Free;
  Eigen::Index index_ = 0;
  double value_ = 0.0;
  Vector vector_;
  Matrix fixed_sigma_;
};

/// Concentration point (f~, Sigma~) of the learner's posterior.
struct LimitBelief {
  Vector f_tilde;
  Matrix sigma_tilde;
};

/// Column `pinned` of (M^T S^-1 M)^-1 divided by its diagonal entry. Entry j is
/// the bias on fundamental j per unit of overconfidence about the pinned one.
/// Throws IllConditioned when cond(M^T S^-1 M) > 1e12.
Vector bias_ratios(const Matrix& design, const Matrix& sigma, Eigen::Index pinned);

LimitBelief solve_case1(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c);
LimitBelief solve_case2(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c);
LimitBelief solve_case3(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c);

/// Dispatches on the constraint's case.
LimitBelief solve_limit(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c);

/// Target distribution of the KL objective: N(mean, covariance) over signals.
/// For the oracle this is N(M f, Sigma); for sample fits it is the empirical
/// mean and covariance of a batch.
struct GaussianTarget {
  Vector mean;
  Matrix covariance;
};

struct OracleOptions {
  int starts = 5;
  std::uint64_t seed = 0x5eed;
  BfgsOptions bfgs{};
};

struct OracleResult {
  LimitBelief belief;
  double objective = 0.0;
  double gradient_norm = 0.0;
  int best_start = 0;
  int converged_starts = 0;
};

/// Minimizes KL(target || N(M f_hat, Sigma_hat)) over the constraint's support
/// by BFGS with numerical gradients. Free fundamentals are unconstrained; a
/// free covariance is parameterized by its Cholesky factor with log-diagonal.
/// Start 0 is `seed_point` when given; the rest are random. The best
/// converged start wins; NonConvergence when none reach the gradient tolerance.
OracleResult minimize_kl_over_support(const Matrix& design, const GaussianTarget& target,
                                      const DogmaticConstraint& c, const OracleOptions& options,
                                      const std::optional<LimitBelief>& seed_point);

/// Numerical KL minimization against the true model, seeded by the closed form.
OracleResult numeric_oracle(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c,
                            const OracleOptions& options = {});

/// KL(true || belief) for a candidate point with the model's design.
double kl_at(const LinearGaussianModel& model, const Vector& true_f, const LimitBelief& belief);

/// Sup-norm of the central-difference gradient of KL at `belief` with respect
/// to the coordinates the constraint leaves free (free fundamentals and, when
/// learned, the distinct entries of Sigma~).
double projected_gradient_norm(const LinearGaussianModel& model, const Vector& true_f,
                               const DogmaticConstraint& c, const LimitBelief& belief, double h = 1e-6);

}  // namespace misbelief
