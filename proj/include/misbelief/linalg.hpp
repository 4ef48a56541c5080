#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace misbelief {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Largest D or L accepted by default.
inline constexpr std::size_t kDefaultDimensionCap = 64;

/// Relative eigenvalue floor for positive definiteness, and singular-value
/// floor for full column rank.
inline constexpr double kPdRelTol = 1e-10;
inline constexpr double kRankRelTol = 1e-10;
inline constexpr double kSymmetryRelTol = 1e-9;

/// Largest condition number of M^T S^{-1} M the closed-form solvers accept.
inline constexpr double kMaxConditionNumber = 1e12;

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

double max_abs(const Matrix& m);

/// |A - A^T| bounded by kSymmetryRelTol * max(1, |A|).
bool is_symmetric(const Matrix& a);

/// Symmetric and smallest eigenvalue above 1e-10 * max(largest, 1).
bool is_positive_definite(const Matrix& a);

/// Full column rank in the sense smallest / largest singular value > 1e-10.
bool has_full_column_rank(const Matrix& m);

/// Spectral condition number of a symmetric positive definite matrix.
double spd_condition_number(const Matrix& a);

Matrix symmetrize(const Matrix& a);

/// log det of an SPD matrix through its Cholesky factor.
double spd_log_det(const Matrix& a);

/// Largest singular value.
double operator_norm(const Matrix& a);

/// Lower Cholesky factor; throws InvalidModel with `what` on failure.
Matrix cholesky_lower(const Matrix& a, const std::string& what);

}  // namespace misbelief
