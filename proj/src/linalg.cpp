#include "misbelief/linalg.hpp"

#include "misbelief/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace misbelief {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidConstraint: return "InvalidConstraint";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::InvalidScenario: return "InvalidScenario";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::MismatchedSocieties: return "MismatchedSocieties";
    case ErrorKind::UnknownParameter: return "UnknownParameter";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  return max_abs(a - a.transpose()) <= kSymmetryRelTol * std::max(1.0, max_abs(a));
}

bool is_positive_definite(const Matrix& a) {
  if (a.rows() == 0 || !is_symmetric(a) || !a.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return false;
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  return smallest > kPdRelTol * std::max(largest, 1.0);
}

bool has_full_column_rank(const Matrix& m) {
  if (m.cols() == 0 || m.rows() < m.cols() || !m.allFinite()) return false;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  return s.maxCoeff() > 0.0 && s.minCoeff() > kRankRelTol * s.maxCoeff();
}

double spd_condition_number(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a), Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues().minCoeff();
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return eig.eigenvalues().maxCoeff() / smallest;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double spd_log_det(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  require(llt.info() == Eigen::Success, ErrorKind::InvalidModel, "log det of a non-PD matrix");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

Matrix cholesky_lower(const Matrix& a, const std::string& what) {
  Eigen::LLT<Matrix> llt(a);
  require(llt.info() == Eigen::Success, ErrorKind::InvalidModel, what + " is not positive definite");
  return llt.matrixL();
}

}  // namespace misbelief
