#pragma once

#include "misbelief/linalg.hpp"

#include <functional>

namespace misbelief {

using Objective = std::function<double(const Vector&)>;

struct BfgsOptions {
  int max_iterations = 3000;
  /// Converged when the sup-norm of the finite-difference gradient is below this.
  double gradient_tol = 1e-8;
  /// Iteration continues past gradient_tol down to this level while it makes progress.
  double polish_tol = 1e-11;
  /// Extra iterations allowed once gradient_tol is met.
  int polish_iterations = 8;
  double fd_step = 1e-6;
  double forward_step = 1e-7;
  double coarse_gradient = 1e-3;
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Central differences with step h * max(1, |x_k|).
Vector central_difference_gradient(const Objective& f, const Vector& x, double h, int* evaluations = nullptr);

/// Quasi-Newton minimization (inverse-Hessian BFGS, backtracking line search)
/// driven entirely by finite-difference gradients.
BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options = {});

}  // namespace misbelief
