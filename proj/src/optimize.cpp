#include "misbelief/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace misbelief {

Vector central_difference_gradient(const Objective& f, const Vector& x, double h, int* evaluations) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(x(k)));
    probe(k) = x(k) + step;
    const double up = f(probe);
    probe(k) = x(k) - step;
    const double down = f(probe);
    probe(k) = x(k);
    g(k) = (up - down) / (2.0 * step);
  }
  if (evaluations) *evaluations += static_cast<int>(2 * x.size());
  return g;
}

BfgsResult minimize_bfgs(const Objective& f, Vector x0, const BfgsOptions& options) {
  BfgsResult result;
  const auto n = x0.size();
  result.x = std::move(x0);
  result.value = f(result.x);
  result.evaluations = 1;
  if (n == 0) {
    result.converged = std::isfinite(result.value);
    return result;
  }

  // Far from the optimum one-sided differences are accurate enough and cost
  // half as much; switch to central differences for good once the gradient
  // drops below coarse_gradient.
  bool central = false;
  auto gradient = [&](const Vector& x, double fx) {
    if (central) return central_difference_gradient(f, x, options.fd_step, &result.evaluations);
    Vector g(x.size());
    Vector probe = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double step = options.forward_step * std::max(1.0, std::abs(x(k)));
      probe(k) = x(k) + step;
      g(k) = (f(probe) - fx) / step;
      probe(k) = x(k);
    }
    result.evaluations += static_cast<int>(x.size());
    if (g.lpNorm<Eigen::Infinity>() < options.coarse_gradient) {
      central = true;
      return central_difference_gradient(f, x, options.fd_step, &result.evaluations);
    }
    return g;
  };

  Vector g = gradient(result.x, result.value);
  Matrix h_inv = Matrix::Identity(n, n);
  bool fresh_hessian = true;
  int stalls = 0;
  int polish_steps = 0;

  for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(gnorm) || gnorm <= options.polish_tol) break;
    if (gnorm <= options.gradient_tol && ++polish_steps > options.polish_iterations) break;

    Vector direction = -h_inv * g;
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      fresh_hessian = true;
      direction = -g;
      slope = -g.squaredNorm();
    }
    if (fresh_hessian) {
      // keep the first steepest-descent step at unit length in parameter space
      const double len = direction.norm();
      if (len > 1.0) {
        direction /= len;
        slope /= len;
      }
    }

    double alpha = 1.0;
    Vector candidate(n);
    Vector g_candidate;
    double value_candidate = 0.0;
    bool accepted = false;
    const double flat = 1e-14 * (1.0 + std::abs(result.value));
    for (int backtrack = 0; backtrack < 40; ++backtrack, alpha *= 0.5) {
      candidate = result.x + alpha * direction;
      value_candidate = f(candidate);
      ++result.evaluations;
      if (!std::isfinite(value_candidate)) continue;
      if (value_candidate <= result.value + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the objective cannot resolve the decrease; fall back
      // to accepting steps that shrink the gradient.
      if (backtrack < 3 && std::abs(value_candidate - result.value) <= flat) {
        g_candidate = gradient(candidate, value_candidate);
        if (g_candidate.lpNorm<Eigen::Infinity>() < gnorm) {
          accepted = true;
          break;
        }
        g_candidate.resize(0);
      }
    }

    if (!accepted) {
      if (fresh_hessian || gnorm <= options.gradient_tol) break;
      h_inv.setIdentity();
      fresh_hessian = true;
      if (++stalls > 3) break;
      continue;
    }

    if (g_candidate.size() == 0) g_candidate = gradient(candidate, value_candidate);
    const Vector s = candidate - result.x;
    const Vector y = g_candidate - g;
    const double sy = s.dot(y);
    if (sy > 1e-300 && std::isfinite(sy)) {
      if (fresh_hessian) {
        h_inv *= sy / y.squaredNorm();
        fresh_hessian = false;
      }
      const double rho = 1.0 / sy;
      const Vector hy = h_inv * y;
      const double yhy = y.dot(hy);
      h_inv += ((1.0 + rho * yhy) * rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
    result.x = candidate;
    result.value = value_candidate;
    g = g_candidate;
  }

  result.gradient_norm = g.lpNorm<Eigen::Infinity>();
  result.converged = std::isfinite(result.value) && result.gradient_norm <= options.gradient_tol;
  return result;
}

}  // namespace misbelief
