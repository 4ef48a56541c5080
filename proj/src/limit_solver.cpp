#include "misbelief/limit_solver.hpp"

#include "misbelief/errors.hpp"
#include "misbelief/rng.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace misbelief {

DogmaticConstraint DogmaticConstraint::make(PinMode pin, CovarianceMode cov, Eigen::Index pinned_index,
                                            double pinned_value, Vector pinned_vector, Matrix fixed_sigma) {
  require(!(pin == PinMode::PinAll && cov == CovarianceMode::Fixed), ErrorKind::InvalidConstraint,
          "pinning every fundamental and the covariance leaves nothing to learn");
  DogmaticConstraint c;
  c.pin_ = pin;
  c.cov_ = cov;
  if (pin == PinMode::PinOne) {
    require(pinned_index >= 0, ErrorKind::InvalidConstraint, "pinned index must be non-negative");
    require(std::isfinite(pinned_value), ErrorKind::InvalidConstraint, "pinned value must be finite");
    c.index_ = pinned_index;
    c.value_ = pinned_value;
  } else {
    require(pinned_vector.size() > 0 && pinned_vector.allFinite(), ErrorKind::InvalidConstraint,
            "pinned vector must be non-empty and finite");
    c.vector_ = std::move(pinned_vector);
  }
  if (cov == CovarianceMode::Fixed) {
    require(is_positive_definite(fixed_sigma), ErrorKind::InvalidConstraint,
            "fixed covariance must be symmetric positive definite");
    c.fixed_sigma_ = symmetrize(fixed_sigma);
  }
  return c;
}

DogmaticConstraint DogmaticConstraint::case1(Eigen::Index pinned_index, double pinned_value, Matrix fixed_sigma) {
  return make(PinMode::PinOne, CovarianceMode::Fixed, pinned_index, pinned_value, {}, std::move(fixed_sigma));
}

DogmaticConstraint DogmaticConstraint::case2(Vector pinned_vector) {
  return make(PinMode::PinAll, CovarianceMode::Free, 0, 0.0, std::move(pinned_vector), {});
}

DogmaticConstraint DogmaticConstraint::case3(Eigen::Index pinned_index, double pinned_value) {
  return make(PinMode::PinOne, CovarianceMode::Free, pinned_index, pinned_value, {}, {});
}

LimitCase DogmaticConstraint::limit_case() const noexcept {
  if (pin_ == PinMode::PinAll) return LimitCase::II;
  return cov_ == CovarianceMode::Fixed ? LimitCase::I : LimitCase::III;
}

DogmaticConstraint DogmaticConstraint::with_pinned_value(double value) const {
  require(pin_ == PinMode::PinOne, ErrorKind::InvalidConstraint, "only single-pin constraints carry a value");
  DogmaticConstraint c = *this;
  c.value_ = value;
  return c;
}

void DogmaticConstraint::check_against(const LinearGaussianModel& model) const {
  if (pin_ == PinMode::PinOne) {
    require(index_ < model.fundamental_dim(), ErrorKind::InvalidConstraint,
            "pinned index " + std::to_string(index_) + " out of range for L=" +
                std::to_string(model.fundamental_dim()));
  } else {
    require(vector_.size() == model.fundamental_dim(), ErrorKind::InvalidConstraint,
            "pinned vector must have length L");
  }
  if (cov_ == CovarianceMode::Fixed) {
    require(fixed_sigma_.rows() == model.signal_dim(), ErrorKind::InvalidConstraint,
            "fixed covariance must be D x D");
  }
}

Vector bias_ratios(const Matrix& design, const Matrix& sigma, Eigen::Index pinned) {
  require(pinned >= 0 && pinned < design.cols(), ErrorKind::InvalidConstraint, "pinned index out of range");
  const Matrix chol = cholesky_lower(sigma, "covariance");
  const Matrix whitened = chol.triangularView<Eigen::Lower>().solve(design);
  const Matrix info = whitened.transpose() * whitened;
  // The (ij) and (ji) readings of the formula coincide only for symmetric info.
  require(max_abs(info - info.transpose()) <= 1e-12 * std::max(1.0, max_abs(info)), ErrorKind::InvalidModel,
          "M^T S^-1 M is not symmetric");
  const Matrix info_sym = symmetrize(info);
  const double cond = spd_condition_number(info_sym);
  require(cond <= kMaxConditionNumber, ErrorKind::IllConditioned,
          "condition number of M^T S^-1 M is " + std::to_string(cond));
  Eigen::LLT<Matrix> llt(info_sym);
  require(llt.info() == Eigen::Success, ErrorKind::IllConditioned, "M^T S^-1 M is not positive definite");
  const Vector column = llt.solve(Vector::Unit(design.cols(), pinned));
  return column / column(pinned);
}

namespace {

void check_case(const DogmaticConstraint& c, LimitCase expected, const char* name) {
  require(c.limit_case() == expected, ErrorKind::InvalidConstraint,
          std::string(name) + " requires a matching constraint");
}

Matrix covariance_bias(const Matrix& design, const Vector& delta) {
  const Vector y = design * delta;
  return y * y.transpose();
}

LimitBelief pin_one_solution(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c,
                             const Matrix& sigma_for_ratios) {
  const auto i = c.pinned_index();
  const double overconfidence = c.pinned_value() - true_f(i);
  LimitBelief belief;
  belief.f_tilde = true_f + bias_ratios(model.design(), sigma_for_ratios, i) * overconfidence;
  belief.f_tilde(i) = c.pinned_value();
  return belief;
}

}  // namespace

LimitBelief solve_case1(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c) {
  check_case(c, LimitCase::I, "solve_case1");
  check_fundamentals(model, true_f);
  c.check_against(model);
  LimitBelief belief = pin_one_solution(model, true_f, c, c.fixed_sigma());
  belief.sigma_tilde = c.fixed_sigma();
  return belief;
}

LimitBelief solve_case2(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c) {
  check_case(c, LimitCase::II, "solve_case2");
  check_fundamentals(model, true_f);
  c.check_against(model);
  LimitBelief belief;
  belief.f_tilde = c.pinned_vector();
  belief.sigma_tilde = model.sigma() + covariance_bias(model.design(), belief.f_tilde - true_f);
  return belief;
}

LimitBelief solve_case3(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c) {
  check_case(c, LimitCase::III, "solve_case3");
  check_fundamentals(model, true_f);
  c.check_against(model);
  LimitBelief belief = pin_one_solution(model, true_f, c, model.sigma());
  belief.sigma_tilde = model.sigma() + covariance_bias(model.design(), belief.f_tilde - true_f);
  return belief;
}

LimitBelief solve_limit(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c) {
  switch (c.limit_case()) {
    case LimitCase::I: return solve_case1(model, true_f, c);
    case LimitCase::II: return solve_case2(model, true_f, c);
    case LimitCase::III: return solve_case3(model, true_f, c);
  }
  fail(ErrorKind::InvalidConstraint, "unknown constraint case");
}

namespace {

/// KL(target || N(M f_hat, L L^T)) as a function of the free parameters.
/// Scratch buffers make evaluation allocation-free.
class KlObjective {
 public:
  KlObjective(const Matrix& design, const GaussianTarget& target, const DogmaticConstraint& c)
      : design_(design), target_mean_(target.mean), d_(design.rows()) {
    const Matrix target_chol = cholesky_lower(target.covariance, "target covariance");
    target_chol_ = target_chol;
    target_log_det_ = 2.0 * target_chol.diagonal().array().log().sum();
    const auto l = design.cols();
    base_f_ = Vector::Zero(l);
    if (c.pin_mode() == PinMode::PinOne) {
      base_f_(c.pinned_index()) = c.pinned_value();
      for (Eigen::Index k = 0; k < l; ++k)
        if (k != c.pinned_index()) free_.push_back(k);
    } else {
      base_f_ = c.pinned_vector();
    }
    learn_cov_ = c.covariance_mode() == CovarianceMode::Free;
    if (!learn_cov_) fixed_chol_ = cholesky_lower(c.fixed_sigma(), "fixed covariance");
    chol_.assign(static_cast<std::size_t>(d_ * d_), 0.0);
    work_.assign(static_cast<std::size_t>(d_ * d_), 0.0);
    resid_.assign(static_cast<std::size_t>(d_), 0.0);
    f_ = base_f_;
  }

  Eigen::Index size() const {
    const auto nf = static_cast<Eigen::Index>(free_.size());
    return learn_cov_ ? nf + d_ * (d_ + 1) / 2 : nf;
  }

  double operator()(const Vector& x) {
    const auto nf = free_.size();
    for (std::size_t k = 0; k < nf; ++k) f_(free_[k]) = x(static_cast<Eigen::Index>(k));
    const auto d = static_cast<std::size_t>(d_);
    double log_det = 0.0;
    if (learn_cov_) {
      std::size_t p = nf;
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < r; ++c) chol_[r * d + c] = x(static_cast<Eigen::Index>(p++));
        const double log_diag = x(static_cast<Eigen::Index>(p++));
        if (log_diag > 300.0 || log_diag < -300.0) return std::numeric_limits<double>::infinity();
        chol_[r * d + r] = std::exp(log_diag);
        log_det += 2.0 * log_diag;
      }
    } else {
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c <= r; ++c)
          chol_[r * d + c] = fixed_chol_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        log_det += 2.0 * std::log(chol_[r * d + r]);
      }
    }
    // residual = M f - target mean, then forward-solve L u = residual
    double quad = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      double v = -target_mean_(static_cast<Eigen::Index>(r));
      for (Eigen::Index k = 0; k < f_.size(); ++k) v += design_(static_cast<Eigen::Index>(r), k) * f_(k);
      for (std::size_t c = 0; c < r; ++c) v -= chol_[r * d + c] * resid_[c];
      resid_[r] = v / chol_[r * d + r];
      quad += resid_[r] * resid_[r];
    }
    // W = L^-1 T is lower triangular; trace term is |W|_F^2
    double trace = 0.0;
    for (std::size_t col = 0; col < d; ++col) {
      for (std::size_t r = col; r < d; ++r) {
        double v = target_chol_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
        for (std::size_t c = col; c < r; ++c) v -= chol_[r * d + c] * work_[c * d + col];
        work_[r * d + col] = v / chol_[r * d + r];
        trace += work_[r * d + col] * work_[r * d + col];
      }
    }
    return 0.5 * (trace + quad - static_cast<double>(d) + log_det - target_log_det_);
  }

  Vector pack(const LimitBelief& belief) const {
    Vector x(size());
    for (std::size_t k = 0; k < free_.size(); ++k) x(static_cast<Eigen::Index>(k)) = belief.f_tilde(free_[k]);
    if (learn_cov_) pack_cholesky(cholesky_lower(belief.sigma_tilde, "start covariance"), x);
    return x;
  }

  void pack_cholesky(const Matrix& chol, Vector& x) const {
    auto p = static_cast<Eigen::Index>(free_.size());
    for (Eigen::Index r = 0; r < d_; ++r) {
      for (Eigen::Index c = 0; c < r; ++c) x(p++) = chol(r, c);
      x(p++) = std::log(chol(r, r));
    }
  }

  LimitBelief unpack(const Vector& x) const {
    LimitBelief belief;
    belief.f_tilde = base_f_;
    for (std::size_t k = 0; k < free_.size(); ++k) belief.f_tilde(free_[k]) = x(static_cast<Eigen::Index>(k));
    if (learn_cov_) {
      Matrix chol = Matrix::Zero(d_, d_);
      auto p = static_cast<Eigen::Index>(free_.size());
      for (Eigen::Index r = 0; r < d_; ++r) {
        for (Eigen::Index c = 0; c < r; ++c) chol(r, c) = x(p++);
        chol(r, r) = std::exp(x(p++));
      }
      belief.sigma_tilde = chol * chol.transpose();
    } else {
      belief.sigma_tilde = fixed_chol_ * fixed_chol_.transpose();
    }
    return belief;
  }

  /// Random start: free fundamentals scattered around the ones implied by
  /// `around`, covariance a randomly scaled and tilted factor of the target's.
  Vector random_start(CounterRng& rng, const Vector& around, double spread) const {
    Vector x(size());
    for (std::size_t k = 0; k < free_.size(); ++k)
      x(static_cast<Eigen::Index>(k)) = around(free_[k]) + spread * rng.normal();
    if (learn_cov_) {
      Matrix chol = target_chol_;
      for (Eigen::Index r = 0; r < d_; ++r) {
        const double scale = std::sqrt(target_chol_.row(r).squaredNorm());
        for (Eigen::Index c = 0; c < r; ++c) chol(r, c) += 0.3 * scale * rng.normal();
        chol(r, r) = std::abs(chol(r, r)) * rng.uniform(0.6, 1.8);
      }
      pack_cholesky(chol, x);
    }
    return x;
  }

 private:
  const Matrix& design_;
  Vector target_mean_;
  Matrix target_chol_;
  double target_log_det_ = 0.0;
  Eigen::Index d_;
  Vector base_f_;
  Vector f_;
  std::vector<Eigen::Index> free_;
  bool learn_cov_ = false;
  Matrix fixed_chol_;
  std::vector<double> chol_;
  std::vector<double> work_;
  std::vector<double> resid_;
};

}  // namespace

OracleResult minimize_kl_over_support(const Matrix& design, const GaussianTarget& target,
                                      const DogmaticConstraint& c, const OracleOptions& options,
                                      const std::optional<LimitBelief>& seed_point) {
  require(target.mean.size() == design.rows() && target.covariance.rows() == design.rows(),
          ErrorKind::DimensionMismatch, "target must live in signal space");
  KlObjective objective(design, target, c);
  const Objective fn = [&objective](const Vector& x) { return objective(x); };
  CounterRng rng(options.seed);

  // Random starts scatter around the least-squares fit of the target mean.
  const Vector ls_fit = design.colPivHouseholderQr().solve(target.mean);
  const double spread = 1.0 + (c.pin_mode() == PinMode::PinOne ? std::abs(c.pinned_value() - ls_fit(c.pinned_index())) : 0.0);

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  double best_unconverged_grad = std::numeric_limits<double>::infinity();
  const int starts = std::max(1, options.starts);
  for (int s = 0; s < starts; ++s) {
    Vector x0 = (s == 0 && seed_point) ? objective.pack(*seed_point) : objective.random_start(rng, ls_fit, spread);
    const BfgsResult run = minimize_bfgs(fn, std::move(x0), options.bfgs);
    if (!run.converged) {
      best_unconverged_grad = std::min(best_unconverged_grad, run.gradient_norm);
      continue;
    }
    ++best.converged_starts;
    if (run.value < best.objective) {
      best.objective = run.value;
      best.gradient_norm = run.gradient_norm;
      best.best_start = s;
      best.belief = objective.unpack(run.x);
    }
  }
  require(best.converged_starts > 0, ErrorKind::NonConvergence,
          "no start reached gradient tolerance; best gradient norm " + std::to_string(best_unconverged_grad));
  return best;
}

OracleResult numeric_oracle(const LinearGaussianModel& model, const Vector& true_f, const DogmaticConstraint& c,
                            const OracleOptions& options) {
  check_fundamentals(model, true_f);
  c.check_against(model);
  std::optional<LimitBelief> seed_point;
  try {
    seed_point = solve_limit(model, true_f, c);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IllConditioned) throw;
  }
  const GaussianTarget target{model.design() * true_f, model.sigma()};
  return minimize_kl_over_support(model.design(), target, c, options, seed_point);
}

double kl_at(const LinearGaussianModel& model, const Vector& true_f, const LimitBelief& belief) {
  return kl_divergence(true_f, model, belief.f_tilde, model.with_sigma(belief.sigma_tilde));
}

double projected_gradient_norm(const LinearGaussianModel& model, const Vector& true_f,
                               const DogmaticConstraint& c, const LimitBelief& belief, double h) {
  std::vector<Eigen::Index> free;
  if (c.pin_mode() == PinMode::PinOne)
    for (Eigen::Index k = 0; k < model.fundamental_dim(); ++k)
      if (k != c.pinned_index()) free.push_back(k);
  const bool learn_cov = c.covariance_mode() == CovarianceMode::Free;
  const auto d = model.signal_dim();
  const auto n_cov = learn_cov ? d * (d + 1) / 2 : 0;
  const auto n = static_cast<Eigen::Index>(free.size()) + n_cov;

  // Plain KL formula on explicit (f, Sigma); perturbing Sigma entry (a,b)
  // moves both symmetric positions.
  const Matrix& design = model.design();
  const Vector target_mean = design * true_f;
  auto kl = [&](const Vector& x) {
    Vector f = belief.f_tilde;
    for (std::size_t k = 0; k < free.size(); ++k) f(free[k]) = x(static_cast<Eigen::Index>(k));
    Matrix sigma = belief.sigma_tilde;
    auto p = static_cast<Eigen::Index>(free.size());
    if (learn_cov) {
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index col = 0; col <= r; ++col) {
          sigma(r, col) = x(p);
          sigma(col, r) = x(p);
          ++p;
        }
    }
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Matrix l = llt.matrixL();
    const Matrix w = l.triangularView<Eigen::Lower>().solve(model.sigma_cholesky());
    const Vector u = l.triangularView<Eigen::Lower>().solve(design * f - target_mean);
    const double log_det = 2.0 * (l.diagonal().array().log().sum() -
                                  model.sigma_cholesky().diagonal().array().log().sum());
    return 0.5 * (w.squaredNorm() + u.squaredNorm() - static_cast<double>(d) + log_det);
  };

  Vector x(n);
  for (std::size_t k = 0; k < free.size(); ++k) x(static_cast<Eigen::Index>(k)) = belief.f_tilde(free[k]);
  auto p = static_cast<Eigen::Index>(free.size());
  if (learn_cov)
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index col = 0; col <= r; ++col) x(p++) = belief.sigma_tilde(r, col);
  if (n == 0) return 0.0;
  return central_difference_gradient(kl, x, h).lpNorm<Eigen::Infinity>();
}

}  // namespace misbelief
