#include "misbelief/errors.hpp"
#include "misbelief/instances.hpp"
#include "misbelief/limit_solver.hpp"
#include "misbelief/verify.hpp"

#include <doctest.h>

using namespace misbelief;

namespace {

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

TEST_CASE("constraint combinations") {
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(DogmaticConstraint::case1(0, 1.0, id).limit_case() == LimitCase::I);
  CHECK(DogmaticConstraint::case2(Vector::Zero(2)).limit_case() == LimitCase::II);
  CHECK(DogmaticConstraint::case3(0, 1.0).limit_case() == LimitCase::III);
  CHECK(kind_of([&] {
          DogmaticConstraint::make(PinMode::PinAll, CovarianceMode::Fixed, 0, 0.0, Vector::Zero(2), id);
        }) == ErrorKind::InvalidConstraint);
  Matrix not_pd(2, 2);
  not_pd << 1, 3, 3, 1;
  CHECK(kind_of([&] { DogmaticConstraint::case1(0, 1.0, not_pd); }) == ErrorKind::InvalidConstraint);

  const LinearGaussianModel model(Matrix::Identity(2, 2), id);
  CHECK(kind_of([&] { DogmaticConstraint::case3(5, 1.0).check_against(model); }) == ErrorKind::InvalidConstraint);
  CHECK(kind_of([&] { DogmaticConstraint::case2(Vector::Zero(3)).check_against(model); }) ==
        ErrorKind::InvalidConstraint);
}

TEST_CASE("case I basics") {
  CounterRng rng(4);
  const Matrix sigma = random_spd(rng, 3);
  Matrix design(3, 2);
  design << 1, 0.5, -0.2, 1, 0.3, 0.3;
  const LinearGaussianModel model(design, sigma);
  Vector f(2);
  f << 0.4, -1.1;

  const LimitBelief none = solve_case1(model, f, DogmaticConstraint::case1(0, f(0), sigma));
  CHECK((none.f_tilde - f).cwiseAbs().maxCoeff() == 0.0);
  CHECK((none.sigma_tilde - sigma).cwiseAbs().maxCoeff() == 0.0);

  // independence: identity design with diagonal learner covariance
  const LinearGaussianModel diag(Matrix::Identity(3, 3), Vector(Vector::LinSpaced(3, 1, 2)).asDiagonal().toDenseMatrix());
  const Vector g = Vector::Zero(3);
  const LimitBelief indep = solve_case1(diag, g, DogmaticConstraint::case1(1, 2.0, diag.sigma()));
  CHECK(indep.f_tilde(1) == 2.0);
  CHECK(indep.f_tilde(0) == 0.0);
  CHECK(indep.f_tilde(2) == 0.0);
}

TEST_CASE("case II rank-one update") {
  const LinearGaussianModel model(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Vector pinned(2);
  pinned << 1, 0;
  const LimitBelief b = solve_case2(model, Vector::Zero(2), DogmaticConstraint::case2(pinned));
  Matrix expected(2, 2);
  expected << 2, 0, 0, 1;
  CHECK((b.sigma_tilde - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(b.f_tilde == pinned);

  const LimitBelief zero = solve_case2(model, pinned, DogmaticConstraint::case2(pinned));
  CHECK((zero.sigma_tilde - model.sigma()).cwiseAbs().maxCoeff() == 0.0);

  for (std::uint64_t k = 0; k < 50; ++k) {
    const RandomInstance inst = random_instance(7, k);
    const LimitBelief r = solve_case2(inst.model, inst.true_f, inst.case2());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(r.sigma_tilde - inst.model.sigma());
    const Vector ev = eig.eigenvalues();
    CHECK(ev.minCoeff() > -1e-12);
    if (ev.size() > 1) CHECK(ev(ev.size() - 2) < 1e-10 * std::max(1.0, ev.maxCoeff()));
  }
}

TEST_CASE("case III equals case I with the true covariance") {
  for (std::uint64_t k = 0; k < 100; ++k) {
    const RandomInstance inst = random_instance(11, k);
    const LimitBelief three = solve_case3(inst.model, inst.true_f, inst.case3());
    const DogmaticConstraint c1 =
        DogmaticConstraint::case1(inst.pinned_index, inst.case3().pinned_value(), inst.model.sigma());
    const LimitBelief one = solve_case1(inst.model, inst.true_f, c1);
    CHECK((three.f_tilde - one.f_tilde).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("case III with identity design and diagonal covariance has no spillover") {
  const LinearGaussianModel model(Matrix::Identity(3, 3), Vector(Vector::LinSpaced(3, 0.5, 2)).asDiagonal().toDenseMatrix());
  const LimitBelief b = solve_case3(model, Vector::Zero(3), DogmaticConstraint::case3(2, 1.5));
  CHECK(b.f_tilde(0) == 0.0);
  CHECK(b.f_tilde(1) == 0.0);
}

TEST_CASE("bias linear in overconfidence") {
  for (std::uint64_t k = 0; k < 50; ++k) {
    const RandomInstance inst = random_instance(12, k);
    const double base = inst.true_f(inst.pinned_index);
    const DogmaticConstraint once = DogmaticConstraint::case3(inst.pinned_index, base + inst.overconfidence);
    const DogmaticConstraint twice = once.with_pinned_value(base + 2.0 * inst.overconfidence);
    const Vector b1 = solve_case3(inst.model, inst.true_f, once).f_tilde - inst.true_f;
    const Vector b2 = solve_case3(inst.model, inst.true_f, twice).f_tilde - inst.true_f;
    CHECK((b2 - 2.0 * b1).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, b2.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("ill-conditioned information matrix is rejected") {
  Matrix design(2, 2);
  design << 1, 1, 1, 1 + 1e-7;
  Matrix sigma = Matrix::Identity(2, 2);
  CHECK(kind_of([&] { bias_ratios(design, sigma, 0); }) == ErrorKind::IllConditioned);
}

TEST_CASE("numeric oracle agrees with every closed form") {
  for (std::uint64_t k = 0; k < 12; ++k) {
    const RandomInstance inst = random_instance(31, k);
    for (const DogmaticConstraint& c : {inst.case1(), inst.case2(), inst.case3()}) {
      const LimitBelief closed = solve_limit(inst.model, inst.true_f, c);
      const OracleResult oracle = numeric_oracle(inst.model, inst.true_f, c);
      CHECK(relative_error(oracle.belief.f_tilde, closed.f_tilde) <= 1e-5);
      CHECK(frobenius_relative_error(oracle.belief.sigma_tilde, closed.sigma_tilde) <= 1e-5);
      CHECK(oracle.objective <= kl_at(inst.model, inst.true_f, closed) + 1e-9);
    }
  }
}

TEST_CASE("oracle returns the true covariance for a correct dogmatic belief") {
  const RandomInstance inst = random_instance(41, 0);
  const OracleResult r = numeric_oracle(inst.model, inst.true_f, DogmaticConstraint::case2(inst.true_f));
  CHECK(frobenius_relative_error(r.belief.sigma_tilde, inst.model.sigma()) <= 1e-6);
}

TEST_CASE("closed forms are first-order optimal and beat nearby points") {
  CounterRng rng(55);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const RandomInstance inst = random_instance(51, k);
    for (const DogmaticConstraint& c : {inst.case1(), inst.case2(), inst.case3()}) {
      const LimitBelief closed = solve_limit(inst.model, inst.true_f, c);
      const double kl = kl_at(inst.model, inst.true_f, closed);
      CHECK(projected_gradient_norm(inst.model, inst.true_f, c, closed) <= 1e-6 * (1.0 + std::abs(kl)));
      for (int p = 0; p < 20; ++p) {
        LimitBelief moved = closed;
        for (Eigen::Index j = 0; j < moved.f_tilde.size(); ++j)
          if (c.pin_mode() == PinMode::PinOne && j != c.pinned_index()) moved.f_tilde(j) += 1e-2 * rng.normal();
        if (c.covariance_mode() == CovarianceMode::Free) {
          Matrix e = Matrix::Zero(moved.sigma_tilde.rows(), moved.sigma_tilde.cols());
          for (Eigen::Index r = 0; r < e.rows(); ++r)
            for (Eigen::Index s = 0; s <= r; ++s) e(r, s) = e(s, r) = 1e-2 * rng.normal();
          moved.sigma_tilde += e;
          if (!is_positive_definite(moved.sigma_tilde)) continue;
        }
        CHECK(kl_at(inst.model, inst.true_f, moved) >= kl);
      }
    }
  }
}

TEST_CASE("error helpers") {
  Matrix a(1, 2), b(1, 2);
  a << 1.0, 2.0;
  b << 1.0, 2.5;
  CHECK(relative_error(a, b) == doctest::Approx(0.5 / 2.5));
  CHECK(frobenius_relative_error(a * 0.0, b * 0.0) == 0.0);
}
