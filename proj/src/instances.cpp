#include "misbelief/instances.hpp"

#include "misbelief/errors.hpp"

#include <cmath>

namespace misbelief {

Matrix random_spd(CounterRng& rng, Eigen::Index d) {
  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < r; ++c) l(r, c) = 0.5 * rng.normal();
    l(r, r) = rng.uniform(0.5, 1.5);
  }
  return l * l.transpose();
}

DogmaticConstraint RandomInstance::case1() const {
  return DogmaticConstraint::case1(pinned_index, true_f(pinned_index) + overconfidence, fixed_sigma);
}

DogmaticConstraint RandomInstance::case2() const { return DogmaticConstraint::case2(pinned_vector); }

DogmaticConstraint RandomInstance::case3() const {
  return DogmaticConstraint::case3(pinned_index, true_f(pinned_index) + overconfidence);
}

namespace {

double information_condition(const Matrix& design, const Matrix& sigma) {
  const Matrix chol = cholesky_lower(sigma, "covariance");
  const Matrix w = chol.triangularView<Eigen::Lower>().solve(design);
  return spd_condition_number(symmetrize(w.transpose() * w));
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed, std::uint64_t index, const InstanceLimits& limits) {
  CounterRng rng(CounterRng::mix(seed ^ CounterRng::mix(index + 0x1234567ULL)));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto d = static_cast<Eigen::Index>(rng.integer(1, limits.max_signal_dim));
    const auto l = static_cast<Eigen::Index>(rng.integer(1, std::min(d, limits.max_fundamental_dim)));
    Matrix design(d, l);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < l; ++c) design(r, c) = rng.normal();
    Matrix sigma = random_spd(rng, d);
    Matrix fixed = random_spd(rng, d);
    Vector f(l);
    for (Eigen::Index k = 0; k < l; ++k) f(k) = 2.0 * rng.normal();
    const auto pinned = static_cast<Eigen::Index>(rng.integer(0, l - 1));
    const double overconfidence = rng.uniform(-limits.max_overconfidence, limits.max_overconfidence);
    Vector pinned_vector = f;
    for (Eigen::Index k = 0; k < l; ++k)
      pinned_vector(k) += rng.uniform(-limits.max_overconfidence, limits.max_overconfidence);

    if (!has_full_column_rank(design)) continue;
    if (information_condition(design, sigma) > limits.max_condition) continue;
    if (information_condition(design, fixed) > limits.max_condition) continue;
    return RandomInstance{LinearGaussianModel(std::move(design), std::move(sigma)),
                          std::move(f),
                          pinned,
                          overconfidence,
                          std::move(fixed),
                          std::move(pinned_vector)};
  }
  fail(ErrorKind::IllConditioned, "could not draw a well-conditioned instance");
}

namespace {

Scenario random_society_shell(CounterRng& rng, Eigen::Index individuals, Eigen::Index groups) {
  Scenario s;
  s.memberships = MembershipMatrix::Zero(individuals, groups);
  for (Eigen::Index j = 0; j < individuals; ++j)
    for (Eigen::Index k = 0; k < groups; ++k) s.memberships(j, k) = static_cast<int>(rng.integer(-1, 1));
  s.calibers.resize(individuals);
  s.v_q.resize(individuals);
  for (Eigen::Index j = 0; j < individuals; ++j) {
    s.calibers(j) = rng.normal();
    s.v_q(j) = rng.uniform(0.2, 3.0);
  }
  s.discrimination.resize(groups);
  s.v_eta.resize(groups);
  for (Eigen::Index k = 0; k < groups; ++k) {
    s.discrimination(k) = 0.5 * rng.normal();
    s.v_eta(k) = rng.uniform(0.2, 3.0);
  }
  s.agent = static_cast<Eigen::Index>(rng.integer(0, individuals - 1));
  return s;
}

}  // namespace

Scenario random_scenario(CounterRng& rng, Eigen::Index max_individuals, Eigen::Index max_groups) {
  const auto individuals = static_cast<Eigen::Index>(rng.integer(1, max_individuals));
  const auto groups = static_cast<Eigen::Index>(rng.integer(0, max_groups));
  Scenario s = random_society_shell(rng, individuals, groups);
  s.a_tilde = s.calibers(s.agent) + rng.uniform(-3.0, 3.0);
  s.validate();
  return s;
}

Scenario random_neutral_scenario(CounterRng& rng, Eigen::Index max_individuals, Eigen::Index max_groups) {
  Scenario s = random_scenario(rng, max_individuals, max_groups);
  s.memberships.row(s.agent).setZero();
  return s;
}

Scenario random_partitional_scenario(CounterRng& rng, Eigen::Index max_groups) {
  const auto groups = static_cast<Eigen::Index>(rng.integer(2, std::max<Eigen::Index>(2, max_groups)));
  std::vector<Eigen::Index> sizes;
  Eigen::Index individuals = 0;
  for (Eigen::Index k = 0; k < groups; ++k) {
    sizes.push_back(static_cast<Eigen::Index>(rng.integer(1, 3)));
    individuals += sizes.back();
  }
  // Relationship of group g's members toward group h: member on the diagonal,
  // competitor or neutral elsewhere.
  Eigen::MatrixXi relation = Eigen::MatrixXi::Identity(groups, groups);
  for (Eigen::Index g = 0; g < groups; ++g)
    for (Eigen::Index h = 0; h < groups; ++h)
      if (g != h) relation(g, h) = static_cast<int>(rng.integer(-1, 0));

  Scenario s = random_society_shell(rng, individuals, groups);
  Eigen::Index j = 0;
  const double common_mean = rng.normal();
  for (Eigen::Index g = 0; g < groups; ++g) {
    const Eigen::Index first = j;
    for (Eigen::Index m = 0; m < sizes[static_cast<std::size_t>(g)]; ++m, ++j) s.memberships.row(j) = relation.row(g);
    const auto size = sizes[static_cast<std::size_t>(g)];
    const double shift = common_mean - s.calibers.segment(first, size).mean();
    s.calibers.segment(first, size).array() += shift;
  }
  s.agent = static_cast<Eigen::Index>(rng.integer(0, individuals - 1));
  s.a_tilde = s.calibers(s.agent) + rng.uniform(0.1, 3.0);
  s.validate();
  return s;
}

Scenario random_engaged_scenario(CounterRng& rng, Eigen::Index max_individuals, Eigen::Index max_groups) {
  const auto individuals = static_cast<Eigen::Index>(rng.integer(1, max_individuals));
  const auto groups = static_cast<Eigen::Index>(rng.integer(1, std::max<Eigen::Index>(1, max_groups)));
  Scenario s = random_society_shell(rng, individuals, groups);
  s.memberships(s.agent, 0) = 1;
  s.a_tilde = s.calibers(s.agent) + rng.uniform(0.1, 3.0);
  s.validate();
  return s;
}

MembershipVector random_engaged_memberships(CounterRng& rng, Eigen::Index individuals, Eigen::Index agent) {
  MembershipVector v(individuals);
  for (Eigen::Index j = 0; j < individuals; ++j) v(j) = static_cast<int>(rng.integer(-1, 1));
  v(agent) = rng.uniform() < 0.5 ? -1 : 1;
  return v;
}

CorrelatedScenario random_correlated_scenario(CounterRng& rng, Eigen::Index max_individuals) {
  const auto n = static_cast<Eigen::Index>(rng.integer(1, max_individuals));
  CorrelatedScenario cs;
  cs.sigma_q = random_spd(rng, n);
  cs.calibers.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) cs.calibers(j) = rng.normal();
  cs.agent = static_cast<Eigen::Index>(rng.integer(0, n - 1));
  cs.a_tilde = cs.calibers(cs.agent) + rng.uniform(-3.0, 3.0);
  cs.validate();
  return cs;
}

MembershipVector random_signs(CounterRng& rng, Eigen::Index n) {
  MembershipVector v(n);
  for (Eigen::Index j = 0; j < n; ++j) v(j) = rng.uniform() < 0.5 ? -1 : 1;
  return v;
}

}  // namespace misbelief
