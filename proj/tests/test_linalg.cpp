#include "misbelief/errors.hpp"
#include "misbelief/linalg.hpp"
#include "misbelief/parallel.hpp"
#include "misbelief/rng.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <vector>

using namespace misbelief;

TEST_CASE("positive definiteness and rank") {
  Matrix spd(2, 2);
  spd << 2, 1, 1, 2;
  CHECK(is_positive_definite(spd));
  CHECK(spd_condition_number(spd) == doctest::Approx(3.0));
  CHECK(spd_log_det(spd) == doctest::Approx(std::log(3.0)));

  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_FALSE(is_positive_definite(indefinite));

  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_FALSE(is_symmetric(asym));
  CHECK_FALSE(is_positive_definite(asym));

  Matrix tall(3, 2);
  tall << 1, 2, 2, 4, 3, 6;
  CHECK_FALSE(has_full_column_rank(tall));
  tall(0, 1) = 0;
  CHECK(has_full_column_rank(tall));
}

TEST_CASE("cholesky failure carries InvalidModel") {
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    cholesky_lower(bad, "Sigma");
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidModel);
  }
}

TEST_CASE("operator norm and finiteness") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 3;
  m(1, 1) = -4;
  CHECK(operator_norm(m) == doctest::Approx(4.0));
  CHECK(all_finite(m));
  m(0, 1) = std::nan("");
  CHECK_FALSE(all_finite(m));
}

TEST_CASE("counter rng is a pure function of seed and position") {
  CounterRng a(42);
  CounterRng b(42);
  std::vector<double> first;
  for (int k = 0; k < 10; ++k) first.push_back(a.normal());
  for (int k = 0; k < 10; ++k) CHECK(b.normal_at(k) == first[k]);
  CounterRng skipped(42, 5);
  CHECK(skipped.normal() == first[5]);
  CHECK(CounterRng(43).normal_at(0) != first[0]);
}

TEST_CASE("rng moments") {
  CounterRng rng(7);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  for (int k = 0; k < 1000; ++k) {
    const auto v = rng.integer(-1, 1);
    CHECK((v >= -1 && v <= 1));
  }
}

TEST_CASE("parallel_for visits every index once and rethrows the lowest failure") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), [&](std::size_t k) { hits[k]++; });
  for (auto& h : hits) CHECK(h.load() == 1);

  try {
    parallel_for(20, [](std::size_t k) {
      if (k == 7 || k == 13) fail(ErrorKind::InvalidModel, "index " + std::to_string(k));
    });
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("index 7") != std::string::npos);
  }
}

TEST_CASE("worker count honors the environment") {
  setenv("MISBELIEF_THREADS", "3", 1);
  CHECK(worker_count() == 3u);
  setenv("MISBELIEF_THREADS", "0", 1);
  CHECK(worker_count() >= 1u);
  unsetenv("MISBELIEF_THREADS");
}
