#include <doctest.h>

#include "corrnoise/workload.hpp"
#include "test_util.hpp"

using namespace corrnoise;

TEST_CASE("prefix coefficients are all ones") {
  const auto c = workload_coefficients(WorkloadSpec::prefix(4));
  REQUIRE(c.size() == 4);
  for (double x : c) CHECK(x == 1.0);
}

TEST_CASE("momentum with beta=0, wd=0 reduces to prefix") {
  const auto c = workload_coefficients(WorkloadSpec::momentum(3, 0.0, 0.0));
  CHECK(c == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("momentum coefficients match the direct double sum") {
  // a_t = sum_{tau<=t} beta^tau (1-wd)^{t-tau}, summed directly.
  const double beta = 0.9, wd = 0.0;
  const auto c = workload_coefficients(WorkloadSpec::momentum(3, beta, wd));
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c[1] == doctest::Approx(1.9).epsilon(1e-14));
  CHECK(c[2] == doctest::Approx(2.71).epsilon(1e-14));

  const double beta2 = 0.6, wd2 = 0.25;
  const auto c2 = workload_coefficients(WorkloadSpec::momentum(6, beta2, wd2));
  for (int t = 0; t < 6; ++t) {
    double direct = 0.0;
    for (int tau = 0; tau <= t; ++tau) {
      direct += std::pow(beta2, tau) * std::pow(1.0 - wd2, t - tau);
    }
    CHECK(c2[t] == doctest::Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("momentum parameter domain") {
  CHECK_THROWS_AS(WorkloadSpec::momentum(4, 1.0, 0.0), Error);
  CHECK_THROWS_AS(WorkloadSpec::momentum(4, -0.1, 0.0), Error);
  CHECK_THROWS_AS(WorkloadSpec::momentum(4, 0.5, 1.0), Error);
}

TEST_CASE("matvec: prefix running sums") {
  Eigen::VectorXd v(3);
  v << 1, 2, 3;
  const Eigen::VectorXd out = workload_matvec(WorkloadSpec::prefix(3), v);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 3.0);
  CHECK(out[2] == 6.0);
  CHECK(workload_matvec(WorkloadSpec::prefix(3), Eigen::VectorXd::Zero(3))
            .isZero());
}

TEST_CASE("matvec on e_0 yields the first column") {
  const auto spec = WorkloadSpec::momentum(3, 0.9, 0.0);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(3);
  e0[0] = 1.0;
  const Eigen::VectorXd out = workload_matvec(spec, e0);
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(1.9));
  CHECK(out[2] == doctest::Approx(2.71));
}

TEST_CASE("matvec length mismatch") {
  CHECK_THROWS_AS(workload_matvec(WorkloadSpec::prefix(3), Eigen::VectorXd::Zero(4)),
                  Error);
}

TEST_CASE("materialized workloads") {
  const Eigen::MatrixXd a = materialize_workload(WorkloadSpec::prefix(2));
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, 1) == 0.0);
  CHECK(a(1, 0) == 1.0);
  CHECK(a(1, 1) == 1.0);

  const Eigen::MatrixXd c =
      materialize_workload(WorkloadSpec::custom({2.0, -1.0}));
  CHECK(c(0, 0) == 2.0);
  CHECK(c(1, 0) == -1.0);
  CHECK(c(1, 1) == 2.0);

  const Eigen::MatrixXd m =
      materialize_workload(WorkloadSpec::momentum(2, 0.5, 0.0));
  CHECK(m(1, 0) == doctest::Approx(1.5));
  CHECK(m(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("materialization limit") {
  CHECK_THROWS_AS(materialize_workload(WorkloadSpec::prefix(64), 32), Error);
}

TEST_CASE("Toeplitz structure of materialized workloads") {
  const auto spec = WorkloadSpec::momentum(9, 0.7, 0.1);
  const Eigen::MatrixXd a = materialize_workload(spec);
  for (int t = 0; t < 9; ++t) {
    for (int tau = 0; tau <= t; ++tau) {
      CHECK(a(t, tau) == a(t - tau, 0));
    }
    for (int tau = t + 1; tau < 9; ++tau) CHECK(a(t, tau) == 0.0);
  }
}

TEST_CASE("matvec agrees with dense multiply on random inputs") {
  testutil::TestRng rng(7);
  for (int n : {1, 5, 37, 256}) {
    const auto spec = WorkloadSpec::momentum(n, 0.85, 0.02);
    const Eigen::MatrixXd a = materialize_workload(spec);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd fast = workload_matvec(spec, v);
    const Eigen::VectorXd dense = a * v;
    CHECK((fast - dense).norm() <= 1e-12 * std::max(1.0, dense.norm()));
  }
}
