#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "corrnoise/sensitivity.hpp"
#include "test_util.hpp"

using namespace corrnoise;

TEST_CASE("schema validation") {
  CHECK_NOTHROW(validate_schema(ParticipationSchema::cyclic(2, 4), 8));
  CHECK_THROWS_AS(validate_schema(ParticipationSchema::cyclic(3, 3), 8), Error);
  CHECK_NOTHROW(validate_schema(ParticipationSchema::minsep(2, 4), 8));
  CHECK_THROWS_AS(validate_schema(ParticipationSchema::minsep(4, 3), 8), Error);
}

TEST_CASE("streaming sensitivity") {
  CHECK(streaming_sensitivity(Strategy::identity(5)) == doctest::Approx(1.0));
  // A_pre has first-column norm sqrt(n) (zero-out convention; replace-one
  // doubles it in the privacy module).
  const Strategy workload = Strategy::toeplitz(8, std::vector<double>(8, 1.0));
  CHECK(streaming_sensitivity(workload) == doctest::Approx(std::sqrt(8.0)));
  const Strategy blt = Strategy::blt(3, {0.5}, {0.5});
  CHECK(streaming_sensitivity(blt) ==
        doctest::Approx(std::sqrt(1.3125)).epsilon(1e-12));
}

TEST_CASE("sensitivity_upper_bound: cyclic anchor at sqrt(10)") {
  const Eigen::MatrixXd a = testutil::prefix_workload(4);
  const GramMatrix gram = gram_matrix(a);
  CHECK(gram.nonneg);
  const SensitivityBound bound =
      sensitivity_upper_bound(gram, ParticipationSchema::cyclic(2, 2));
  CHECK(bound.exact);
  CHECK(bound.value == doctest::Approx(std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("sensitivity_upper_bound: identity cases") {
  const GramMatrix gram = gram_matrix(Eigen::MatrixXd::Identity(4, 4));
  CHECK(sensitivity_upper_bound(gram, ParticipationSchema::cyclic(2, 2)).value ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(sensitivity_upper_bound(gram, ParticipationSchema::minsep(2, 2)).value ==
        doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("minsep DP") {
  CHECK(minsep_sensitivity_dp({3, 1, 4, 1, 5}, 2, 2) ==
        doctest::Approx(3.0));  // picks indices 2 and 4
  CHECK(minsep_sensitivity_dp(std::vector<double>(6, 1.0), 1, 6) ==
        doctest::Approx(std::sqrt(6.0)));
  CHECK_THROWS_AS(minsep_sensitivity_dp({1, 1, 1}, 2, 3), Error);

  // Brute force over all separated subsets agrees on random rewards.
  testutil::TestRng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.uniform_int(2, 10);
    const int b = rng.uniform_int(1, 4);
    const int k = rng.uniform_int(1, 3);
    if (static_cast<std::int64_t>(k - 1) * b >= n) continue;
    std::vector<double> r(n);
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      r[i] = rng.uniform(0.0, 4.0);
      diag(i, i) = r[i];
    }
    const double dp = minsep_sensitivity_dp(r, b, k);
    const double brute = testutil::minsep_sensitivity_oracle(diag, n, b, k);
    CHECK(dp == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("banded Toeplitz DP anchor at sqrt(k) colnorm") {
  // coeffs (1, 0.5), n=4, b=2, k=2: column norms (1.25, 1.25, 1.25, 1).
  const Strategy s = Strategy::banded_toeplitz(4, {1.0, 0.5});
  const double sens = sensitivity(s, ParticipationSchema::minsep(2, 2));
  CHECK(sens == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
}

TEST_CASE("toeplitz closed form") {
  CHECK(toeplitz_minsep_closed_form({1, 1, 1, 1}, 4, 2, 2) ==
        doctest::Approx(std::sqrt(10.0)));
  CHECK(toeplitz_minsep_closed_form({1, 0.5, 0.25}, 3, 1, 1) ==
        doctest::Approx(std::sqrt(1.3125)));
  CHECK_THROWS_AS(toeplitz_minsep_closed_form({1.0, 1.5}, 2, 1, 1), Error);
  CHECK_THROWS_AS(toeplitz_minsep_closed_form({1.0, -0.5}, 2, 1, 1), Error);
}

TEST_CASE("closed form equals brute force on the optimal coefficients") {
  const int n = 8, b = 4, k = 2;
  const auto coeffs = optimal_toeplitz_coeffs(n);
  const double closed = toeplitz_minsep_closed_form(coeffs, n, b, k);
  const Eigen::MatrixXd c = testutil::toeplitz_from(coeffs, n);
  const double brute =
      testutil::minsep_sensitivity_oracle(c.transpose() * c, n, b, k);
  CHECK(closed == doctest::Approx(brute).epsilon(1e-10));
}

TEST_CASE("oracle equivalence: DP, closed form, enumeration") {
  // Random banded Toeplitz strategies with non-negative non-increasing
  // coefficients: all three routes must agree.
  testutil::TestRng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.uniform_int(2, 12);
    const int b = rng.uniform_int(1, 4);
    const int k = rng.uniform_int(1, 3);
    if (static_cast<std::int64_t>(k - 1) * b >= n) continue;
    const int bands = rng.uniform_int(1, std::min(b, n));
    std::vector<double> coeffs(bands);
    coeffs[0] = rng.uniform(0.5, 1.5);
    for (int j = 1; j < bands; ++j) {
      coeffs[j] = coeffs[j - 1] * rng.uniform(0.2, 1.0);
    }
    const Eigen::MatrixXd c = testutil::toeplitz_from(coeffs, n);
    const Eigen::MatrixXd gram = c.transpose() * c;

    const double brute = testutil::minsep_sensitivity_oracle(gram, n, b, k);
    std::vector<double> col_sq(n);
    for (int t = 0; t < n; ++t) col_sq[t] = c.col(t).squaredNorm();
    const double dp = minsep_sensitivity_dp(col_sq, b, k);
    const double closed = toeplitz_minsep_closed_form(coeffs, n, b, k);
    CHECK(dp == doctest::Approx(brute).epsilon(1e-10));
    CHECK(closed == doctest::Approx(brute).epsilon(1e-10));

    GramMatrix g{gram, true};
    const SensitivityBound bound =
        sensitivity_upper_bound(g, ParticipationSchema::minsep(b, k));
    CHECK(bound.value == doctest::Approx(brute).epsilon(1e-10));
  }
}

TEST_CASE("sensitivity is nondecreasing in k; cyclic <= minsep") {
  testutil::TestRng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int b = rng.uniform_int(1, 3);
    const int kmax = rng.uniform_int(2, 4);
    const int n = b * kmax;
    std::vector<double> coeffs(n);
    coeffs[0] = 1.0;
    for (int j = 1; j < n; ++j) coeffs[j] = coeffs[j - 1] * rng.uniform(0.3, 1.0);
    const Strategy s = Strategy::toeplitz(n, coeffs);
    double prev = 0.0;
    for (int k = 1; k <= kmax; ++k) {
      if (static_cast<std::int64_t>(k - 1) * b >= n) break;
      const double v = sensitivity(s, ParticipationSchema::minsep(b, k));
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    const double cyc = sensitivity(s, ParticipationSchema::cyclic(b, kmax));
    const double ms = sensitivity(s, ParticipationSchema::minsep(b, kmax));
    CHECK(cyc <= ms + 1e-12);
  }
}

TEST_CASE("inf-to-2 brute force") {
  CHECK(inf_to_2_norm_bruteforce(Eigen::MatrixXd::Identity(4, 4)) ==
        doctest::Approx(2.0));
  CHECK(inf_to_2_norm_bruteforce(testutil::prefix_workload(2)) ==
        doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(inf_to_2_norm_bruteforce(Eigen::MatrixXd::Identity(23, 23)),
                  Error);

  // colnorm(C) <= ||C||_{inf->2} <= n colnorm(C) on random instances.
  testutil::TestRng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(1, 8);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) c(i, j) = rng.uniform(-1.0, 1.0);
    }
    const double norm = inf_to_2_norm_bruteforce(c);
    const double coln = testutil::max_col_norm(c);
    CHECK(norm >= coln - 1e-12);
    CHECK(norm <= n * coln + 1e-12);
  }
}

TEST_CASE("independent noise is optimal under worst-case sensitivity") {
  // rownorm(A_pre C^{-1}) * ||C||_{inf->2} >= n, equality at C = I.
  testutil::TestRng rng(37);
  for (int n = 2; n <= 10; ++n) {
    const Eigen::MatrixXd a = testutil::prefix_workload(n);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const double id_value = testutil::max_row_norm(a * id) *
                            inf_to_2_norm_bruteforce(id);
    CHECK(id_value == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));

    const Eigen::MatrixXd toep =
        testutil::toeplitz_from(optimal_toeplitz_coeffs(n), n);
    CHECK(testutil::max_row_norm(testutil::decoder_oracle(a, toep)) *
              inf_to_2_norm_bruteforce(toep) >=
          n - 1e-9);

    Eigen::MatrixXd rnd = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      rnd(i, i) = rng.uniform(0.5, 1.5);
      for (int j = 0; j < i; ++j) rnd(i, j) = rng.uniform(-1.0, 1.0);
    }
    CHECK(testutil::max_row_norm(testutil::decoder_oracle(a, rnd)) *
              inf_to_2_norm_bruteforce(rnd) >=
          n - 1e-9);
  }
}

TEST_CASE("cyclic requires b*k == n") {
  const Strategy s = Strategy::identity(8);
  CHECK_THROWS_AS(sensitivity(s, ParticipationSchema::cyclic(3, 2)), Error);
}

TEST_CASE("banded dense strategies dispatch to the DP at any size") {
  // A dense matrix whose bandwidth fits inside the separation must not fall
  // back to pattern enumeration (which would blow up at this n and k).
  const int n = 512, b = 8, k = 16;
  testutil::TestRng rng(97);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    c(i, i) = rng.uniform(0.5, 1.5);
    for (int j = std::max(0, i - b + 1); j < i; ++j) {
      c(i, j) = rng.uniform(-0.5, 0.5);
    }
  }
  REQUIRE(count_minsep_patterns(n, b, k) > kPatternEnumerationLimit);
  const Strategy s = Strategy::dense_strategy(c);
  const double sens = sensitivity(s, ParticipationSchema::minsep(b, k));
  std::vector<double> col_sq(n);
  for (int t = 0; t < n; ++t) col_sq[t] = c.col(t).squaredNorm();
  CHECK(sens == doctest::Approx(minsep_sensitivity_dp(col_sq, b, k)).epsilon(1e-12));
}

TEST_CASE("pattern counting and the enumeration limit") {
  CHECK(count_minsep_patterns(4, 2, 2) == 4 + 3);  // four singletons + (0,2),(0,3),(1,3)
  CHECK(count_minsep_patterns(400, 1, 5) > kPatternEnumerationLimit);
  GramMatrix gram{Eigen::MatrixXd::Identity(400, 400), true};
  CHECK_THROWS_AS(sensitivity_upper_bound(gram, ParticipationSchema::minsep(1, 5)),
                  Error);
}

TEST_CASE("mixed-sign Gram reports inexact bound") {
  Eigen::MatrixXd c(4, 4);
  c.setIdentity();
  c(2, 0) = -0.9;  // makes (C^T C)[0, 2] negative
  const GramMatrix gram = gram_matrix(c);
  CHECK(!gram.nonneg);
  const SensitivityBound bound =
      sensitivity_upper_bound(gram, ParticipationSchema::minsep(2, 2));
  CHECK(!bound.exact);
  CHECK(bound.value > 0.0);
}
