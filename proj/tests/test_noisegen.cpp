#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "corrnoise/noisegen.hpp"
#include "test_util.hpp"

using namespace corrnoise;

namespace {

Eigen::MatrixXd stream_all(NoiseGenerator& gen, int n, int m) {
  Eigen::MatrixXd out(n, m);
  for (int t = 0; t < n; ++t) out.row(t) = gen.next();
  return out;
}

double relative_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).norm() / std::max(1e-30, want.norm());
}

}  // namespace

TEST_CASE("noise source determinism and degenerate scale") {
  NoiseSource source{42, 1.5, 7};
  const Eigen::VectorXd a = regenerate_row(source, 3);
  const Eigen::VectorXd b = regenerate_row(source, 3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.size() == 7);

  NoiseSource zero{42, 0.0, 7};
  CHECK(regenerate_row(zero, 3).isZero());

  // Distinct rows and seeds decorrelate.
  const Eigen::VectorXd c = regenerate_row(source, 4);
  CHECK((a - c).norm() > 0.0);
  NoiseSource other{43, 1.5, 7};
  CHECK((a - regenerate_row(other, 3)).norm() > 0.0);
}

TEST_CASE("noise source moments") {
  // Mean within 4 sigma / sqrt(N) of zero; variance within 1% of nu^2.
  NoiseSource source{777, 2.0, 10};
  const std::int64_t rows = 100000;  // one million draws total
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t t = 0; t < rows; ++t) {
    const Eigen::VectorXd row = regenerate_row(source, t);
    sum += row.sum();
    sum_sq += row.squaredNorm();
  }
  const double count = static_cast<double>(rows) * source.m;
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * source.nu / std::sqrt(count));
  CHECK(var == doctest::Approx(source.nu * source.nu).epsilon(0.01));
}

TEST_CASE("identity strategy streams the raw rows") {
  NoiseSource source{5, 1.0, 4};
  auto gen = make_noise_generator(Strategy::identity(6), source);
  for (int t = 0; t < 6; ++t) {
    CHECK((gen->next() - regenerate_row(source, t)).cwiseAbs().maxCoeff() ==
          0.0);
  }
  CHECK_THROWS_AS(gen->next(), Error);
}

TEST_CASE("blt generator: two-step anchor") {
  // z~_1 = z_1 - 0.5 z_0 for C = BLT(0.5, 0.5).
  NoiseSource source{9, 1.0, 3};
  auto gen = make_noise_generator(Strategy::blt(2, {0.5}, {0.5}), source);
  const Eigen::VectorXd z0 = regenerate_row(source, 0);
  const Eigen::VectorXd z1 = regenerate_row(source, 1);
  CHECK((gen->next() - z0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((gen->next() - (z1 - 0.5 * z0)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("banded generator: three-step anchor") {
  // coeffs (1, 0.5): z~_2 = z_2 - 0.5 z~_1 = z_2 - 0.5 z_1 + 0.25 z_0.
  NoiseSource source{13, 1.0, 2};
  auto gen = make_noise_generator(Strategy::banded_toeplitz(3, {1.0, 0.5}), source);
  const Eigen::VectorXd z0 = regenerate_row(source, 0);
  const Eigen::VectorXd z1 = regenerate_row(source, 1);
  const Eigen::VectorXd z2 = regenerate_row(source, 2);
  gen->next();
  gen->next();
  const Eigen::VectorXd got = gen->next();
  CHECK((got - (z2 - 0.5 * z1 + 0.25 * z0)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("streaming equals the materialized inverse for every family") {
  struct Case {
    Strategy strategy;
    const char* name;
  };
  const std::vector<double> alpha{0.3, 0.15};
  const std::vector<double> lambda{0.85, 0.3};
  std::vector<Case> cases;
  cases.push_back({Strategy::banded_toeplitz(33, {1.0, 0.5, -0.2}), "banded"});
  cases.push_back({Strategy::toeplitz(24, optimal_toeplitz_coeffs(24)),
                   "toeplitz"});
  cases.push_back({Strategy::blt(40, alpha, lambda), "blt"});
  {
    testutil::TestRng rng(53);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(17, 17);
    for (int i = 0; i < 17; ++i) {
      c(i, i) = rng.uniform(0.5, 1.5);
      for (int j = 0; j < i; ++j) c(i, j) = rng.uniform(-0.5, 0.5);
    }
    cases.push_back({Strategy::dense_strategy(c), "dense"});
  }

  for (const Case& test : cases) {
    CAPTURE(test.name);
    NoiseSource source{99, 1.0, 5};
    auto gen = make_noise_generator(test.strategy, source);
    const Eigen::MatrixXd got =
        stream_all(*gen, test.strategy.n, source.m);
    const Eigen::MatrixXd want = testutil::correlated_noise_oracle(
        materialize_strategy(test.strategy), source, test.strategy.n);
    CHECK(relative_error(got, want) <= 1e-9);
  }
}

TEST_CASE("blt buffer closed form holds at every step") {
  // M_t[:, i] = sum_{tau=1..t} lambda_i^{tau-1} z~_{t-tau}, checked by direct
  // summation of the emitted rows.
  const std::vector<double> alpha{0.4, 0.1};
  const std::vector<double> lambda{0.7, 0.2};
  const int n = 64, m = 3;
  NoiseSource source{21, 1.0, m};
  auto gen = make_blt_noise_generator(alpha, lambda, n, source);
  std::vector<Eigen::VectorXd> emitted;
  for (int t = 0; t < n; ++t) {
    // Reconstruct the buffer the generator must be holding at time t.
    Eigen::MatrixXd buffer = Eigen::MatrixXd::Zero(m, 2);
    for (int i = 0; i < 2; ++i) {
      double pow = 1.0;
      for (int tau = 1; tau <= t; ++tau) {
        buffer.col(i) += pow * emitted[t - tau];
        pow *= lambda[i];
      }
    }
    const Eigen::VectorXd expect = regenerate_row(source, t) -
                                   buffer.col(0) * alpha[0] -
                                   buffer.col(1) * alpha[1];
    const Eigen::VectorXd got = gen->next();
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12);
    emitted.push_back(got);
  }
}

TEST_CASE("negative inverse decay parameters still stream correctly") {
  // Drive the recursion with blt_invert outputs, so some lambda are negative;
  // the stream must equal BLT(alpha_hat, lambda_hat)^{-1} Z.
  const std::vector<double> alpha{0.5};
  const std::vector<double> lambda{0.4};
  const InverseBltParams inv = blt_invert(alpha, lambda);
  REQUIRE(inv.lambda_hat[0] < 0.0);

  const int n = 48, m = 4;
  NoiseSource source{31, 1.0, m};
  auto gen = make_blt_noise_generator(inv.alpha_hat, inv.lambda_hat, n, source);
  const Eigen::MatrixXd got = stream_all(*gen, n, m);
  const Eigen::MatrixXd chat = testutil::toeplitz_from(
      blt_coeffs(inv.alpha_hat, inv.lambda_hat, n), n);
  const Eigen::MatrixXd want =
      testutil::correlated_noise_oracle(chat, source, n);
  CHECK(relative_error(got, want) <= 1e-9);
}

TEST_CASE("tree generator") {
  // t=0: the partition of [0,0] is the single leaf node.
  const TreeFactorization tree4 = tree_factorization(4, TreeVariant::kBasic);
  NoiseSource source{61, 1.0, 3};
  CHECK((tree_prefix_noise_row(tree4, source, 0) - regenerate_row(source, 0))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // n=4, t=2: partition [0,1] u [2]; node ids 2 (s_{0,1}) and 3 (g_2).
  const Eigen::VectorXd row2 = tree_prefix_noise_row(tree4, source, 2);
  CHECK((row2 - (regenerate_row(source, 2) + regenerate_row(source, 3)))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Streaming rows equal B Z differences for n=64, m=3.
  const int n = 64, m = 3;
  const TreeFactorization tree = tree_factorization(n, TreeVariant::kBasic);
  NoiseSource tree_source{71, 1.0, m};
  Eigen::MatrixXd z(tree.encoder.rows(), m);
  for (Eigen::Index r = 0; r < tree.encoder.rows(); ++r) {
    z.row(r) = regenerate_row(tree_source, tree.node_ids[r]);
  }
  const Eigen::MatrixXd bz = tree.decoder * z;
  auto gen = make_noise_generator(Strategy::tree(n, TreeVariant::kBasic),
                                  tree_source);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(m);
  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd got = gen->next();
    const Eigen::VectorXd want = bz.row(t).transpose() - prev;
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
    prev = bz.row(t).transpose();
  }

  CHECK_THROWS_AS(make_noise_generator(
                      Strategy::tree(8, TreeVariant::kFullPseudoinverse),
                      tree_source),
                  Error);
}

TEST_CASE("streams are bit-identical across two runs") {
  const Strategy strategy = Strategy::blt(32, {0.3, 0.2}, {0.9, 0.4});
  NoiseSource source{123456789ULL, 0.7, 6};
  auto g1 = make_noise_generator(strategy, source);
  auto g2 = make_noise_generator(strategy, source);
  for (int t = 0; t < 32; ++t) {
    const Eigen::VectorXd a = g1->next();
    const Eigen::VectorXd b = g2->next();
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("decoded noise covariance matches nu^2 ||B[t,:]||^2") {
  // Monte-Carlo covariance of (B Z)[t, :]: per-coordinate variance within 3%
  // over 1e5 trials at n=8 for the square-root factorization.
  const int n = 8, m = 2, trials = 100000;
  const auto coeffs = optimal_toeplitz_coeffs(n);
  const Strategy strategy = Strategy::toeplitz(n, coeffs);
  const Eigen::MatrixXd a = testutil::prefix_workload(n);
  const Eigen::MatrixXd b =
      testutil::decoder_oracle(a, testutil::toeplitz_from(coeffs, n));
  const double nu = 1.3;

  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  for (int trial = 0; trial < trials; ++trial) {
    NoiseSource source{static_cast<std::uint64_t>(trial) * 1315423911ULL + 17,
                       nu, m};
    auto gen = make_noise_generator(strategy, source);
    Eigen::VectorXd prefix = Eigen::VectorXd::Zero(m);
    for (int t = 0; t < n; ++t) {
      prefix += gen->next();
      sum_sq[t] += prefix.squaredNorm();
    }
  }
  for (int t = 0; t < n; ++t) {
    const double got = sum_sq[t] / trials / m;  // per-coordinate variance
    const double want = nu * nu * b.row(t).squaredNorm();
    CHECK(got == doctest::Approx(want).epsilon(0.03));
  }
}
