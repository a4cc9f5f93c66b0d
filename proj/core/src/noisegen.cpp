#include "corrnoise/noisegen.hpp"

#include <algorithm>
#include <cmath>

namespace corrnoise {

void NoiseGenerator::check_not_exhausted() const {
  if (step_ >= n_) {
    throw_error(ErrorCode::kExhaustedStream, "noise stream exhausted");
  }
}

namespace {

// z~_t = sum_{tau<=t} w_{t-tau} z_tau for Toeplitz inverse coefficients w
// (identity and general Toeplitz strategies; O(t m) per step, rows of the
// source regenerated on demand).
class ToeplitzGenerator : public NoiseGenerator {
 public:
  ToeplitzGenerator(std::vector<double> inverse_coeffs, std::int64_t n,
                    const NoiseSource& source)
      : NoiseGenerator(n), inv_(std::move(inverse_coeffs)), source_(source) {}

  Eigen::VectorXd next() override {
    check_not_exhausted();
    const std::int64_t t = step_++;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(source_.m);
    for (std::int64_t tau = 0; tau <= t; ++tau) {
      out += inv_[t - tau] * regenerate_row(source_, tau);
    }
    return out;
  }

 private:
  std::vector<double> inv_;
  NoiseSource source_;
};

// Dense strategies keep the materialized inverse and regenerate source rows.
class DenseGenerator : public NoiseGenerator {
 public:
  DenseGenerator(Eigen::MatrixXd c, const NoiseSource& source)
      : NoiseGenerator(c.rows()), source_(source) {
    inverse_ = c.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(c.rows(), c.rows()));
  }

  Eigen::VectorXd next() override {
    check_not_exhausted();
    const std::int64_t t = step_++;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(source_.m);
    for (std::int64_t tau = 0; tau <= t; ++tau) {
      const double w = inverse_(t, tau);
      if (w != 0.0) out += w * regenerate_row(source_, tau);
    }
    return out;
  }

 private:
  Eigen::MatrixXd inverse_;
  NoiseSource source_;
};

// Ring buffer of the last b-1 emitted rows:
// z~_t = (z_t - sum_{tau=1}^{min(t,b-1)} c_tau z~_{t-tau}) / c_0.
class BandedGenerator : public NoiseGenerator {
 public:
  BandedGenerator(std::vector<double> coeffs, std::int64_t n,
                  const NoiseSource& source)
      : NoiseGenerator(n), coeffs_(std::move(coeffs)), source_(source) {
    const int depth = std::max<int>(1, static_cast<int>(coeffs_.size()) - 1);
    ring_.assign(depth, Eigen::VectorXd::Zero(source_.m));
  }

  Eigen::VectorXd next() override {
    check_not_exhausted();
    const std::int64_t t = step_++;
    Eigen::VectorXd out = regenerate_row(source_, t);
    const int b = static_cast<int>(coeffs_.size());
    const int reach = static_cast<int>(std::min<std::int64_t>(t, b - 1));
    for (int tau = 1; tau <= reach; ++tau) {
      out -= coeffs_[tau] * ring_[(t - tau) % ring_.size()];
    }
    out /= coeffs_[0];
    if (b > 1) ring_[t % ring_.size()] = out;
    return out;
  }

 private:
  std::vector<double> coeffs_;
  NoiseSource source_;
  std::vector<Eigen::VectorXd> ring_;
};

// z~_t = z_t - M_t alpha; M_{t+1} = M_t diag(lambda) + z~_t 1^T. The column
// M_t[:, i] equals sum_{tau=1}^{t} lambda_i^{tau-1} z~_{t-tau}.
class BltGenerator : public NoiseGenerator {
 public:
  BltGenerator(std::vector<double> alpha, std::vector<double> lambda,
               std::int64_t n, const NoiseSource& source)
      : NoiseGenerator(n),
        alpha_(std::move(alpha)),
        lambda_(std::move(lambda)),
        source_(source),
        buffer_(Eigen::MatrixXd::Zero(source.m,
                                      static_cast<Eigen::Index>(alpha_.size()))) {}

  Eigen::VectorXd next() override {
    check_not_exhausted();
    const std::int64_t t = step_++;
    Eigen::VectorXd out = regenerate_row(source_, t);
    const auto d = static_cast<Eigen::Index>(alpha_.size());
    for (Eigen::Index i = 0; i < d; ++i) {
      out -= alpha_[i] * buffer_.col(i);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      buffer_.col(i) = lambda_[i] * buffer_.col(i) + out;
    }
    return out;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> lambda_;
  NoiseSource source_;
  Eigen::MatrixXd buffer_;
};

// Basic tree: z~_t = (B Z)[t, :] - (B Z)[t-1, :], each prefix row assembled
// from the <= ceil(log2 n) node noises of the maximal dyadic partition.
class TreeGenerator : public NoiseGenerator {
 public:
  TreeGenerator(TreeFactorization tree, std::int64_t n,
                const NoiseSource& source)
      : NoiseGenerator(n),
        tree_(std::move(tree)),
        source_(source),
        previous_(Eigen::VectorXd::Zero(source.m)) {}

  Eigen::VectorXd next() override {
    check_not_exhausted();
    const std::int64_t t = step_++;
    Eigen::VectorXd current = tree_prefix_noise_row(tree_, source_, t);
    Eigen::VectorXd out = current - previous_;
    previous_ = std::move(current);
    return out;
  }

 private:
  TreeFactorization tree_;
  NoiseSource source_;
  Eigen::VectorXd previous_;
};

}  // namespace

Eigen::VectorXd tree_prefix_noise_row(const TreeFactorization& tree,
                                      const NoiseSource& source,
                                      std::int64_t t) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(source.m);
  // Node seeds key on the post-order index within the padded tree so padding
  // does not shift the seeds of real nodes.
  std::int64_t s = 0;
  while (s <= t) {
    std::int64_t size = 1;
    while (s % (2 * size) == 0 && s + 2 * size - 1 <= t) size *= 2;
    // Locate the node id by descending the padded tree.
    std::int64_t lo = 0, hi = tree.padded_n - 1, base = 0;
    while (!(lo == s && hi == s + size - 1)) {
      const std::int64_t mid = (lo + hi) / 2;
      if (s + size - 1 <= mid) {
        hi = mid;
      } else {
        base += 2 * (mid - lo + 1) - 1;
        lo = mid + 1;
      }
    }
    const std::int64_t node_id = base + 2 * size - 2;
    row += regenerate_row(source, node_id);
    s += size;
  }
  return row;
}

std::unique_ptr<NoiseGenerator> make_blt_noise_generator(
    std::vector<double> alpha, std::vector<double> lambda, std::int64_t n,
    const NoiseSource& source) {
  if (alpha.size() != lambda.size()) {
    throw_error(ErrorCode::kShape, "blt generator: parameter lengths differ");
  }
  for (double l : lambda) {
    if (!(std::abs(l) <= 1.0)) {
      throw_error(ErrorCode::kParameterDomain,
                  "blt generator: |lambda| must be <= 1");
    }
  }
  return std::make_unique<BltGenerator>(std::move(alpha), std::move(lambda), n,
                                        source);
}

std::unique_ptr<NoiseGenerator> make_noise_generator(const Strategy& strategy,
                                                     const NoiseSource& source,
                                                     int limit) {
  switch (strategy.kind) {
    case StrategyKind::kBandedToeplitz:
      return std::make_unique<BandedGenerator>(strategy.coeffs, strategy.n,
                                               source);
    case StrategyKind::kToeplitz:
      return std::make_unique<ToeplitzGenerator>(
          inverse_toeplitz_coeffs(strategy.coeffs, strategy.n), strategy.n,
          source);
    case StrategyKind::kBlt:
      return std::make_unique<BltGenerator>(strategy.alpha, strategy.lambda,
                                            strategy.n, source);
    case StrategyKind::kDense:
      return std::make_unique<DenseGenerator>(strategy.dense, source);
    case StrategyKind::kTree: {
      if (strategy.tree_variant != TreeVariant::kBasic) {
        throw_error(ErrorCode::kUnsupported,
                    "full-pseudoinverse tree decoding needs O(n m) memory and "
                    "is only available through materialized evaluation");
      }
      return std::make_unique<TreeGenerator>(
          tree_factorization(strategy.n, strategy.tree_variant, limit),
          strategy.n, source);
    }
  }
  throw_error(ErrorCode::kParameterDomain, "unknown strategy kind");
}

}  // namespace corrnoise
