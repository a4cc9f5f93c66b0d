#include "corrnoise/strategy.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

namespace corrnoise {

namespace {

constexpr double kDistinctTolerance = 1e-10;
constexpr double kComplexTolerance = 1e-8;

void check_steps(int n) {
  if (n < 1) throw_error(ErrorCode::kParameterDomain, "step count must be >= 1");
}

void check_blt_params(const std::vector<double>& alpha,
                      const std::vector<double>& lambda) {
  if (alpha.size() != lambda.size()) {
    throw_error(ErrorCode::kShape, "blt: alpha and lambda lengths differ");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) {
      throw_error(ErrorCode::kParameterDomain, "blt: alpha entries must be > 0");
    }
  }
  for (double l : lambda) {
    if (!(l > 0.0 && l < 1.0)) {
      throw_error(ErrorCode::kParameterDomain,
                  "blt: lambda entries must lie in (0, 1)");
    }
  }
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    for (std::size_t j = i + 1; j < lambda.size(); ++j) {
      if (std::abs(lambda[i] - lambda[j]) < kDistinctTolerance) {
        throw_error(ErrorCode::kDegenerateParameter,
                    "blt: lambda entries must be pairwise distinct");
      }
    }
  }
}

int padded_size(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

// Maximal dyadic partition of [0, t]: greedy blocks [s, s+size-1] with the
// largest power-of-two size aligned at s.
template <typename Fn>
void for_each_dyadic_block(int t, Fn&& fn) {
  int s = 0;
  while (s <= t) {
    int size = 1;
    while (s % (2 * size) == 0 && s + 2 * size - 1 <= t) size *= 2;
    fn(s, s + size - 1);
    s += size;
  }
}

}  // namespace

Strategy Strategy::dense_strategy(Eigen::MatrixXd c) {
  const int n = static_cast<int>(c.rows());
  check_steps(n);
  if (c.cols() != n) throw_error(ErrorCode::kShape, "dense strategy must be square");
  for (int i = 0; i < n; ++i) {
    if (c(i, i) == 0.0) {
      throw_error(ErrorCode::kSingularStrategy,
                  "dense strategy needs a nonzero diagonal");
    }
    for (int j = i + 1; j < n; ++j) {
      if (c(i, j) != 0.0) {
        throw_error(ErrorCode::kShape, "dense strategy must be lower triangular");
      }
    }
  }
  Strategy s;
  s.n = n;
  s.kind = StrategyKind::kDense;
  s.dense = std::move(c);
  return s;
}

Strategy Strategy::toeplitz(int n, std::vector<double> coeffs) {
  check_steps(n);
  if (static_cast<int>(coeffs.size()) != n) {
    throw_error(ErrorCode::kShape, "toeplitz coeffs must have length n");
  }
  if (coeffs[0] == 0.0) {
    throw_error(ErrorCode::kSingularStrategy, "toeplitz needs coeffs[0] != 0");
  }
  Strategy s;
  s.n = n;
  s.kind = StrategyKind::kToeplitz;
  s.coeffs = std::move(coeffs);
  return s;
}

Strategy Strategy::banded_toeplitz(int n, std::vector<double> coeffs) {
  check_steps(n);
  if (coeffs.empty() || static_cast<int>(coeffs.size()) > n) {
    throw_error(ErrorCode::kShape, "banded coeffs must have length in [1, n]");
  }
  if (coeffs[0] == 0.0) {
    throw_error(ErrorCode::kSingularStrategy, "banded needs coeffs[0] != 0");
  }
  Strategy s;
  s.n = n;
  s.kind = StrategyKind::kBandedToeplitz;
  s.coeffs = std::move(coeffs);
  return s;
}

Strategy Strategy::blt(int n, std::vector<double> alpha,
                       std::vector<double> lambda) {
  check_steps(n);
  check_blt_params(alpha, lambda);
  Strategy s;
  s.n = n;
  s.kind = StrategyKind::kBlt;
  s.alpha = std::move(alpha);
  s.lambda = std::move(lambda);
  return s;
}

Strategy Strategy::tree(int n, TreeVariant variant) {
  check_steps(n);
  Strategy s;
  s.n = n;
  s.kind = StrategyKind::kTree;
  s.tree_variant = variant;
  return s;
}

Strategy Strategy::identity(int n) { return banded_toeplitz(n, {1.0}); }

int Strategy::bands() const {
  switch (kind) {
    case StrategyKind::kBandedToeplitz:
      return static_cast<int>(coeffs.size());
    default:
      return n;
  }
}

std::vector<double> optimal_toeplitz_coeffs(int n) {
  check_steps(n);
  std::vector<double> c(n);
  c[0] = 1.0;
  for (int t = 1; t < n; ++t) c[t] = c[t - 1] * (2.0 * t - 1.0) / (2.0 * t);
  return c;
}

std::vector<double> inverse_toeplitz_coeffs(const std::vector<double>& coeffs,
                                            int n) {
  check_steps(n);
  if (coeffs.empty() || coeffs[0] == 0.0) {
    throw_error(ErrorCode::kSingularStrategy,
                "inverse_toeplitz_coeffs: coeffs[0] must be nonzero");
  }
  const int b = std::min<int>(static_cast<int>(coeffs.size()), n);
  // Power-series inversion: conv(c, c') = e_0, solved forward.
  std::vector<double> inv(n);
  inv[0] = 1.0 / coeffs[0];
  for (int t = 1; t < n; ++t) {
    double acc = 0.0;
    const int reach = std::min(t, b - 1);
    for (int tau = 1; tau <= reach; ++tau) acc += coeffs[tau] * inv[t - tau];
    inv[t] = -acc / coeffs[0];
  }
  return inv;
}

std::vector<double> blt_coeffs(const std::vector<double>& alpha,
                               const std::vector<double>& lambda, int n) {
  check_steps(n);
  if (alpha.size() != lambda.size()) {
    throw_error(ErrorCode::kShape, "blt_coeffs: alpha and lambda lengths differ");
  }
  const int d = static_cast<int>(alpha.size());
  std::vector<double> c(n, 0.0);
  c[0] = 1.0;
  std::vector<double> pow(d, 1.0);
  for (int t = 1; t < n; ++t) {
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      acc += alpha[i] * pow[i];
      pow[i] *= lambda[i];
    }
    c[t] = acc;
  }
  return c;
}

std::pair<std::vector<double>, std::vector<double>> calc_output_scale(
    const std::vector<double>& lambda, const std::vector<double>& lambda_hat) {
  const int d = static_cast<int>(lambda.size());
  if (static_cast<int>(lambda_hat.size()) != d) {
    throw_error(ErrorCode::kShape, "calc_output_scale: lengths differ");
  }
  auto check_distinct = [](const std::vector<double>& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        if (std::abs(v[i] - v[j]) < kDistinctTolerance) {
          throw_error(ErrorCode::kDegenerateParameter,
                      std::string("calc_output_scale: coincident ") + what);
        }
      }
    }
  };
  check_distinct(lambda, "lambda");
  check_distinct(lambda_hat, "lambda_hat");
  for (double l : lambda) {
    for (double lh : lambda_hat) {
      if (std::abs(l - lh) < kDistinctTolerance) {
        throw_error(ErrorCode::kDegenerateParameter,
                    "calc_output_scale: lambda meets lambda_hat");
      }
    }
  }
  std::vector<double> alpha(d), alpha_hat(d);
  for (int i = 0; i < d; ++i) {
    double num = 1.0, den = 1.0;
    for (int j = 0; j < d; ++j) {
      num *= lambda[i] - lambda_hat[j];
      if (j != i) den *= lambda[i] - lambda[j];
    }
    alpha[i] = num / den;
    num = 1.0;
    den = 1.0;
    for (int j = 0; j < d; ++j) {
      num *= lambda_hat[i] - lambda[j];
      if (j != i) den *= lambda_hat[i] - lambda_hat[j];
    }
    alpha_hat[i] = num / den;
  }
  return {std::move(alpha), std::move(alpha_hat)};
}

InverseBltParams blt_invert(const std::vector<double>& alpha,
                            const std::vector<double>& lambda) {
  const int d = static_cast<int>(alpha.size());
  if (static_cast<int>(lambda.size()) != d) {
    throw_error(ErrorCode::kShape, "blt_invert: alpha and lambda lengths differ");
  }
  if (d == 0) return {};

  // Generating function r(x) = 1 + sum_i alpha_i x / (1 - lambda_i x)
  // = p(x) / q(x) with q(x) = prod_i (1 - lambda_i x). The inverse BLT's decay
  // parameters are the roots of the monic reversal of p, found as companion
  // matrix eigenvalues; a degree-deficient p contributes roots at zero.
  std::vector<double> q{1.0};
  for (double l : lambda) {
    std::vector<double> next(q.size() + 1, 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
      next[i] += q[i];
      next[i + 1] -= l * q[i];
    }
    q = std::move(next);
  }
  std::vector<double> p = q;  // degree d, p[0] = 1
  for (int i = 0; i < d; ++i) {
    std::vector<double> qi{1.0};
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      std::vector<double> next(qi.size() + 1, 0.0);
      for (std::size_t s = 0; s < qi.size(); ++s) {
        next[s] += qi[s];
        next[s + 1] -= lambda[j] * qi[s];
      }
      qi = std::move(next);
    }
    // p += alpha_i * x * qi
    for (std::size_t s = 0; s < qi.size(); ++s) p[s + 1] += alpha[i] * qi[s];
  }

  // lambda_hat solve sum_i p_i y^{d-i} = 0 (monic since p[0] = 1).
  std::vector<double> lambda_hat(d, 0.0);
  if (d == 1) {
    lambda_hat[0] = -p[1];
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
    for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) companion(i, d - 1) = -p[d - i];
    Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, /*computeEigenvectors=*/false);
    const auto values = eig.eigenvalues();
    for (int i = 0; i < d; ++i) {
      if (std::abs(values[i].imag()) > kComplexTolerance) {
        throw_error(ErrorCode::kNonRealInverse,
                    "blt_invert: complex inverse decay parameters");
      }
      lambda_hat[i] = values[i].real();
    }
    std::sort(lambda_hat.begin(), lambda_hat.end(), std::greater<double>());
  }
  for (int i = 0; i + 1 < d; ++i) {
    if (std::abs(lambda_hat[i] - lambda_hat[i + 1]) < kDistinctTolerance) {
      throw_error(ErrorCode::kDegenerateParameter,
                  "blt_invert: repeated inverse decay parameters");
    }
  }

  auto scales = calc_output_scale(lambda, lambda_hat);
  InverseBltParams inv;
  inv.lambda_hat = std::move(lambda_hat);
  inv.alpha_hat = std::move(scales.second);
  return inv;
}

// Post-order index of the node spanning [s, e] in the complete binary tree
// over [0, padded-1]. A subtree with w leaves holds 2w-1 nodes and its root
// comes last, so a descent accumulating completed-left-subtree counts gives
// the index in O(log padded).
std::int64_t tree_post_order_index(int padded, int s, int e) {
  int lo = 0, hi = padded - 1;
  std::int64_t base = 0;
  while (true) {
    if (lo == s && hi == e) {
      return base + 2 * static_cast<std::int64_t>(hi - lo + 1) - 2;
    }
    const int mid = (lo + hi) / 2;
    if (e <= mid) {
      hi = mid;
    } else if (s > mid) {
      base += 2 * static_cast<std::int64_t>(mid - lo + 1) - 1;
      lo = mid + 1;
    } else {
      throw_error(ErrorCode::kUnsupported, "not a dyadic node");
    }
  }
}

TreeFactorization tree_factorization(int n, TreeVariant variant, int limit) {
  check_steps(n);
  if (n > limit) {
    throw_error(ErrorCode::kSize, "tree_factorization: n exceeds limit");
  }
  const int padded = padded_size(n);
  const std::int64_t total = 2 * static_cast<std::int64_t>(padded) - 1;

  std::vector<bool> keep(total, false);
  if (variant == TreeVariant::kBasic) {
    for (int t = 0; t < n; ++t) {
      for_each_dyadic_block(t, [&](int s, int e) {
        keep[tree_post_order_index(padded, s, e)] = true;
      });
    }
  } else {
    // Full pseudoinverse keeps every node that touches a real leaf; nodes
    // entirely in the zero padding would contribute all-zero encoder rows.
    std::vector<std::pair<int, int>> stack{{0, padded - 1}};
    while (!stack.empty()) {
      auto [s, e] = stack.back();
      stack.pop_back();
      if (s >= n) continue;
      keep[tree_post_order_index(padded, s, e)] = true;
      if (s < e) {
        const int mid = (s + e) / 2;
        stack.push_back({s, mid});
        stack.push_back({mid + 1, e});
      }
    }
  }

  TreeFactorization out;
  out.padded_n = padded;
  std::vector<std::int64_t> row_of(total, -1);
  for (std::int64_t p = 0; p < total; ++p) {
    if (keep[p]) {
      row_of[p] = static_cast<std::int64_t>(out.node_ids.size());
      out.node_ids.push_back(p);
    }
  }
  const auto kept = static_cast<Eigen::Index>(out.node_ids.size());

  // Encoder rows are subtree-sum indicators over the real leaves. Spans are
  // recovered by walking the tree once.
  out.encoder = Eigen::MatrixXd::Zero(kept, n);
  {
    std::vector<std::pair<int, int>> stack{{0, padded - 1}};
    while (!stack.empty()) {
      auto [s, e] = stack.back();
      stack.pop_back();
      const std::int64_t id = tree_post_order_index(padded, s, e);
      if (row_of[id] >= 0) {
        for (int j = s; j <= std::min(e, n - 1); ++j) {
          out.encoder(row_of[id], j) = 1.0;
        }
      }
      if (s < e) {
        const int mid = (s + e) / 2;
        stack.push_back({s, mid});
        stack.push_back({mid + 1, e});
      }
    }
  }

  if (variant == TreeVariant::kBasic) {
    out.decoder = Eigen::MatrixXd::Zero(n, kept);
    for (int t = 0; t < n; ++t) {
      for_each_dyadic_block(t, [&](int s, int e) {
        out.decoder(t, row_of[tree_post_order_index(padded, s, e)]) = 1.0;
      });
    }
  } else {
    const Eigen::MatrixXd a =
        materialize_workload(WorkloadSpec::prefix(n), limit);
    const Eigen::MatrixXd pinv =
        out.encoder.completeOrthogonalDecomposition().pseudoInverse();
    out.decoder = a * pinv;
  }
  return out;
}

Strategy column_normalize(const Strategy& strategy, int limit) {
  if (strategy.kind == StrategyKind::kTree) {
    throw_error(ErrorCode::kUnsupported,
                "column_normalize: tree strategies are not square");
  }
  Eigen::MatrixXd c = materialize_strategy(strategy, limit);
  for (Eigen::Index t = 0; t < c.cols(); ++t) {
    const double norm = c.col(t).norm();
    if (norm == 0.0) {
      throw_error(ErrorCode::kSingularStrategy, "column_normalize: zero column");
    }
    c.col(t) /= norm;
  }
  return Strategy::dense_strategy(std::move(c));
}

Strategy restart_strategy(const Strategy& strategy, int k, int limit) {
  if (k < 1) throw_error(ErrorCode::kParameterDomain, "restart count must be >= 1");
  if (strategy.kind == StrategyKind::kTree) {
    throw_error(ErrorCode::kUnsupported, "restart_strategy: tree not supported");
  }
  const Eigen::MatrixXd c = materialize_strategy(strategy, limit);
  const int n = strategy.n;
  if (static_cast<std::int64_t>(n) * k > limit) {
    throw_error(ErrorCode::kSize, "restart_strategy: k*n exceeds limit");
  }
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n * k, n * k);
  for (int j = 0; j < k; ++j) big.block(j * n, j * n, n, n) = c;
  return Strategy::dense_strategy(std::move(big));
}

Eigen::MatrixXd materialize_strategy(const Strategy& strategy, int limit) {
  if (strategy.n > limit) {
    throw_error(ErrorCode::kSize, "materialize_strategy: n exceeds limit");
  }
  switch (strategy.kind) {
    case StrategyKind::kDense:
      return strategy.dense;
    case StrategyKind::kToeplitz:
    case StrategyKind::kBandedToeplitz: {
      const int n = strategy.n;
      const int b = static_cast<int>(strategy.coeffs.size());
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
      for (int t = 0; t < n; ++t) {
        for (int tau = std::max(0, t - b + 1); tau <= t; ++tau) {
          m(t, tau) = strategy.coeffs[t - tau];
        }
      }
      return m;
    }
    case StrategyKind::kBlt: {
      const std::vector<double> c =
          blt_coeffs(strategy.alpha, strategy.lambda, strategy.n);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(strategy.n, strategy.n);
      for (int t = 0; t < strategy.n; ++t) {
        for (int tau = 0; tau <= t; ++tau) m(t, tau) = c[t - tau];
      }
      return m;
    }
    case StrategyKind::kTree:
      return tree_factorization(strategy.n, strategy.tree_variant, limit).encoder;
  }
  throw_error(ErrorCode::kParameterDomain, "unknown strategy kind");
}

}  // namespace corrnoise
