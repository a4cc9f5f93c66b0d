#include "corrnoise/loss.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace corrnoise {

namespace {

constexpr double kEulerMascheroni = 0.5772156649;

// conv(a, c')[0..n-1] where a are the workload coefficients and c' the
// inverse strategy coefficients: the first column of B = A C^{-1}.
std::vector<double> decoder_coeffs(const std::vector<double>& workload_coeffs,
                                   const std::vector<double>& strategy_coeffs,
                                   int n) {
  const std::vector<double> inv = inverse_toeplitz_coeffs(strategy_coeffs, n);
  std::vector<double> b(n, 0.0);
  if (static_cast<int>(workload_coeffs.size()) < n) {
    throw_error(ErrorCode::kShape, "workload coefficients shorter than n");
  }
  for (int t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int j = 0; j <= t; ++j) acc += workload_coeffs[t - j] * inv[j];
    b[t] = acc;
  }
  return b;
}

FastLoss fast_loss_from_decoder(const std::vector<double>& b) {
  const int n = static_cast<int>(b.size());
  double total = 0.0, weighted = 0.0;
  for (int t = 0; t < n; ++t) {
    total += b[t] * b[t];
    weighted += (n - t) * b[t] * b[t];
  }
  // Row t of the Toeplitz B has squared norm sum_{tau<=t} b_tau^2, which is
  // non-decreasing in t, so the last row always attains the max.
  FastLoss loss;
  loss.max_error = std::sqrt(total);
  loss.rms_error = std::sqrt(weighted / n);
  return loss;
}

struct DenseErrors {
  double max_error;
  double rms_error;
};

DenseErrors errors_from_decoder_matrix(const Eigen::MatrixXd& b) {
  double max_sq = 0.0;
  for (Eigen::Index t = 0; t < b.rows(); ++t) {
    max_sq = std::max(max_sq, b.row(t).squaredNorm());
  }
  return {std::sqrt(max_sq),
          b.norm() / std::sqrt(static_cast<double>(b.rows()))};
}

}  // namespace

FastLoss toeplitz_fast_loss(const std::vector<double>& workload_coeffs,
                            const std::vector<double>& strategy_coeffs,
                            int n) {
  return fast_loss_from_decoder(
      decoder_coeffs(workload_coeffs, strategy_coeffs, n));
}

LossReport evaluate_loss(const WorkloadSpec& workload, const Strategy& strategy,
                         const ParticipationSchema& schema, int limit) {
  if (workload.n != strategy.n) {
    throw_error(ErrorCode::kShape, "workload and strategy step counts differ");
  }
  validate_schema(schema, strategy.n);

  LossReport report;
  if (strategy.kind == StrategyKind::kTree) {
    if (schema.kind != SchemaKind::kSingle) {
      throw_error(ErrorCode::kUnsupported,
                  "tree strategies support only single participation");
    }
    if (workload.kind != WorkloadKind::kPrefix) {
      throw_error(ErrorCode::kUnsupported,
                  "tree factorizations are defined for the prefix workload");
    }
    const TreeFactorization tree =
        tree_factorization(strategy.n, strategy.tree_variant, limit);
    const DenseErrors err = errors_from_decoder_matrix(tree.decoder);
    report.sensitivity = streaming_sensitivity(strategy, limit);
    report.max_error = err.max_error;
    report.rms_error = err.rms_error;
  } else if (strategy.kind == StrategyKind::kDense) {
    const Eigen::MatrixXd a = materialize_workload(workload, limit);
    // B = A C^{-1} by triangular solve: C^T B^T = A^T.
    const Eigen::MatrixXd bt = strategy.dense.transpose()
                                   .triangularView<Eigen::Upper>()
                                   .solve(a.transpose());
    const DenseErrors err = errors_from_decoder_matrix(bt.transpose());
    report.sensitivity = sensitivity(strategy, schema, limit);
    report.max_error = err.max_error;
    report.rms_error = err.rms_error;
  } else {
    const std::vector<double> strategy_coeffs =
        strategy.kind == StrategyKind::kBlt
            ? blt_coeffs(strategy.alpha, strategy.lambda, strategy.n)
            : strategy.coeffs;
    const FastLoss fast = toeplitz_fast_loss(workload_coefficients(workload),
                                             strategy_coeffs, strategy.n);
    report.sensitivity = sensitivity(strategy, schema, limit);
    report.max_error = fast.max_error;
    report.rms_error = fast.rms_error;
  }

  report.normalized_max_loss = report.sensitivity * report.max_error;
  report.normalized_rms_loss = report.sensitivity * report.rms_error;
  return report;
}

std::pair<double, double> dense_max_loss_bounds(int n) {
  if (n < 1) throw_error(ErrorCode::kParameterDomain, "n must be >= 1");
  const double lower = std::log(2.0 * n + 1.0) / std::numbers::pi;
  const double upper = 1.0 + std::log(static_cast<double>(n)) / std::numbers::pi;
  return {lower, upper};
}

double toeplitz_max_loss_bound(int n) {
  if (n < 1) throw_error(ErrorCode::kParameterDomain, "n must be >= 1");
  return (kEulerMascheroni + std::log(static_cast<double>(n))) /
             std::numbers::pi +
         1.0;
}

}  // namespace corrnoise
