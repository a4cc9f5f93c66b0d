#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "corrnoise/workload.hpp"

namespace corrnoise {

enum class StrategyKind { kDense, kToeplitz, kBandedToeplitz, kBlt, kTree };
enum class TreeVariant { kBasic, kFullPseudoinverse };

// Strategy matrix C in one of five families. Only the fields of the active
// kind are meaningful; use the factory functions, which validate invariants.
struct Strategy {
  int n = 0;
  StrategyKind kind = StrategyKind::kToeplitz;
  Eigen::MatrixXd dense;             // kDense: lower triangular, invertible
  std::vector<double> coeffs;        // kToeplitz (length n), kBandedToeplitz (length b)
  std::vector<double> alpha;         // kBlt: alpha_i > 0
  std::vector<double> lambda;        // kBlt: 0 < lambda_i < 1, pairwise distinct
  TreeVariant tree_variant = TreeVariant::kBasic;

  static Strategy dense_strategy(Eigen::MatrixXd c);
  static Strategy toeplitz(int n, std::vector<double> coeffs);
  static Strategy banded_toeplitz(int n, std::vector<double> coeffs);
  static Strategy blt(int n, std::vector<double> alpha, std::vector<double> lambda);
  static Strategy tree(int n, TreeVariant variant);
  static Strategy identity(int n);  // banded Toeplitz with coeffs {1}

  // Band count of the Toeplitz representation (n when not banded).
  int bands() const;
};

// BLT(alpha_hat, lambda_hat) = BLT(alpha, lambda)^{-1}. alpha_hat entries are
// <= 0 for valid positive-alpha BLTs; lambda_hat entries lie in [-1, 1].
struct InverseBltParams {
  std::vector<double> alpha_hat;
  std::vector<double> lambda_hat;
};

// Tree-aggregation factorization B*C = A_pre over the zero-padded power-of-two
// tree. Rows of `encoder` (and columns of `decoder`) are the kept nodes;
// node_ids[i] is the kept node's post-order index in the padded tree, which
// keys its noise seed.
struct TreeFactorization {
  Eigen::MatrixXd decoder;        // B, n x kept
  Eigen::MatrixXd encoder;        // C, kept x n
  std::vector<std::int64_t> node_ids;
  int padded_n = 0;
};

// First column of A_pre^{1/2}: c*_0 = 1, c*_t = c*_{t-1} (2t-1)/(2t).
std::vector<double> optimal_toeplitz_coeffs(int n);

// First column of C^{-1} for lower-triangular Toeplitz C, length n. `coeffs`
// may be shorter than n (banded); trailing entries are treated as zero.
std::vector<double> inverse_toeplitz_coeffs(const std::vector<double>& coeffs,
                                            int n);

// Toeplitz coefficients of BLT(alpha, lambda): c_0 = 1,
// c_t = sum_i alpha_i lambda_i^{t-1}. Accepts any real parameters.
std::vector<double> blt_coeffs(const std::vector<double>& alpha,
                               const std::vector<double>& lambda, int n);

// Inverse-BLT parameters via the companion matrix of the numerator polynomial
// of the generating function, then calc_output_scale for the scales. O(d^3).
InverseBltParams blt_invert(const std::vector<double>& alpha,
                            const std::vector<double>& lambda);

// Unique scale parameters for mutually inverse BLTs with the given decay
// parameters: alpha_i = prod_j (l_i - lh_j) / prod_{j != i} (l_i - l_j).
std::pair<std::vector<double>, std::vector<double>> calc_output_scale(
    const std::vector<double>& lambda, const std::vector<double>& lambda_hat);

TreeFactorization tree_factorization(int n, TreeVariant variant,
                                     int limit = kDefaultMaterializeLimit);

// Rescales every column of C to unit norm; the result is a dense strategy.
Strategy column_normalize(const Strategy& strategy,
                          int limit = kDefaultMaterializeLimit);

// Block-diagonal replication of C across k epochs (k*n steps total).
Strategy restart_strategy(const Strategy& strategy, int k,
                          int limit = kDefaultMaterializeLimit);

// Exact dense representation. Square n x n for the invertible kinds; for tree
// strategies this is the rectangular encoder (see tree_factorization for the
// full pair).
Eigen::MatrixXd materialize_strategy(const Strategy& strategy,
                                     int limit = kDefaultMaterializeLimit);

}  // namespace corrnoise
