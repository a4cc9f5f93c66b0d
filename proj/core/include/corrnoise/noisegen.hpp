#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "corrnoise/noise_source.hpp"
#include "corrnoise/strategy.hpp"

namespace corrnoise {

// Streaming producer of correlated noise rows z~_t = (C^{-1} Z)[t, :]. A
// generator is advance-only and single-threaded; independent generators may
// run concurrently.
class NoiseGenerator {
 public:
  virtual ~NoiseGenerator() = default;

  // Emits z~_t and advances. Throws kExhaustedStream once step() == horizon().
  virtual Eigen::VectorXd next() = 0;

  std::int64_t step() const { return step_; }
  std::int64_t horizon() const { return n_; }

 protected:
  NoiseGenerator(std::int64_t n) : n_(n) {}
  void check_not_exhausted() const;
  std::int64_t step_ = 0;
  std::int64_t n_ = 0;
};

// Per-family states: banded keeps a ring buffer of the last b-1 emitted rows;
// BLT keeps an m x d buffer M_t with M_t[:,i] = sum_{tau>=1} lambda_i^{tau-1}
// z~_{t-tau}; dense and Toeplitz regenerate source rows 0..t each step; tree
// keeps the previous decoded prefix-noise row.
std::unique_ptr<NoiseGenerator> make_noise_generator(
    const Strategy& strategy, const NoiseSource& source,
    int limit = kDefaultMaterializeLimit);

// BLT recursion driven by raw parameters (C = BLT(alpha, lambda)); accepts any
// real decay values with |lambda_i| <= 1, including the negative decays that
// inverse parameterizations can produce.
std::unique_ptr<NoiseGenerator> make_blt_noise_generator(
    std::vector<double> alpha, std::vector<double> lambda, std::int64_t n,
    const NoiseSource& source);

// (B_tree Z)[t, :]: sum of the node noises over the maximal dyadic partition
// of [0, t], each regenerated from (source.base_seed, post-order node index).
Eigen::VectorXd tree_prefix_noise_row(const TreeFactorization& tree,
                                      const NoiseSource& source,
                                      std::int64_t t);

}  // namespace corrnoise
