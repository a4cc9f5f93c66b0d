#pragma once

#include <cstdint>

#include "corrnoise/minimize.hpp"
#include "corrnoise/sensitivity.hpp"
#include "corrnoise/strategy.hpp"
#include "corrnoise/workload.hpp"

namespace corrnoise {

enum class LossObjective { kMaxLoss, kRmsLoss };

struct OptimizerConfig {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;  // gradient inf-norm
  int memory_pairs = 10;
  double barrier_weight = 1e-3;  // halved on each of 3 warm restarts
  std::uint64_t seed = 0;        // randomized initializations only
};

struct OptimizationResult {
  Strategy strategy;
  double objective = 0.0;  // final normalized loss
  int iterations = 0;
  bool converged = false;
  double certificate = 0.0;  // dense: final projected-gradient inf-norm
};

// RMS-loss-optimal dense strategy via the Gram reformulation: minimize
// trace(A M^{-1} A^T) over symmetric M with diag(M) = 1, starting from the
// identity. Positive definiteness is not enforced; a Cholesky failure at the
// solution raises kIndefiniteSolution.
OptimizationResult optimize_dense_streaming(const WorkloadSpec& workload, int n,
                                            const OptimizerConfig& config = {});

// Multi-participation dense optimization. Cyclic pins co-pattern off-diagonal
// Gram entries to zero and per-pattern diagonal sums to one (by gradient
// projection); minsep pins diag(M) = 1 with a b-banded M; full degenerates to
// the identity.
OptimizationResult optimize_dense_multi(const WorkloadSpec& workload, int n,
                                        const ParticipationSchema& schema,
                                        const OptimizerConfig& config = {});

// Banded Toeplitz coefficient optimization with c_0 pinned to 1. For cyclic
// and minsep schemas the band count must not exceed the separation, so the
// sensitivity is sqrt(k) times the column norm.
OptimizationResult optimize_banded_toeplitz(const WorkloadSpec& workload, int n,
                                            int bands,
                                            const ParticipationSchema& schema,
                                            LossObjective objective,
                                            const OptimizerConfig& config = {});

// BLT parameter optimization over (alpha, lambda) with the log-barrier
// h(alpha, lambda) = -sum_i (log lambda_i + log(1 - lambda_i) + log alpha_i).
// Streaming uses the O(d^2) closed forms; multi-participation schemas
// materialize the Toeplitz coefficients.
OptimizationResult optimize_blt(const WorkloadSpec& workload, int n,
                                int buffers, const ParticipationSchema& schema,
                                LossObjective objective,
                                const OptimizerConfig& config = {});

}  // namespace corrnoise
