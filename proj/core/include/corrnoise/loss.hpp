#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "corrnoise/sensitivity.hpp"
#include "corrnoise/strategy.hpp"
#include "corrnoise/workload.hpp"

namespace corrnoise {

struct LossReport {
  double sensitivity = 0.0;
  double max_error = 0.0;           // max row norm of B = A C^{-1}
  double rms_error = 0.0;           // ||B||_F / sqrt(n)
  double normalized_max_loss = 0.0; // sensitivity * max_error
  double normalized_rms_loss = 0.0; // sensitivity * rms_error
  std::optional<double> calibrated_nu;
};

struct FastLoss {
  double max_error = 0.0;
  double rms_error = 0.0;
};

// Normalized losses of the factorization A = B C under the given schema.
// B is obtained by triangular solve (tree strategies use their explicit B).
LossReport evaluate_loss(const WorkloadSpec& workload, const Strategy& strategy,
                         const ParticipationSchema& schema,
                         int limit = kDefaultMaterializeLimit);

// Errors of B = A C^{-1} for Toeplitz A and C in O(n b) time and O(n) space.
// With b = conv(workload coeffs, inverse strategy coeffs), the last row of the
// Toeplitz B always dominates, so max_error^2 = ||b||^2 and
// rms_error^2 = (1/n) sum_t (n-t) b_t^2.
FastLoss toeplitz_fast_loss(const std::vector<double>& workload_coeffs,
                            const std::vector<double>& strategy_coeffs, int n);

// (ln(2n+1)/pi, 1 + ln(n)/pi): bounds on the optimal max loss for A_pre.
std::pair<double, double> dense_max_loss_bounds(int n);

// (gamma + ln n)/pi + 1, the max-loss bound of the square-root factorization.
double toeplitz_max_loss_bound(int n);

}  // namespace corrnoise
