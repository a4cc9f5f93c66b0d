#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "corrnoise/sensitivity.hpp"
#include "corrnoise/strategy.hpp"

namespace corrnoise {

enum class ProblemKind { kConstant2d, kLinReg };

// Toy objectives for the simulator. kConstant2d: every example's gradient is
// (-1, 0) regardless of the model. kLinReg: least squares on synthetic
// Gaussian inputs x ~ N(0, diag(cov_eigenvalues)); realizable means
// y = x^T theta_star exactly.
struct SyntheticProblem {
  ProblemKind kind = ProblemKind::kConstant2d;
  int m = 2;
  std::vector<double> cov_eigenvalues;
  std::vector<double> theta_star;
  bool realizable = true;

  static SyntheticProblem constant2d();
  static SyntheticProblem linreg(std::vector<double> cov_eigenvalues,
                                 std::vector<double> theta_star,
                                 bool realizable = true);
};

struct TrainingRun {
  std::vector<Eigen::VectorXd> thetas;  // length n+1, private trajectory
  double grad_rmse = 0.0;    // sqrt(mean_t ||ghat_t - g_t||^2)
  double prefix_rmse = 0.0;  // sqrt(mean_t ||sum_{tau<=t} (ghat - g)||^2)
  std::vector<double> per_step_prefix_error;  // ||sum_{tau<=t} (ghat - g)||
};

// v * min(1, zeta / ||v||): the clipped vector has norm at most zeta.
Eigen::VectorXd clip(const Eigen::VectorXd& v, double zeta);

// Mini-batch DP-SGD with correlated noise: theta_{t+1} = theta_t -
// eta*(gbar_t + z~_t / batch), gbar_t the clipped-averaged batch gradient and
// z~_t drawn from the strategy's streaming generator at standard deviation nu
// (calibrated to sum-of-gradients scale). A noiseless twin consuming the same
// clipped gradients provides the error baselines.
TrainingRun run_dpsgd(const SyntheticProblem& problem, const Strategy& strategy,
                      const ParticipationSchema& schema, double eta,
                      double zeta, double nu, int batch, int steps,
                      std::uint64_t seed,
                      int limit = kDefaultMaterializeLimit);

}  // namespace corrnoise
