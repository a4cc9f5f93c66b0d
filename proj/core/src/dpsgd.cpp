#include "corrnoise/dpsgd.hpp"

#include <cmath>

#include "corrnoise/noisegen.hpp"

namespace corrnoise {

namespace {

constexpr std::uint64_t kDataTag = 0x517cc1b727220a95ULL;
constexpr std::uint64_t kNoiseTag = 0x2545f4914f6cdd1dULL;

// Per-example feature row, regenerated from the data seed; x_i has
// covariance diag(cov_eigenvalues).
Eigen::VectorXd linreg_example(const SyntheticProblem& problem,
                               std::uint64_t data_seed, std::int64_t index) {
  NoiseSource source;
  source.base_seed = data_seed;
  source.nu = 1.0;
  source.m = problem.m;
  Eigen::VectorXd x = regenerate_row(source, index);
  for (int j = 0; j < problem.m; ++j) {
    x[j] *= std::sqrt(problem.cov_eigenvalues[j]);
  }
  return x;
}

}  // namespace

SyntheticProblem SyntheticProblem::constant2d() {
  SyntheticProblem p;
  p.kind = ProblemKind::kConstant2d;
  p.m = 2;
  return p;
}

SyntheticProblem SyntheticProblem::linreg(std::vector<double> cov_eigenvalues,
                                          std::vector<double> theta_star,
                                          bool realizable) {
  if (cov_eigenvalues.size() != theta_star.size() || cov_eigenvalues.empty()) {
    throw_error(ErrorCode::kShape,
                "linreg: covariance and theta_star dimensions differ");
  }
  for (double e : cov_eigenvalues) {
    if (!(e > 0.0)) {
      throw_error(ErrorCode::kParameterDomain,
                  "linreg: covariance eigenvalues must be positive");
    }
  }
  SyntheticProblem p;
  p.kind = ProblemKind::kLinReg;
  p.m = static_cast<int>(cov_eigenvalues.size());
  p.cov_eigenvalues = std::move(cov_eigenvalues);
  p.theta_star = std::move(theta_star);
  p.realizable = realizable;
  return p;
}

Eigen::VectorXd clip(const Eigen::VectorXd& v, double zeta) {
  if (!(zeta > 0.0)) {
    throw_error(ErrorCode::kParameterDomain, "clip norm must be positive");
  }
  const double norm = v.norm();
  if (norm <= zeta) return v;
  return v * (zeta / norm);
}

TrainingRun run_dpsgd(const SyntheticProblem& problem, const Strategy& strategy,
                      const ParticipationSchema& schema, double eta,
                      double zeta, double nu, int batch, int steps,
                      std::uint64_t seed, int limit) {
  if (steps < 1 || batch < 1) {
    throw_error(ErrorCode::kConfig, "steps and batch must be >= 1");
  }
  if (strategy.n < steps) {
    throw_error(ErrorCode::kConfig, "strategy covers fewer steps than the run");
  }
  validate_schema(schema, strategy.n);

  NoiseSource noise_source;
  noise_source.base_seed = mix64(seed ^ kNoiseTag);
  noise_source.nu = nu;
  noise_source.m = problem.m;
  auto generator = make_noise_generator(strategy, noise_source, limit);

  const std::uint64_t data_seed = mix64(seed ^ kDataTag);
  // Batch schedule: cyclic participation reuses the same disjoint batches
  // every epoch; otherwise batches are sequential and disjoint.
  const int steps_per_epoch =
      schema.kind == SchemaKind::kCyclic ? schema.b : steps;

  TrainingRun run;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(problem.m);
  Eigen::VectorXd noisy_prefix = Eigen::VectorXd::Zero(problem.m);
  Eigen::VectorXd clean_prefix = Eigen::VectorXd::Zero(problem.m);
  run.thetas.push_back(theta);
  run.per_step_prefix_error.resize(steps);

  double grad_sq_sum = 0.0, prefix_sq_sum = 0.0;
  for (int t = 0; t < steps; ++t) {
    // Clipped-averaged batch gradient at the private iterate.
    Eigen::VectorXd g = Eigen::VectorXd::Zero(problem.m);
    if (problem.kind == ProblemKind::kConstant2d) {
      Eigen::VectorXd example_grad(2);
      example_grad << -1.0, 0.0;
      g = clip(example_grad, zeta);  // identical for every example
    } else {
      const std::int64_t slot = t % steps_per_epoch;
      for (int i = 0; i < batch; ++i) {
        const std::int64_t example = slot * batch + i;
        const Eigen::VectorXd x = linreg_example(problem, data_seed, example);
        double y = x.dot(Eigen::Map<const Eigen::VectorXd>(
            problem.theta_star.data(), problem.m));
        if (!problem.realizable) {
          NoiseSource label_source;
          label_source.base_seed = mix64(data_seed ^ 0xa0761d6478bd642fULL);
          label_source.nu = 1.0;
          label_source.m = 1;
          y += regenerate_row(label_source, example)[0];
        }
        const Eigen::VectorXd grad_i = x * (x.dot(theta) - y);
        g += clip(grad_i, zeta);
      }
      g /= batch;
    }

    const Eigen::VectorXd noise = generator->next() / batch;
    const Eigen::VectorXd g_hat = g + noise;

    theta -= eta * g_hat;
    run.thetas.push_back(theta);

    noisy_prefix += g_hat;
    clean_prefix += g;
    grad_sq_sum += noise.squaredNorm();
    const double prefix_err = (noisy_prefix - clean_prefix).norm();
    run.per_step_prefix_error[t] = prefix_err;
    prefix_sq_sum += prefix_err * prefix_err;
  }

  run.grad_rmse = std::sqrt(grad_sq_sum / steps);
  run.prefix_rmse = std::sqrt(prefix_sq_sum / steps);
  return run;
}

}  // namespace corrnoise
