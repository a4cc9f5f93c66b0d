#include "corrnoise/workload.hpp"

#include <cmath>

namespace corrnoise {

namespace {

void check_steps(int n) {
  if (n < 1) throw_error(ErrorCode::kParameterDomain, "step count must be >= 1");
}

}  // namespace

WorkloadSpec WorkloadSpec::prefix(int n) {
  check_steps(n);
  WorkloadSpec spec;
  spec.n = n;
  spec.kind = WorkloadKind::kPrefix;
  return spec;
}

WorkloadSpec WorkloadSpec::momentum(int n, double beta, double weight_decay) {
  check_steps(n);
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw_error(ErrorCode::kParameterDomain, "momentum beta must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0 && weight_decay < 1.0)) {
    throw_error(ErrorCode::kParameterDomain, "weight decay must lie in [0, 1)");
  }
  WorkloadSpec spec;
  spec.n = n;
  spec.kind = WorkloadKind::kMomentum;
  spec.beta = beta;
  spec.weight_decay = weight_decay;
  return spec;
}

WorkloadSpec WorkloadSpec::custom(std::vector<double> coeffs) {
  check_steps(static_cast<int>(coeffs.size()));
  if (coeffs[0] == 0.0) {
    throw_error(ErrorCode::kParameterDomain, "custom workload needs a_0 != 0");
  }
  WorkloadSpec spec;
  spec.n = static_cast<int>(coeffs.size());
  spec.kind = WorkloadKind::kCustom;
  spec.coeffs = std::move(coeffs);
  return spec;
}

std::vector<double> workload_coefficients(const WorkloadSpec& spec) {
  check_steps(spec.n);
  switch (spec.kind) {
    case WorkloadKind::kPrefix:
      return std::vector<double>(spec.n, 1.0);
    case WorkloadKind::kMomentum: {
      // a_t = (1 - wd) a_{t-1} + beta^t, forward form of
      // a_t = sum_{tau<=t} beta^tau (1-wd)^{t-tau}; avoids cancellation as
      // beta -> 1.
      std::vector<double> a(spec.n);
      a[0] = 1.0;
      double beta_pow = 1.0;
      for (int t = 1; t < spec.n; ++t) {
        beta_pow *= spec.beta;
        a[t] = (1.0 - spec.weight_decay) * a[t - 1] + beta_pow;
      }
      return a;
    }
    case WorkloadKind::kCustom:
      return spec.coeffs;
  }
  throw_error(ErrorCode::kParameterDomain, "unknown workload kind");
}

Eigen::VectorXd workload_matvec(const WorkloadSpec& spec,
                                const Eigen::VectorXd& v) {
  if (v.size() != spec.n) {
    throw_error(ErrorCode::kShape, "workload_matvec: length mismatch");
  }
  Eigen::VectorXd out(spec.n);
  if (spec.kind == WorkloadKind::kPrefix) {
    double running = 0.0;
    for (int t = 0; t < spec.n; ++t) {
      running += v[t];
      out[t] = running;
    }
    return out;
  }
  const std::vector<double> a = workload_coefficients(spec);
  for (int t = 0; t < spec.n; ++t) {
    double acc = 0.0;
    for (int tau = 0; tau <= t; ++tau) acc += a[t - tau] * v[tau];
    out[t] = acc;
  }
  return out;
}

Eigen::MatrixXd materialize_workload(const WorkloadSpec& spec, int limit) {
  if (spec.n > limit) {
    throw_error(ErrorCode::kSize, "materialize_workload: n exceeds limit " +
                                      std::to_string(limit));
  }
  const std::vector<double> a = workload_coefficients(spec);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(spec.n, spec.n);
  for (int t = 0; t < spec.n; ++t) {
    for (int tau = 0; tau <= t; ++tau) m(t, tau) = a[t - tau];
  }
  return m;
}

}  // namespace corrnoise
