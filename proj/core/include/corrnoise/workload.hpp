#pragma once

#include <Eigen/Core>
#include <vector>

#include "corrnoise/errors.hpp"

namespace corrnoise {

// Dense materialization guard shared by all modules. 16384^2 doubles is the
// largest square buffer the library will allocate by default.
inline constexpr int kDefaultMaterializeLimit = 16384;

enum class WorkloadKind { kPrefix, kMomentum, kCustom };

// Lower-triangular Toeplitz workload A, described by its first column.
struct WorkloadSpec {
  int n = 0;
  WorkloadKind kind = WorkloadKind::kPrefix;
  double beta = 0.0;          // momentum coefficient, in [0, 1)
  double weight_decay = 0.0;  // in [0, 1)
  std::vector<double> coeffs; // custom first column, coeffs[0] != 0

  static WorkloadSpec prefix(int n);
  static WorkloadSpec momentum(int n, double beta, double weight_decay);
  static WorkloadSpec custom(std::vector<double> coeffs);
};

// First column of A. Prefix: all ones. Momentum: a_t = (1-wd)*a_{t-1} + beta^t,
// the stable forward form of the double-exponential sum.
std::vector<double> workload_coefficients(const WorkloadSpec& spec);

// A*v without materializing A. O(n) running sum for prefix, O(n^2) otherwise.
Eigen::VectorXd workload_matvec(const WorkloadSpec& spec,
                                const Eigen::VectorXd& v);

Eigen::MatrixXd materialize_workload(const WorkloadSpec& spec,
                                     int limit = kDefaultMaterializeLimit);

}  // namespace corrnoise
