#pragma once

#include <Eigen/Core>
#include <functional>

namespace corrnoise {

// Objective callable: writes the gradient at x into `grad` and returns f(x).
// May return +inf to reject a trial point during line search.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Optional in-place gradient transform, applied to every gradient before it
// enters the L-BFGS history or a search direction (used to project gradients
// onto linear constraint level sets).
using GradientTransform = std::function<void(Eigen::VectorXd& grad)>;

struct MinimizeOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;  // on the (transformed) gradient inf-norm
  int memory_pairs = 10;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_inf_norm = 0.0;
};

// Limited-memory quasi-Newton descent with Armijo backtracking (halving, at
// most 40 backtracks per iteration). Deterministic given its inputs. On line
// search failure returns the best point seen with converged = false.
MinimizeResult minimize_smooth(const ObjectiveFn& objective,
                               const Eigen::VectorXd& x0,
                               const MinimizeOptions& options = {},
                               const GradientTransform& transform = nullptr);

}  // namespace corrnoise
