#include <doctest.h>

#include <Eigen/Dense>

#include "corrnoise/minimize.hpp"

using namespace corrnoise;

TEST_CASE("quadratic converges to the center") {
  Eigen::VectorXd target(3);
  target << 1.0, -2.0, 0.5;
  const ObjectiveFn f = [&target](const Eigen::VectorXd& x,
                                  Eigen::VectorXd& g) {
    g = 2.0 * (x - target);
    return (x - target).squaredNorm();
  };
  Eigen::VectorXd x0(3);
  x0 << -4.0, 3.0, 10.0;
  MinimizeOptions opts;
  opts.max_iterations = 50;
  const MinimizeResult res = minimize_smooth(f, x0, opts);
  CHECK(res.converged);
  CHECK((res.x - target).norm() <= 1e-8);
  CHECK(res.iterations <= 50);
}

TEST_CASE("Rosenbrock from the classic start") {
  const ObjectiveFn f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  // Armijo halving is slow on the banana valley; the budget is generous.
  MinimizeOptions opts;
  opts.max_iterations = 2000;
  opts.gradient_tolerance = 1e-10;
  const MinimizeResult res = minimize_smooth(f, x0, opts);
  CHECK(std::abs(res.x[0] - 1.0) <= 1e-6);
  CHECK(std::abs(res.x[1] - 1.0) <= 1e-6);
}

TEST_CASE("gradient transform keeps iterates on the level set") {
  // Minimize ||x - c||^2 subject to sum(x) fixed, via zero-sum projection.
  Eigen::VectorXd c(4);
  c << 3.0, -1.0, 2.0, 0.0;
  const ObjectiveFn f = [&c](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x - c);
    return (x - c).squaredNorm();
  };
  const GradientTransform project = [](Eigen::VectorXd& g) {
    g.array() -= g.mean();
  };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  const MinimizeResult res = minimize_smooth(f, x0, {}, project);
  CHECK(std::abs(res.x.sum()) <= 1e-9);
  // Optimum on the level set is c - mean(c).
  const Eigen::VectorXd want = c.array() - c.mean();
  CHECK((res.x - want).norm() <= 1e-6);
}

TEST_CASE("infinite trial values are rejected by the line search") {
  // Log barrier: full Newton-ish steps overshoot into the infeasible region.
  const ObjectiveFn f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(1);
    if (x[0] <= 0.0) {
      g[0] = 0.0;
      return std::numeric_limits<double>::infinity();
    }
    g[0] = 1.0 - 1.0 / x[0];
    return x[0] - std::log(x[0]);
  };
  Eigen::VectorXd x0(1);
  x0 << 5.0;
  const MinimizeResult res = minimize_smooth(f, x0);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("deterministic across repeated runs") {
  const ObjectiveFn f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 4.0 * x.array().pow(3).matrix() - 2.0 * x;
    return (x.array().pow(4) - x.array().square()).sum();
  };
  Eigen::VectorXd x0(6);
  x0 << 0.3, -0.7, 1.1, 0.9, -0.2, 0.4;
  const MinimizeResult a = minimize_smooth(f, x0);
  const MinimizeResult b = minimize_smooth(f, x0);
  CHECK(a.value == b.value);
  CHECK((a.x - b.x).norm() == 0.0);
  CHECK(a.iterations == b.iterations);
}
