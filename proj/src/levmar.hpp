#pragma once

#include <Eigen/Dense>
#include <functional>

namespace backflow::detail {

// Fills residuals (size m) and Jacobian d residual / d param (m x n).
using ResidualFn =
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                       Eigen::MatrixXd& jacobian)>;

struct LevMarOptions {
  int max_iterations = 500;
  double relative_step_tolerance = 1e-13;
  double gradient_tolerance = 1e-16;
  double initial_damping = 1e-3;
};

struct LevMarResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd jtj_inverse;  // (J^T J)^-1 at the optimum
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Marquardt-scaled damped Gauss-Newton.
LevMarResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd initial,
                                 std::size_t residual_count,
                                 const LevMarOptions& options = {});

}  // namespace backflow::detail
