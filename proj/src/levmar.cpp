#include "levmar.hpp"

#include <cmath>

namespace backflow::detail {

LevMarResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd initial,
                                 std::size_t residual_count, const LevMarOptions& options) {
  const auto n = initial.size();
  const auto m = static_cast<Eigen::Index>(residual_count);
  Eigen::VectorXd r(m), r_trial(m);
  Eigen::MatrixXd J(m, n), J_trial(m, n);

  LevMarResult out;
  out.params = std::move(initial);
  fn(out.params, r, J);
  double rss = r.squaredNorm();
  double lambda = options.initial_damping;

  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.cwiseAbs().maxCoeff() <= options.gradient_tolerance) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    bool tiny_step = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      for (Eigen::Index k = 0; k < n; ++k) A(k, k) += lambda * std::max(JtJ(k, k), 1e-300);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd trial = out.params + step;
      fn(trial, r_trial, J_trial);
      const double rss_trial = r_trial.squaredNorm();
      if (std::isfinite(rss_trial) && rss_trial <= rss) {
        tiny_step = (step.array().abs() <=
                     options.relative_step_tolerance *
                         (out.params.array().abs() + options.relative_step_tolerance))
                        .all();
        out.params = trial;
        r.swap(r_trial);
        J.swap(J_trial);
        rss = rss_trial;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    // No downhill step at any damping means a numerically stationary point.
    if (!accepted || tiny_step || rss == 0.0) {
      out.converged = true;
      break;
    }
  }

  out.rss = rss;
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  out.jtj_inverse = JtJ.completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

}  // namespace backflow::detail
