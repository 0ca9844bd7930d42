#include "backflow/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "backflow/error.hpp"
#include "levmar.hpp"

namespace backflow {

namespace {
constexpr double kC = kSpeedOfLightMmPerPs;
}

double final_distance_curve(double x0_mm, double inv_delta_omega_ps, double delta_n_l_mm) {
  return std::exp(-std::abs(delta_n_l_mm - 2.0 * x0_mm) / (kC * inv_delta_omega_ps));
}

FitResult fit_delta_omega(std::span<const double> x0_mm, std::span<const double> d_tf) {
  if (x0_mm.size() != d_tf.size()) raise(ErrorCode::Input, "x0 and D_tf differ in length");
  const std::size_t m = x0_mm.size();
  if (m < 3) raise(ErrorCode::Input, "fit needs at least three points");
  for (double d : d_tf) {
    if (!(d > 0.0 && d <= 1.0 + 1e-12)) raise(ErrorCode::Input, "D_tf values must lie in (0, 1]");
  }
  const auto [lo_it, hi_it] = std::minmax_element(x0_mm.begin(), x0_mm.end());
  if (*lo_it == *hi_it) raise(ErrorCode::Fit, "degenerate data: all x0 values are equal");

  // Path difference from the peak, width from the outermost points.
  const auto peak = std::max_element(d_tf.begin(), d_tf.end()) - d_tf.begin();
  const double L0 = 2.0 * x0_mm[static_cast<std::size_t>(peak)];
  double width_sum = 0.0;
  int width_count = 0;
  for (auto it : {lo_it, hi_it}) {
    const auto i = static_cast<std::size_t>(it - x0_mm.begin());
    const double lever = std::abs(L0 - 2.0 * x0_mm[i]);
    if (lever > 0.0 && d_tf[i] < 1.0) {
      width_sum += -kC * std::log(d_tf[i]) / lever;
      ++width_count;
    }
  }
  const double dw0 = width_count > 0 ? width_sum / width_count : 1.0 / 30.0;

  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const double dw = p[0];
    const double L = p[1];
    for (std::size_t i = 0; i < m; ++i) {
      const double arg = L - 2.0 * x0_mm[i];
      const double model = std::exp(-dw * std::abs(arg) / kC);
      const auto k = static_cast<Eigen::Index>(i);
      r[k] = model - d_tf[i];
      J(k, 0) = -std::abs(arg) / kC * model;
      const double sign = arg > 0.0 ? 1.0 : (arg < 0.0 ? -1.0 : 0.0);
      J(k, 1) = -dw * sign / kC * model;
    }
  };

  Eigen::VectorXd init(2);
  init << dw0, L0;
  const auto sol = detail::levenberg_marquardt(residuals, init, m);

  FitResult out;
  const double dw = sol.params[0];
  out.delta_n_l_mm = sol.params[1];
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  out.residual_norm = std::sqrt(sol.rss);
  out.physical = std::isfinite(dw) && dw > 0.0;
  out.inv_delta_omega_ps = 1.0 / dw;
  const double dof = static_cast<double>(m) - 2.0;
  const double s2 = dof > 0.0 ? sol.rss / dof : 0.0;
  const double var_dw = s2 * sol.jtj_inverse(0, 0);
  const double var_L = s2 * sol.jtj_inverse(1, 1);
  out.std_error_ps = std::sqrt(std::max(0.0, var_dw)) / (dw * dw);
  out.delta_n_l_std_error_mm = std::sqrt(std::max(0.0, var_L));
  return out;
}

std::vector<double> sample_spectrum_wavelength(const Spectrum& spectrum,
                                               std::span<const double> wavelength_nm) {
  std::vector<double> out;
  out.reserve(wavelength_nm.size());
  for (double lambda_nm : wavelength_nm) {
    const double lambda_mm = lambda_nm * 1e-6;
    const double omega = omega_from_wavelength_nm(lambda_nm);
    // |d omega / d lambda| per nm
    const double jacobian = 2.0 * std::numbers::pi * kC / (lambda_mm * lambda_mm) * 1e-6;
    out.push_back(spectrum.density(omega) * jacobian);
  }
  return out;
}

SpectrumFit fit_lorentzian_spectrum(std::span<const double> wavelength_nm,
                                    std::span<const double> intensity) {
  if (wavelength_nm.size() != intensity.size()) {
    raise(ErrorCode::Input, "wavelength and intensity differ in length");
  }
  const std::size_t m = wavelength_nm.size();
  if (m < 5) raise(ErrorCode::Input, "spectrum fit needs at least five samples");

  std::vector<double> omega(m), density(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double lambda_mm = wavelength_nm[i] * 1e-6;
    omega[i] = omega_from_wavelength_nm(wavelength_nm[i]);
    density[i] = intensity[i] * lambda_mm * lambda_mm / (2.0 * std::numbers::pi * kC) * 1e6;
  }

  const auto peak = static_cast<std::size_t>(
      std::max_element(density.begin(), density.end()) - density.begin());
  const double omega_ref = omega[peak];
  const double floor = *std::min_element(density.begin(), density.end());
  const double height = density[peak] - floor;
  if (!(height > 0.0)) raise(ErrorCode::Fit, "spectrum has no peak");

  // Width guess: distance from the peak to the nearest sample below half height.
  double half_width = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (density[i] - floor <= 0.5 * height) {
      const double d = std::abs(omega[i] - omega_ref);
      if (half_width == 0.0 || d < half_width) half_width = d;
    }
  }
  if (half_width == 0.0) raise(ErrorCode::Fit, "spectrum window does not reach half maximum");

  auto residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    const double amp = p[0], center = p[1], width = p[2], background = p[3];
    for (std::size_t i = 0; i < m; ++i) {
      const double u = (omega[i] - omega_ref - center) / width;
      const double shape = 1.0 / (1.0 + u * u);
      const auto k = static_cast<Eigen::Index>(i);
      r[k] = background + amp * shape - density[i];
      J(k, 0) = shape;
      J(k, 1) = amp * shape * shape * 2.0 * u / width;
      J(k, 2) = amp * shape * shape * 2.0 * u * u / width;
      J(k, 3) = 1.0;
    }
  };

  Eigen::VectorXd init(4);
  init << height, 0.0, half_width, floor;
  const auto sol = detail::levenberg_marquardt(residuals, init, m);

  SpectrumFit out;
  const double width = std::abs(sol.params[2]);
  out.inv_delta_omega_ps = 1.0 / width;
  out.center_omega_rad_per_ps = omega_ref + sol.params[1];
  out.center_wavelength_nm = wavelength_nm_from_omega(out.center_omega_rad_per_ps);
  out.residual_norm = std::sqrt(sol.rss);
  out.converged = sol.converged;
  const double dof = static_cast<double>(m) - 4.0;
  const double s2 = dof > 0.0 ? sol.rss / dof : 0.0;
  out.std_error_ps = std::sqrt(std::max(0.0, s2 * sol.jtj_inverse(2, 2))) / (width * width);
  return out;
}

}  // namespace backflow
