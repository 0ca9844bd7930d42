#pragma once

#include <span>
#include <vector>

#include "backflow/process.hpp"

namespace backflow {

struct FitResult {
  double inv_delta_omega_ps = 0.0;
  double std_error_ps = 0.0;
  double residual_norm = 0.0;
  double delta_n_l_mm = 0.0;  // fitted birefringent path difference
  double delta_n_l_std_error_mm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// False when the optimum has a non-positive width.
  bool physical = false;
};

/// Least-squares fit of D(x0) = exp(-dw |dn l - 2 x0| / c) over (dw, dn l).
/// Standard errors come from the Jacobian at the optimum scaled by the
/// residual variance. Throws ErrorCode::Input for fewer than three points
/// or D outside (0, 1], ErrorCode::Fit when all x0 coincide.
FitResult fit_delta_omega(std::span<const double> x0_mm, std::span<const double> d_tf);

/// Model curve used by fit_delta_omega.
double final_distance_curve(double x0_mm, double inv_delta_omega_ps, double delta_n_l_mm);

struct SpectrumFit {
  double inv_delta_omega_ps = 0.0;
  double std_error_ps = 0.0;
  double center_omega_rad_per_ps = 0.0;
  double center_wavelength_nm = 0.0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Intensity per unit wavelength of a Lorentzian spectrum, sampled at the
/// given wavelengths (as a spectrometer would record it).
std::vector<double> sample_spectrum_wavelength(const Spectrum& spectrum,
                                               std::span<const double> wavelength_nm);

/// Fits a Lorentzian plus constant background to a wavelength-domain
/// spectrum after changing variables to angular frequency
/// (I_w = I_lambda * lambda^2 / (2 pi c)).
SpectrumFit fit_lorentzian_spectrum(std::span<const double> wavelength_nm,
                                    std::span<const double> intensity);

}  // namespace backflow
