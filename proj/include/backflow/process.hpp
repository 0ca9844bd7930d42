#pragma once

#include <complex>
#include <vector>

#include "backflow/qubit.hpp"

namespace backflow {

// Units: time in ps, angular frequency in rad/ps, delay lengths in mm,
// fiber length in m.
inline constexpr double kSpeedOfLightMmPerPs = 0.299792458;

/// Angular frequency (rad/ps) of light with the given vacuum wavelength.
double omega_from_wavelength_nm(double wavelength_nm);
/// Inverse of omega_from_wavelength_nm.
double wavelength_nm_from_omega(double omega_rad_per_ps);

/// Lorentzian photon frequency distribution
///   G(w) = (dw/pi) / ((w - w0)^2 + dw^2),
/// with dw the half width at half maximum (FWHM = 2 dw).
class Spectrum {
 public:
  /// Throws ErrorCode::InvariantViolation unless delta_omega > 0.
  static Spectrum lorentzian(double omega0, double delta_omega);
  /// Center from a wavelength, width given as the coherence time 1/dw.
  static Spectrum from_wavelength(double wavelength_nm, double inv_delta_omega_ps);

  double omega0() const noexcept { return omega0_; }
  double delta_omega() const noexcept { return delta_omega_; }

  double density(double omega) const;
  /// Amplitude A(w) with G = |A|^2 (chosen real and non-negative).
  double amplitude(double omega) const;

 private:
  Spectrum(double omega0, double delta_omega)
      : omega0_(omega0), delta_omega_(delta_omega) {}
  double omega0_;
  double delta_omega_;
};

struct ExperimentParams {
  double x0_mm = 19.15;
  double fiber_length_m = 100.0;
  double delta_n = 3.83e-4;
  double n_bar = 1.45;

  /// Throws ErrorCode::InvariantViolation naming the offending field.
  void validate() const;
};

enum class Stages {
  DelayAndFiber,
  /// Delay stage only; the process terminates at t0.
  DelayOnly,
};

struct StageTimes {
  double t0;  // end of the delay stage, 2 x0 / c
  double t1;  // zero crossing of the fiber-stage argument, (1 + n/dn) t0
  double tf;  // photon leaves the fiber
};

enum class Stage { Delay, FiberRecoherence, FiberDecoherence };

/// Per-stage multipliers u_H, u_V of the frequency phase in the total
/// unitary. Only their difference matters for the reduced dynamics.
struct StageFactors {
  double u_h;
  double u_v;
};

enum class Side { Left, Right };

class ProcessModel {
 public:
  ProcessModel(Spectrum spectrum, ExperimentParams params,
               Stages stages = Stages::DelayAndFiber);

  const Spectrum& spectrum() const noexcept { return spectrum_; }
  const ExperimentParams& params() const noexcept { return params_; }
  Stages stages() const noexcept { return stages_; }
  const StageTimes& times() const noexcept { return times_; }

  /// Interior breakpoints of the generator, sorted, within (0, tf).
  std::vector<double> breakpoints() const;

  /// Stage governing the open interval on the given side of t.
  Stage stage_at(double t, Side side = Side::Right) const;
  StageFactors stage_factors(Stage stage) const;

  /// Fiber-stage argument t0 - (dn/n)(t - t0). Equals t in the delay stage.
  double effective_delay(double t) const;

 private:
  Spectrum spectrum_;
  ExperimentParams params_;
  Stages stages_;
  StageTimes times_;
};

/// Decoherence function: exp(i w0 t - dw t) during the delay stage and
/// exp(i w0 tau - dw |tau|), tau = t0 - (dn/n)(t - t0), in the fiber.
/// Throws ErrorCode::Domain outside [0, tf].
Complex kappa(const ProcessModel& model, double t);

struct QuadratureOptions {
  double half_window_widths = 200.0;  // integrate over w0 +- this * dw
  double abs_tolerance = 1e-6;
  bool tail_correction = true;
};

/// Numerical Fourier integral  int dw G(w) exp(i w t)  of the Lorentzian.
/// Independent of the closed form used by kappa().
Complex kappa_quadrature(const Spectrum& spectrum, double t,
                         const QuadratureOptions& options = {});

/// Integral of G over the quadrature window (plus the analytic tail when
/// enabled). Used to check normalization.
double spectrum_normalization(const Spectrum& spectrum,
                              const QuadratureOptions& options = {});

/// Decay rate -Re[kappa'/kappa]. Throws ErrorCode::Breakpoint at an
/// interior breakpoint and ErrorCode::Domain outside [0, tf]. At tf the
/// left limit is returned.
double gamma(const ProcessModel& model, double t);
/// Energy shift: w0 in the delay stage, -w0 dn/n in the fiber. This is
/// the sign that makes the master equation reproduce the dynamical map.
double epsilon(const ProcessModel& model, double t);

double gamma_one_sided(const ProcessModel& model, double t, Side side);
double epsilon_one_sided(const ProcessModel& model, double t, Side side);

}  // namespace backflow
