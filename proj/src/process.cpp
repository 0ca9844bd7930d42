#include "backflow/process.hpp"

#include <gsl/gsl_sf_expint.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "backflow/error.hpp"

namespace backflow {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* field, const char* condition) {
  if (!ok) {
    std::ostringstream os;
    os << field << ": " << condition;
    raise(ErrorCode::InvariantViolation, os.str());
  }
}

// Adaptive Simpson on [a, b] with the usual Richardson correction.
double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                       double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int panels) {
  double total = 0.0;
  const double width = (b - a) / panels;
  const double panel_tol = tol / panels;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * width;
    const double hi = (i + 1 == panels) ? b : lo + width;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_recurse(f, lo, hi, flo, fmid, fhi, whole, panel_tol, 40);
  }
  return total;
}

// (2/pi) * int_W^inf cos(x s) / x^2 dx, the leading term of the two
// Lorentzian tails beyond +-W half widths (s = dw t).
double lorentzian_tail(double W, double s) {
  double integral = 1.0 / W;
  if (s > 0.0) {
    integral = std::cos(W * s) / W - s * (0.5 * kPi - gsl_sf_Si(W * s));
  }
  return 2.0 / kPi * integral;
}

}  // namespace

double omega_from_wavelength_nm(double wavelength_nm) {
  if (!(wavelength_nm > 0.0)) raise(ErrorCode::Input, "wavelength_nm must be > 0");
  return 2.0 * kPi * kSpeedOfLightMmPerPs / (wavelength_nm * 1e-6);
}

double wavelength_nm_from_omega(double omega_rad_per_ps) {
  if (!(omega_rad_per_ps > 0.0)) raise(ErrorCode::Input, "omega must be > 0");
  return 2.0 * kPi * kSpeedOfLightMmPerPs / omega_rad_per_ps * 1e6;
}

Spectrum Spectrum::lorentzian(double omega0, double delta_omega) {
  require(std::isfinite(omega0), "omega0_rad_per_ps", "must be finite");
  require(std::isfinite(delta_omega) && delta_omega > 0.0, "delta_omega",
          "must be > 0");
  return Spectrum(omega0, delta_omega);
}

Spectrum Spectrum::from_wavelength(double wavelength_nm, double inv_delta_omega_ps) {
  require(std::isfinite(inv_delta_omega_ps) && inv_delta_omega_ps > 0.0,
          "inv_delta_omega_ps", "must be > 0");
  require(std::isfinite(wavelength_nm) && wavelength_nm > 0.0, "wavelength_nm",
          "must be > 0");
  return lorentzian(omega_from_wavelength_nm(wavelength_nm), 1.0 / inv_delta_omega_ps);
}

double Spectrum::density(double omega) const {
  const double u = omega - omega0_;
  return delta_omega_ / kPi / (u * u + delta_omega_ * delta_omega_);
}

double Spectrum::amplitude(double omega) const { return std::sqrt(density(omega)); }

void ExperimentParams::validate() const {
  require(std::isfinite(x0_mm) && x0_mm >= 0.0, "x0_mm", "must be >= 0");
  require(std::isfinite(fiber_length_m) && fiber_length_m > 0.0, "fiber_length_m",
          "must be > 0");
  require(std::isfinite(delta_n) && delta_n > 0.0, "delta_n", "must be > 0");
  require(std::isfinite(n_bar) && n_bar > delta_n, "n_bar", "must exceed delta_n");
}

ProcessModel::ProcessModel(Spectrum spectrum, ExperimentParams params, Stages stages)
    : spectrum_(spectrum), params_(params), stages_(stages) {
  params_.validate();
  const double c = kSpeedOfLightMmPerPs;
  const double t0 = 2.0 * params_.x0_mm / c;
  const double t1 = (1.0 + params_.n_bar / params_.delta_n) * t0;
  double tf = t0 + params_.fiber_length_m * 1e3 * params_.n_bar / c;
  if (stages_ == Stages::DelayOnly) {
    require(t0 > 0.0, "x0_mm", "must be > 0 for a delay-only process");
    tf = t0;
  }
  times_ = {t0, t1, tf};
}

std::vector<double> ProcessModel::breakpoints() const {
  std::vector<double> out;
  for (double b : {times_.t0, times_.t1}) {
    if (b > 0.0 && b < times_.tf) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Stage ProcessModel::stage_at(double t, Side side) const {
  const auto& [t0, t1, tf] = times_;
  if (stages_ == Stages::DelayOnly) return Stage::Delay;
  if (side == Side::Left && t > 0.0) {
    if (t <= t0) return Stage::Delay;
    if (t <= t1) return Stage::FiberRecoherence;
    return Stage::FiberDecoherence;
  }
  if (t < t0) return Stage::Delay;
  if (t < t1) return Stage::FiberRecoherence;
  return Stage::FiberDecoherence;
}

StageFactors ProcessModel::stage_factors(Stage stage) const {
  if (stage == Stage::Delay) {
    // The H component is delayed by t relative to V.
    return {1.0, 0.0};
  }
  const double n_h = params_.n_bar - 0.5 * params_.delta_n;
  const double n_v = params_.n_bar + 0.5 * params_.delta_n;
  return {n_h / params_.n_bar, n_v / params_.n_bar};
}

double ProcessModel::effective_delay(double t) const {
  const double t0 = times_.t0;
  if (t < t0) return t;
  return t0 - params_.delta_n / params_.n_bar * (t - t0);
}

namespace {

void check_domain(const ProcessModel& model, double t) {
  if (!(t >= 0.0 && t <= model.times().tf)) {
    std::ostringstream os;
    os << "time " << t << " ps outside [0, " << model.times().tf << "] ps";
    raise(ErrorCode::Domain, os.str());
  }
}

void check_breakpoint(const ProcessModel& model, double t) {
  for (double b : model.breakpoints()) {
    if (t == b) {
      std::ostringstream os;
      os << "rate requested exactly at breakpoint t = " << b
         << " ps; use the one-sided evaluation";
      raise(ErrorCode::Breakpoint, os.str());
    }
  }
}

Side default_side(const ProcessModel& model, double t) {
  return t < model.times().tf ? Side::Right : Side::Left;
}

}  // namespace

Complex kappa(const ProcessModel& model, double t) {
  check_domain(model, t);
  const double tau = model.effective_delay(t);
  const auto& s = model.spectrum();
  return std::exp(Complex(-s.delta_omega() * std::abs(tau), s.omega0() * tau));
}

Complex kappa_quadrature(const Spectrum& spectrum, double t,
                         const QuadratureOptions& options) {
  if (!(t >= 0.0)) raise(ErrorCode::Domain, "kappa_quadrature requires t >= 0");
  // Dimensionless offset x = (w - w0)/dw; G dw = dx / (pi (1 + x^2)).
  const double s = spectrum.delta_omega() * t;
  const double W = options.half_window_widths;
  const int panels = std::max(16, static_cast<int>(2.0 * W));
  auto re = [s](double x) { return std::cos(x * s) / (kPi * (1.0 + x * x)); };
  auto im = [s](double x) { return std::sin(x * s) / (kPi * (1.0 + x * x)); };
  double real_part = adaptive_simpson(re, -W, W, options.abs_tolerance, panels);
  const double imag_part = adaptive_simpson(im, -W, W, options.abs_tolerance, panels);
  if (options.tail_correction) real_part += lorentzian_tail(W, s);
  const Complex carrier = std::polar(1.0, spectrum.omega0() * t);
  return carrier * Complex(real_part, imag_part);
}

double spectrum_normalization(const Spectrum& spectrum, const QuadratureOptions& options) {
  const double w0 = spectrum.omega0();
  const double dw = spectrum.delta_omega();
  const double W = options.half_window_widths;
  auto g = [&spectrum](double omega) { return spectrum.density(omega); };
  double total = adaptive_simpson(g, w0 - W * dw, w0 + W * dw, options.abs_tolerance,
                                  std::max(16, static_cast<int>(2.0 * W)));
  if (options.tail_correction) total += lorentzian_tail(W, 0.0);
  return total;
}

double gamma_one_sided(const ProcessModel& model, double t, Side side) {
  check_domain(model, t);
  const double dw = model.spectrum().delta_omega();
  const double ratio = model.params().delta_n / model.params().n_bar;
  switch (model.stage_at(t, side)) {
    case Stage::Delay:
      return dw;
    case Stage::FiberRecoherence:
      return -dw * ratio;
    case Stage::FiberDecoherence:
      return dw * ratio;
  }
  return 0.0;
}

double epsilon_one_sided(const ProcessModel& model, double t, Side side) {
  check_domain(model, t);
  const double w0 = model.spectrum().omega0();
  if (model.stage_at(t, side) == Stage::Delay) return w0;
  return -w0 * model.params().delta_n / model.params().n_bar;
}

double gamma(const ProcessModel& model, double t) {
  check_domain(model, t);
  check_breakpoint(model, t);
  return gamma_one_sided(model, t, default_side(model, t));
}

double epsilon(const ProcessModel& model, double t) {
  check_domain(model, t);
  check_breakpoint(model, t);
  return epsilon_one_sided(model, t, default_side(model, t));
}

}  // namespace backflow
