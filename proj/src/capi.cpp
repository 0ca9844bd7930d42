#include "backflow/backflow.h"

#include <algorithm>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "backflow/dynamics.hpp"
#include "backflow/error.hpp"
#include "backflow/experiment.hpp"
#include "backflow/fit.hpp"
#include "backflow/measure.hpp"
#include "backflow/process.hpp"

using namespace backflow;

struct bf_model {
  ProcessModel model;
};

struct bf_series {
  DistanceSeries series;
};

struct bf_measure_result {
  MeasureResult result;
};

namespace {

thread_local std::string g_last_error;

bf_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvariantViolation: return BF_ERR_INVARIANT;
    case ErrorCode::Domain: return BF_ERR_DOMAIN;
    case ErrorCode::Breakpoint: return BF_ERR_BREAKPOINT;
    case ErrorCode::StepSize: return BF_ERR_STEP_SIZE;
    case ErrorCode::Input: return BF_ERR_INPUT;
    case ErrorCode::Fit: return BF_ERR_FIT;
    case ErrorCode::Reconstruction: return BF_ERR_RECONSTRUCTION;
  }
  return BF_ERR_INTERNAL;
}

template <typename F>
bf_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return BF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return BF_ERR_INTERNAL;
}

bf_status null_argument(const char* name) {
  g_last_error = std::string("null argument: ") + name;
  return BF_ERR_NULL_ARGUMENT;
}

ProcessModel make_model(const bf_model_params& p) {
  ExperimentParams params{p.x0_mm, p.fiber_length_m, p.delta_n, p.n_bar};
  if (!(p.inv_delta_omega_ps > 0.0)) {
    raise(ErrorCode::InvariantViolation, "inv_delta_omega_ps: must be > 0");
  }
  const auto spectrum = Spectrum::lorentzian(p.omega0_rad_per_ps, 1.0 / p.inv_delta_omega_ps);
  return ProcessModel(spectrum, params,
                      p.delay_only ? Stages::DelayOnly : Stages::DelayAndFiber);
}

CountingConfig to_config(const bf_counting_config& c) {
  return {c.signal_rate_per_s, c.integration_time_s, c.dark_rate_per_s, c.seed};
}

StatePair to_pair(double theta, double xi) {
  return {PolarizationAngle::degrees(theta), PolarizationAngle::degrees(xi)};
}

}  // namespace

extern "C" {

const char* bf_version(void) { return "0.1.0"; }

const char* bf_last_error(void) { return g_last_error.c_str(); }

const char* bf_status_name(bf_status status) {
  switch (status) {
    case BF_OK: return "ok";
    case BF_ERR_NULL_ARGUMENT: return "null argument";
    case BF_ERR_INVARIANT: return "invariant violation";
    case BF_ERR_DOMAIN: return "domain error";
    case BF_ERR_BREAKPOINT: return "breakpoint";
    case BF_ERR_STEP_SIZE: return "step size";
    case BF_ERR_INPUT: return "input error";
    case BF_ERR_FIT: return "fit error";
    case BF_ERR_RECONSTRUCTION: return "reconstruction error";
    case BF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bf_model_params_default(bf_model_params* params) {
  if (params == nullptr) return;
  params->omega0_rad_per_ps = omega_from_wavelength_nm(946.3);
  params->inv_delta_omega_ps = 35.8;
  params->x0_mm = 19.15;
  params->fiber_length_m = 100.0;
  params->delta_n = 3.83e-4;
  params->n_bar = 1.45;
  params->delay_only = 0;
}

double bf_omega_from_wavelength_nm(double wavelength_nm) {
  return wavelength_nm > 0.0 ? omega_from_wavelength_nm(wavelength_nm) : 0.0;
}

void bf_counting_config_default(bf_counting_config* cfg) {
  if (cfg == nullptr) return;
  const CountingConfig d;
  cfg->signal_rate_per_s = d.signal_rate_per_s;
  cfg->integration_time_s = d.integration_time_s;
  cfg->dark_rate_per_s = d.dark_rate_per_s;
  cfg->seed = d.rng_seed;
}

void bf_measure_options_default(bf_measure_options* options) {
  if (options == nullptr) return;
  const MeasureOptions d;
  options->coarse_step_deg = d.coarse_step_deg;
  options->fine_step_deg = d.fine_step_deg;
  options->cells_per_piece = d.cells_per_piece;
}

bf_status bf_model_create(const bf_model_params* params, bf_model** out) {
  if (params == nullptr) return null_argument("params");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new bf_model{make_model(*params)}; });
}

void bf_model_destroy(bf_model* model) { delete model; }

bf_status bf_model_stage_times(const bf_model* model, double* t0, double* t1, double* tf) {
  if (model == nullptr) return null_argument("model");
  const auto& times = model->model.times();
  if (t0) *t0 = times.t0;
  if (t1) *t1 = times.t1;
  if (tf) *tf = times.tf;
  return BF_OK;
}

bf_status bf_kappa(const bf_model* model, double t, double* re, double* im) {
  if (model == nullptr) return null_argument("model");
  if (re == nullptr || im == nullptr) return null_argument("re/im");
  return guarded([&] {
    const auto k = kappa(model->model, t);
    *re = k.real();
    *im = k.imag();
  });
}

bf_status bf_gamma(const bf_model* model, double t, double* out) {
  if (model == nullptr) return null_argument("model");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = gamma(model->model, t); });
}

bf_status bf_epsilon(const bf_model* model, double t, double* out) {
  if (model == nullptr) return null_argument("model");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = epsilon(model->model, t); });
}

bf_status bf_trace_distance_pure(double theta_deg, double xi_deg, double* out) {
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    const auto pair = to_pair(theta_deg, xi_deg);
    *out = trace_distance(pure_state(pair.theta), pure_state(pair.xi));
  });
}

bf_status bf_delta_d(const bf_model* model, double theta_deg, double xi_deg, double* out) {
  if (model == nullptr) return null_argument("model");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    const auto pair = to_pair(theta_deg, xi_deg);
    *out = delta_D(model->model, pair.theta, pair.xi);
  });
}

bf_status bf_series_create(const bf_model* model, double theta_deg, double xi_deg,
                           size_t cells_per_piece, bf_series** out) {
  if (model == nullptr) return null_argument("model");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto pair = to_pair(theta_deg, xi_deg);
    *out = new bf_series{trace_distance_trajectory(model->model, pure_state(pair.theta),
                                                   pure_state(pair.xi), cells_per_piece)};
  });
}

void bf_series_destroy(bf_series* series) { delete series; }

size_t bf_series_length(const bf_series* series) {
  return series ? series->series.times.size() : 0;
}

bf_status bf_series_row_at(const bf_series* series, size_t index, bf_series_row* row) {
  if (series == nullptr) return null_argument("series");
  if (row == nullptr) return null_argument("row");
  const auto& s = series->series;
  if (index >= s.times.size()) {
    g_last_error = "series index out of range";
    return BF_ERR_INPUT;
  }
  *row = {s.times[index], s.distance[index], s.sigma[index], s.abs_kappa[index],
          s.gamma[index]};
  return BF_OK;
}

bf_status bf_measure_create(const bf_model* model, const bf_measure_options* options,
                            bf_measure_result** out) {
  if (model == nullptr) return null_argument("model");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    MeasureOptions opts;
    if (options != nullptr) {
      opts.coarse_step_deg = options->coarse_step_deg;
      opts.fine_step_deg = options->fine_step_deg;
      opts.cells_per_piece = options->cells_per_piece;
    }
    *out = new bf_measure_result{blp_measure(model->model, opts)};
  });
}

void bf_measure_destroy(bf_measure_result* result) { delete result; }

double bf_measure_value(const bf_measure_result* result) {
  return result ? result->result.value : 0.0;
}

bf_status bf_measure_best_pair(const bf_measure_result* result, double* theta_deg,
                               double* xi_deg) {
  if (result == nullptr) return null_argument("result");
  if (theta_deg == nullptr || xi_deg == nullptr) return null_argument("theta/xi");
  *theta_deg = result->result.best_pair.theta.degrees();
  *xi_deg = result->result.best_pair.xi.degrees();
  return BF_OK;
}

double bf_measure_resolution_deg(const bf_measure_result* result) {
  return result ? result->result.grid_resolution_deg : 0.0;
}

size_t bf_measure_interval_count(const bf_measure_result* result) {
  return result ? result->result.intervals.size() : 0;
}

bf_status bf_measure_interval_at(const bf_measure_result* result, size_t index,
                                 bf_interval* interval) {
  if (result == nullptr) return null_argument("result");
  if (interval == nullptr) return null_argument("interval");
  const auto& ivs = result->result.intervals;
  if (index >= ivs.size()) {
    g_last_error = "interval index out of range";
    return BF_ERR_INPUT;
  }
  *interval = {ivs[index].t_start, ivs[index].t_end, ivs[index].delta_D};
  return BF_OK;
}

bf_status bf_sweep_delay(const bf_model_params* base, const double* x0_mm, size_t n,
                         double theta_deg, double xi_deg, double* delta_d, double* d_tf) {
  if (base == nullptr) return null_argument("base");
  if (n > 0 && (x0_mm == nullptr || delta_d == nullptr || d_tf == nullptr)) {
    return null_argument("x0_mm/delta_d/d_tf");
  }
  return guarded([&] {
    const auto ref = make_model(*base);
    const auto points = sweep_delay(ref.spectrum(), ref.params(), {x0_mm, n},
                                    to_pair(theta_deg, xi_deg));
    for (size_t i = 0; i < n; ++i) {
      delta_d[i] = points[i].delta_D;
      d_tf[i] = points[i].D_tf;
    }
  });
}

bf_status bf_sweep_delay_noisy(const bf_model_params* base, const double* x0_mm, size_t n,
                               double theta_deg, double xi_deg, const bf_counting_config* cfg,
                               size_t trials, int dark_correct, double* delta_d_mean,
                               double* delta_d_std, double* d_tf_mean, double* d_tf_std) {
  if (base == nullptr || cfg == nullptr) return null_argument("base/cfg");
  if (n > 0 && (x0_mm == nullptr || delta_d_mean == nullptr || delta_d_std == nullptr ||
                d_tf_mean == nullptr || d_tf_std == nullptr)) {
    return null_argument("arrays");
  }
  return guarded([&] {
    const auto ref = make_model(*base);
    const auto points =
        sweep_delay_noisy(ref.spectrum(), ref.params(), {x0_mm, n},
                          to_pair(theta_deg, xi_deg), to_config(*cfg), trials, dark_correct != 0);
    for (size_t i = 0; i < n; ++i) {
      delta_d_mean[i] = points[i].delta_D_mean;
      delta_d_std[i] = points[i].delta_D_std;
      d_tf_mean[i] = points[i].D_tf_mean;
      d_tf_std[i] = points[i].D_tf_std;
    }
  });
}

bf_status bf_sweep_angles(const bf_model* model, const double* theta_deg, size_t n_theta,
                          const double* xi_deg, size_t n_xi, double* out,
                          double* best_theta_deg, double* best_xi_deg) {
  if (model == nullptr) return null_argument("model");
  if (theta_deg == nullptr || xi_deg == nullptr || out == nullptr) {
    return null_argument("theta_deg/xi_deg/out");
  }
  return guarded([&] {
    const auto s = sweep_angles(model->model, {theta_deg, n_theta}, {xi_deg, n_xi});
    std::copy(s.delta_D.begin(), s.delta_D.end(), out);
    if (best_theta_deg) *best_theta_deg = s.best_theta_deg;
    if (best_xi_deg) *best_xi_deg = s.best_xi_deg;
  });
}

bf_status bf_fit_delta_omega(const double* x0_mm, const double* d_tf, size_t n,
                             bf_fit_result* out) {
  if (out == nullptr) return null_argument("out");
  if (n > 0 && (x0_mm == nullptr || d_tf == nullptr)) return null_argument("x0_mm/d_tf");
  return guarded([&] {
    const auto r = fit_delta_omega({x0_mm, n}, {d_tf, n});
    *out = {r.inv_delta_omega_ps, r.std_error_ps, r.residual_norm, r.delta_n_l_mm,
            r.iterations, r.converged ? 1 : 0, r.physical ? 1 : 0};
  });
}

bf_status bf_delta_d_monte_carlo(const bf_model* model, double theta_deg, double xi_deg,
                                 const bf_counting_config* cfg, size_t trials,
                                 bf_mc_summary* raw, bf_mc_summary* corrected) {
  if (model == nullptr || cfg == nullptr) return null_argument("model/cfg");
  if (raw == nullptr || corrected == nullptr) return null_argument("raw/corrected");
  return guarded([&] {
    const auto r = delta_D_monte_carlo(model->model, to_pair(theta_deg, xi_deg),
                                       to_config(*cfg), trials);
    *raw = {r.raw.mean, r.raw.std, r.raw.n_trials, r.raw.seed};
    *corrected = {r.corrected.mean, r.corrected.std, r.corrected.n_trials, r.corrected.seed};
  });
}

}  // extern "C"
