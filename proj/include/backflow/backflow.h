/* C interface to the backflow library: staged qubit dephasing, trace
 * distance dynamics and the information-backflow measure.
 *
 * Handles are opaque and owned by the caller; every *_create has a matching
 * *_destroy. Functions return a bf_status; on failure bf_last_error()
 * describes the problem for the calling thread. Angles are in degrees,
 * times in ps, delays in mm, fiber lengths in m.
 */
#ifndef BACKFLOW_BACKFLOW_H
#define BACKFLOW_BACKFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(BACKFLOW_BUILDING_LIBRARY)
#define BF_API __attribute__((visibility("default")))
#else
#define BF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  BF_OK = 0,
  BF_ERR_NULL_ARGUMENT = 1,
  BF_ERR_INVARIANT = 2,
  BF_ERR_DOMAIN = 3,
  BF_ERR_BREAKPOINT = 4,
  BF_ERR_STEP_SIZE = 5,
  BF_ERR_INPUT = 6,
  BF_ERR_FIT = 7,
  BF_ERR_RECONSTRUCTION = 8,
  BF_ERR_INTERNAL = 9
} bf_status;

typedef struct bf_model bf_model;
typedef struct bf_series bf_series;
typedef struct bf_measure_result bf_measure_result;

typedef struct {
  double omega0_rad_per_ps;
  double inv_delta_omega_ps;
  double x0_mm;
  double fiber_length_m;
  double delta_n;
  double n_bar;
  int delay_only; /* nonzero: process ends after the delay stage */
} bf_model_params;

typedef struct {
  double t_ps;
  double D;
  double sigma;
  double abs_kappa;
  double gamma;
} bf_series_row;

typedef struct {
  double coarse_step_deg;
  double fine_step_deg;
  size_t cells_per_piece;
} bf_measure_options;

typedef struct {
  double t_start_ps;
  double t_end_ps;
  double delta_D;
} bf_interval;

typedef struct {
  double signal_rate_per_s;
  double integration_time_s;
  double dark_rate_per_s;
  uint64_t seed;
} bf_counting_config;

typedef struct {
  double mean;
  double std;
  size_t n_trials;
  uint64_t seed;
} bf_mc_summary;

typedef struct {
  double inv_delta_omega_ps;
  double std_error_ps;
  double residual_norm;
  double delta_n_l_mm;
  int iterations;
  int converged;
  int physical;
} bf_fit_result;

BF_API const char* bf_version(void);
BF_API const char* bf_last_error(void);
BF_API const char* bf_status_name(bf_status status);

/* Parameters of the reference experiment (1/dw = 35.8 ps, 946.3 nm,
 * x0 = 19.15 mm, l = 100 m, dn = 3.83e-4, n = 1.45). */
BF_API void bf_model_params_default(bf_model_params* params);
BF_API double bf_omega_from_wavelength_nm(double wavelength_nm);
BF_API void bf_counting_config_default(bf_counting_config* cfg);
BF_API void bf_measure_options_default(bf_measure_options* options);

BF_API bf_status bf_model_create(const bf_model_params* params, bf_model** out);
BF_API void bf_model_destroy(bf_model* model);
BF_API bf_status bf_model_stage_times(const bf_model* model, double* t0, double* t1,
                                      double* tf);

BF_API bf_status bf_kappa(const bf_model* model, double t, double* re, double* im);
BF_API bf_status bf_gamma(const bf_model* model, double t, double* out);
BF_API bf_status bf_epsilon(const bf_model* model, double t, double* out);
BF_API bf_status bf_trace_distance_pure(double theta_deg, double xi_deg, double* out);
BF_API bf_status bf_delta_d(const bf_model* model, double theta_deg, double xi_deg,
                            double* out);

/* D(t), sigma(t), |kappa(t)| and gamma(t) on the stage grid. */
BF_API bf_status bf_series_create(const bf_model* model, double theta_deg, double xi_deg,
                                  size_t cells_per_piece, bf_series** out);
BF_API void bf_series_destroy(bf_series* series);
BF_API size_t bf_series_length(const bf_series* series);
BF_API bf_status bf_series_row_at(const bf_series* series, size_t index, bf_series_row* row);

BF_API bf_status bf_measure_create(const bf_model* model, const bf_measure_options* options,
                                   bf_measure_result** out);
BF_API void bf_measure_destroy(bf_measure_result* result);
BF_API double bf_measure_value(const bf_measure_result* result);
BF_API bf_status bf_measure_best_pair(const bf_measure_result* result, double* theta_deg,
                                      double* xi_deg);
BF_API double bf_measure_resolution_deg(const bf_measure_result* result);
BF_API size_t bf_measure_interval_count(const bf_measure_result* result);
BF_API bf_status bf_measure_interval_at(const bf_measure_result* result, size_t index,
                                        bf_interval* interval);

/* Noise-free sweep over delays; outputs are caller-allocated arrays of n. */
BF_API bf_status bf_sweep_delay(const bf_model_params* base, const double* x0_mm, size_t n,
                                double theta_deg, double xi_deg, double* delta_d,
                                double* d_tf);
/* Same with simulated tomography; means and standard deviations over trials. */
BF_API bf_status bf_sweep_delay_noisy(const bf_model_params* base, const double* x0_mm,
                                      size_t n, double theta_deg, double xi_deg,
                                      const bf_counting_config* cfg, size_t trials,
                                      int dark_correct, double* delta_d_mean,
                                      double* delta_d_std, double* d_tf_mean,
                                      double* d_tf_std);

/* delta_D on a theta x xi grid, row-major (theta major) into out[n_theta*n_xi]. */
BF_API bf_status bf_sweep_angles(const bf_model* model, const double* theta_deg,
                                 size_t n_theta, const double* xi_deg, size_t n_xi,
                                 double* out, double* best_theta_deg, double* best_xi_deg);

BF_API bf_status bf_fit_delta_omega(const double* x0_mm, const double* d_tf, size_t n,
                                    bf_fit_result* out);

BF_API bf_status bf_delta_d_monte_carlo(const bf_model* model, double theta_deg,
                                        double xi_deg, const bf_counting_config* cfg,
                                        size_t trials, bf_mc_summary* raw,
                                        bf_mc_summary* corrected);

#ifdef __cplusplus
}
#endif

#endif /* BACKFLOW_BACKFLOW_H */
