#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "backflow/measure.hpp"
#include "backflow/process.hpp"
#include "backflow/tomography.hpp"

namespace backflow {

struct DelayPoint {
  double x0_mm;
  double delta_D;  // D(tf) - D(t0)
  double D_tf;
};

/// Noise-free delta_D and D(tf) for each delay, holding the spectrum and
/// the fiber fixed.
std::vector<DelayPoint> sweep_delay(const Spectrum& spectrum, const ExperimentParams& base,
                                    std::span<const double> x0_mm, const StatePair& pair);

/// One simulated measurement: tomography of both states at t0 and at tf.
struct MeasuredDelayPoint {
  double x0_mm;
  double delta_D;
  double D_tf;
  bool positivity_projected;
};

/// Measurement of one delay with counting noise. Trial `index` draws its
/// own generator from (cfg.rng_seed, index).
MeasuredDelayPoint measure_delay_point(const ProcessModel& model, const StatePair& pair,
                                       const CountingConfig& cfg, std::uint64_t index,
                                       bool dark_correct);

struct NoisyDelayPoint {
  double x0_mm;
  double delta_D_mean;
  double delta_D_std;
  double D_tf_mean;
  double D_tf_std;
};

std::vector<NoisyDelayPoint> sweep_delay_noisy(const Spectrum& spectrum,
                                               const ExperimentParams& base,
                                               std::span<const double> x0_mm,
                                               const StatePair& pair, const CountingConfig& cfg,
                                               std::size_t trials, bool dark_correct);

struct AngleSurface {
  std::vector<double> theta_deg;
  std::vector<double> xi_deg;
  std::vector<double> delta_D;  // row-major, theta major
  double best_theta_deg = 0.0;
  double best_xi_deg = 0.0;
  double best_value = 0.0;

  double at(std::size_t i_theta, std::size_t i_xi) const {
    return delta_D[i_theta * xi_deg.size() + i_xi];
  }
};

/// delta_D over a theta x xi grid. Exact ties prefer theta >= xi, then the
/// lowest theta, then the lowest xi.
AngleSurface sweep_angles(const ProcessModel& model, std::span<const double> theta_deg,
                          std::span<const double> xi_deg);

/// Inclusive evenly spaced axis lo, lo+step, ... <= hi.
std::vector<double> angle_axis(double lo_deg, double hi_deg, double step_deg);

struct MonteCarloSummary {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
};

struct NoiseChainResult {
  MonteCarloSummary raw;
  MonteCarloSummary corrected;
  double noise_free = 0.0;
  std::size_t positivity_projections = 0;
};

/// Ensemble of simulated tomographic delta_D measurements, with and
/// without dark-count subtraction, on identical raw counts.
NoiseChainResult delta_D_monte_carlo(const ProcessModel& model, const StatePair& pair,
                                     const CountingConfig& cfg, std::size_t trials);

/// D(tf) per delay from simulated tomography; the noisy counterpart of the
/// D_tf column of sweep_delay.
std::vector<double> synthesize_final_distances(const Spectrum& spectrum,
                                               const ExperimentParams& base,
                                               std::span<const double> x0_mm,
                                               const StatePair& pair, const CountingConfig& cfg,
                                               bool dark_correct);

}  // namespace backflow
