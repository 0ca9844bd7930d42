#include "backflow/measure.hpp"

#include <cmath>
#include <sstream>

#include "backflow/error.hpp"

namespace backflow {

std::vector<IncreaseInterval> increase_intervals(std::span<const double> times,
                                                 std::span<const double> distance,
                                                 double hysteresis) {
  if (times.size() != distance.size()) {
    raise(ErrorCode::Input, "times and distance series differ in length");
  }
  if (distance.size() < 2) {
    raise(ErrorCode::Input, "increase detection needs at least two samples");
  }
  std::vector<IncreaseInterval> out;
  std::size_t i = 0;
  const std::size_t n = distance.size();
  while (i + 1 < n) {
    if (!(distance[i + 1] > distance[i] + hysteresis)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i + 1 < n && distance[i + 1] > distance[i] + hysteresis) ++i;
    out.push_back({times[start], times[i], distance[i] - distance[start]});
  }
  return out;
}

double total_increase(std::span<const IncreaseInterval> intervals) {
  double sum = 0.0;
  for (const auto& iv : intervals) sum += iv.delta_D;
  return sum;
}

namespace {

// Everything blp_measure needs per model: the grid and kappa on it.
struct CoherenceProfile {
  std::vector<double> times;
  std::vector<Complex> kappa;
};

CoherenceProfile make_profile(const ProcessModel& model, std::size_t cells_per_piece) {
  CoherenceProfile p;
  p.times = stage_grid(model, model.times().tf, cells_per_piece);
  p.kappa.reserve(p.times.size());
  for (double t : p.times) p.kappa.push_back(kappa(model, t));
  return p;
}

std::vector<IncreaseInterval> intervals_for(const CoherenceProfile& profile,
                                            const StatePair& pair, double hysteresis,
                                            std::vector<double>& scratch) {
  const Matrix2 r1 = pure_state(pair.theta).matrix();
  const Matrix2 r2 = pure_state(pair.xi).matrix();
  // The map is linear, so it acts on the difference directly.
  const Matrix2 diff = r1 - r2;
  scratch.resize(profile.times.size());
  for (std::size_t i = 0; i < profile.times.size(); ++i) {
    const Complex k = profile.kappa[i];
    scratch[i] = detail::trace_norm_half(
        Matrix2{diff.hh, std::conj(k) * diff.hv, k * diff.vh, diff.vv});
  }
  return increase_intervals(profile.times, scratch, hysteresis);
}

struct Candidate {
  double theta_deg;
  double xi_deg;
  double value;
  std::vector<IncreaseInterval> intervals;
};

// Strictly better value wins; equal values go to lower theta, then lower xi.
bool better(double value, double theta, double xi, const Candidate& best) {
  if (value != best.value) return value > best.value;
  if (theta != best.theta_deg) return theta < best.theta_deg;
  return xi < best.xi_deg;
}

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(lo + step * static_cast<double>(i));
  return v;
}

}  // namespace

std::vector<IncreaseInterval> pair_increase_intervals(const ProcessModel& model,
                                                      const StatePair& pair,
                                                      const MeasureOptions& options) {
  const auto profile = make_profile(model, options.cells_per_piece);
  std::vector<double> scratch;
  return intervals_for(profile, pair, options.hysteresis, scratch);
}

MeasureResult blp_measure(const ProcessModel& model, const MeasureOptions& options) {
  if (!(options.coarse_step_deg > 0.0) || options.coarse_step_deg >= 180.0) {
    raise(ErrorCode::Input, "coarse angle grid is empty");
  }
  if (!(options.fine_step_deg > 0.0)) raise(ErrorCode::Input, "fine_step_deg must be > 0");

  const auto profile = make_profile(model, options.cells_per_piece);
  std::vector<double> scratch;
  Candidate best{0.0, 0.0, -1.0, {}};
  std::size_t evaluated = 0;

  auto consider = [&](double theta, double xi) {
    if (theta < 0.0 || theta >= 180.0 || xi < 0.0 || xi >= 180.0 || xi > theta) return;
    const StatePair pair{PolarizationAngle::degrees(theta), PolarizationAngle::degrees(xi)};
    auto ivs = intervals_for(profile, pair, options.hysteresis, scratch);
    const double value = total_increase(ivs);
    ++evaluated;
    if (better(value, theta, xi, best)) best = {theta, xi, value, std::move(ivs)};
  };

  const double coarse = options.coarse_step_deg;
  const auto coarse_axis = axis(0.0, 180.0 - 1e-9, coarse);
  for (double theta : coarse_axis) {
    for (double xi : coarse_axis) consider(theta, xi);
  }

  double resolution = coarse;
  if (options.fine_step_deg < coarse) {
    const double c_theta = best.theta_deg;
    const double c_xi = best.xi_deg;
    const auto fine_theta = axis(c_theta - coarse, c_theta + coarse, options.fine_step_deg);
    const auto fine_xi = axis(c_xi - coarse, c_xi + coarse, options.fine_step_deg);
    for (double theta : fine_theta) {
      for (double xi : fine_xi) consider(theta, xi);
    }
    resolution = options.fine_step_deg;
  }

  MeasureResult r;
  r.value = best.value;
  r.best_pair = {PolarizationAngle::degrees(best.theta_deg),
                 PolarizationAngle::degrees(best.xi_deg)};
  r.intervals = std::move(best.intervals);
  r.grid_resolution_deg = resolution;
  r.pairs_evaluated = evaluated;
  return r;
}

double delta_D(const ProcessModel& model, PolarizationAngle theta, PolarizationAngle xi) {
  const auto r1 = pure_state(theta);
  const auto r2 = pure_state(xi);
  const auto& times = model.times();
  const double at_t0 = trace_distance(apply_map(model, r1, times.t0), apply_map(model, r2, times.t0));
  const double at_tf = trace_distance(apply_map(model, r1, times.tf), apply_map(model, r2, times.tf));
  return at_tf - at_t0;
}

}  // namespace backflow
