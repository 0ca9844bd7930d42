#include "backflow/experiment.hpp"

#include <cmath>
#include <random>

#include "backflow/dynamics.hpp"
#include "backflow/error.hpp"
#include "parallel.hpp"

namespace backflow {

namespace {

ExperimentParams with_delay(ExperimentParams p, double x0) {
  p.x0_mm = x0;
  return p;
}

struct Running {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) /
                                       static_cast<double>(n - 1)));
  }
};

DensityMatrix measured(const DensityMatrix& rho, const CountingConfig& cfg,
                       std::mt19937_64& rng, bool dark_correct, bool& projected) {
  auto rec = simulate_tomography(rho, cfg, rng);
  if (dark_correct) rec = correct_dark_counts(rec, cfg);
  projected = projected || rec.positivity_projected;
  return rec.reconstructed;
}

}  // namespace

std::vector<DelayPoint> sweep_delay(const Spectrum& spectrum, const ExperimentParams& base,
                                    std::span<const double> x0_mm, const StatePair& pair) {
  std::vector<DelayPoint> out;
  out.reserve(x0_mm.size());
  const auto r1 = pure_state(pair.theta);
  const auto r2 = pure_state(pair.xi);
  for (double x0 : x0_mm) {
    const ProcessModel model(spectrum, with_delay(base, x0));
    const double tf = model.times().tf;
    const double d_tf = trace_distance(apply_map(model, r1, tf), apply_map(model, r2, tf));
    out.push_back({x0, delta_D(model, pair.theta, pair.xi), d_tf});
  }
  return out;
}

MeasuredDelayPoint measure_delay_point(const ProcessModel& model, const StatePair& pair,
                                       const CountingConfig& cfg, std::uint64_t index,
                                       bool dark_correct) {
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, index));
  const auto r1 = pure_state(pair.theta);
  const auto r2 = pure_state(pair.xi);
  const auto& times = model.times();
  bool projected = false;
  auto distance_at = [&](double t) {
    const auto a = measured(apply_map(model, r1, t), cfg, rng, dark_correct, projected);
    const auto b = measured(apply_map(model, r2, t), cfg, rng, dark_correct, projected);
    return trace_distance(a, b);
  };
  const double d0 = distance_at(times.t0);
  const double df = distance_at(times.tf);
  return {model.params().x0_mm, df - d0, df, projected};
}

std::vector<NoisyDelayPoint> sweep_delay_noisy(const Spectrum& spectrum,
                                               const ExperimentParams& base,
                                               std::span<const double> x0_mm,
                                               const StatePair& pair, const CountingConfig& cfg,
                                               std::size_t trials, bool dark_correct) {
  if (trials == 0) raise(ErrorCode::Input, "noisy sweep needs at least one trial");
  std::vector<NoisyDelayPoint> out(x0_mm.size());
  for (std::size_t j = 0; j < x0_mm.size(); ++j) {
    const ProcessModel model(spectrum, with_delay(base, x0_mm[j]));
    std::vector<MeasuredDelayPoint> points(trials);
    detail::parallel_for(trials, [&](std::size_t k) {
      points[k] = measure_delay_point(model, pair, cfg, j * trials + k, dark_correct);
    });
    Running dd, df;
    for (const auto& p : points) {
      dd.add(p.delta_D);
      df.add(p.D_tf);
    }
    out[j] = {x0_mm[j], dd.mean(), dd.stddev(), df.mean(), df.stddev()};
  }
  return out;
}

std::vector<double> angle_axis(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0)) raise(ErrorCode::Input, "angle step must be > 0");
  if (hi_deg < lo_deg) raise(ErrorCode::Input, "angle range is empty");
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(lo_deg + step_deg * static_cast<double>(i));
  return v;
}

AngleSurface sweep_angles(const ProcessModel& model, std::span<const double> theta_deg,
                          std::span<const double> xi_deg) {
  if (theta_deg.empty() || xi_deg.empty()) raise(ErrorCode::Input, "angle grid is empty");
  AngleSurface s;
  s.theta_deg.assign(theta_deg.begin(), theta_deg.end());
  s.xi_deg.assign(xi_deg.begin(), xi_deg.end());
  s.delta_D.reserve(theta_deg.size() * xi_deg.size());
  bool have_best = false;
  for (double theta : theta_deg) {
    for (double xi : xi_deg) {
      const double v = delta_D(model, PolarizationAngle::degrees(theta),
                               PolarizationAngle::degrees(xi));
      s.delta_D.push_back(v);
      bool take = !have_best || v > s.best_value;
      if (have_best && v == s.best_value) {
        const bool canonical = theta >= xi;
        const bool best_canonical = s.best_theta_deg >= s.best_xi_deg;
        if (canonical != best_canonical) {
          take = canonical;
        } else if (theta != s.best_theta_deg) {
          take = theta < s.best_theta_deg;
        } else {
          take = xi < s.best_xi_deg;
        }
      }
      if (take) {
        s.best_value = v;
        s.best_theta_deg = theta;
        s.best_xi_deg = xi;
        have_best = true;
      }
    }
  }
  return s;
}

NoiseChainResult delta_D_monte_carlo(const ProcessModel& model, const StatePair& pair,
                                     const CountingConfig& cfg, std::size_t trials) {
  cfg.validate();
  if (trials == 0) raise(ErrorCode::Input, "Monte Carlo needs at least one trial");
  const auto r1 = pure_state(pair.theta);
  const auto r2 = pure_state(pair.xi);
  const auto& times = model.times();
  const std::array<DensityMatrix, 4> truth{
      apply_map(model, r1, times.t0), apply_map(model, r2, times.t0),
      apply_map(model, r1, times.tf), apply_map(model, r2, times.tf)};

  struct Trial {
    double raw = 0.0;
    double corrected = 0.0;
    std::size_t projections = 0;
  };
  std::vector<Trial> results(trials);
  detail::parallel_for(trials, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, k));
    std::array<DensityMatrix, 4> raw_states{truth}, corrected_states{truth};
    Trial& tr = results[k];
    for (std::size_t s = 0; s < truth.size(); ++s) {
      const auto rec = simulate_tomography(truth[s], cfg, rng);
      const auto fixed = correct_dark_counts(rec, cfg);
      raw_states[s] = rec.reconstructed;
      corrected_states[s] = fixed.reconstructed;
      tr.projections += rec.positivity_projected + fixed.positivity_projected;
    }
    tr.raw = trace_distance(raw_states[2], raw_states[3]) -
             trace_distance(raw_states[0], raw_states[1]);
    tr.corrected = trace_distance(corrected_states[2], corrected_states[3]) -
                   trace_distance(corrected_states[0], corrected_states[1]);
  });

  NoiseChainResult out;
  out.noise_free = delta_D(model, pair.theta, pair.xi);
  Running raw, corrected;
  for (const auto& tr : results) {
    raw.add(tr.raw);
    corrected.add(tr.corrected);
    out.positivity_projections += tr.projections;
  }
  out.raw = {raw.mean(), raw.stddev(), trials, cfg.rng_seed};
  out.corrected = {corrected.mean(), corrected.stddev(), trials, cfg.rng_seed};
  return out;
}

std::vector<double> synthesize_final_distances(const Spectrum& spectrum,
                                               const ExperimentParams& base,
                                               std::span<const double> x0_mm,
                                               const StatePair& pair, const CountingConfig& cfg,
                                               bool dark_correct) {
  std::vector<double> out;
  out.reserve(x0_mm.size());
  const auto r1 = pure_state(pair.theta);
  const auto r2 = pure_state(pair.xi);
  for (std::size_t j = 0; j < x0_mm.size(); ++j) {
    const ProcessModel model(spectrum, with_delay(base, x0_mm[j]));
    const double tf = model.times().tf;
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, j));
    bool projected = false;
    const auto a = measured(apply_map(model, r1, tf), cfg, rng, dark_correct, projected);
    const auto b = measured(apply_map(model, r2, tf), cfg, rng, dark_correct, projected);
    out.push_back(trace_distance(a, b));
  }
  return out;
}

}  // namespace backflow
