#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "backflow/dynamics.hpp"
#include "backflow/process.hpp"
#include "backflow/qubit.hpp"

namespace backflow {

/// A maximal run of grid cells on which the trace distance grows.
struct IncreaseInterval {
  double t_start;
  double t_end;
  double delta_D;  // D(t_end) - D(t_start)
};

inline constexpr double kDefaultHysteresis = 1e-12;

/// Cells with D[i+1] > D[i] + hysteresis are increasing; consecutive
/// increasing cells merge into one interval. Each gain telescopes to the
/// integral of sigma over the interval. Throws ErrorCode::Input for fewer
/// than two samples or mismatched lengths.
std::vector<IncreaseInterval> increase_intervals(std::span<const double> times,
                                                 std::span<const double> distance,
                                                 double hysteresis = kDefaultHysteresis);

double total_increase(std::span<const IncreaseInterval> intervals);

struct StatePair {
  PolarizationAngle theta;
  PolarizationAngle xi;
};

struct MeasureOptions {
  double coarse_step_deg = 5.0;
  double fine_step_deg = 0.5;
  std::size_t cells_per_piece = kDefaultCellsPerPiece;
  double hysteresis = kDefaultHysteresis;
};

struct MeasureResult {
  double value = 0.0;
  StatePair best_pair;
  std::vector<IncreaseInterval> intervals;
  double grid_resolution_deg = 0.0;
  std::size_t pairs_evaluated = 0;
};

/// Total trace-distance increase over [0, tf] for one pair of
/// |psi(phi)> = cos(phi)|H> + sin(phi)|V> initial states.
std::vector<IncreaseInterval> pair_increase_intervals(const ProcessModel& model,
                                                      const StatePair& pair,
                                                      const MeasureOptions& options = {});

/// N(Phi) maximized over pure pairs of the |psi(phi)> family.
///
/// Unordered pairs are searched in canonical order theta >= xi over a
/// coarse grid on [0, 180) x [0, 180), then refined around the best cell.
/// Ties go to the lowest theta, then the lowest xi.
MeasureResult blp_measure(const ProcessModel& model, const MeasureOptions& options = {});

/// D(tf) - D(t0) for the pair (pure_state(theta), pure_state(xi)).
double delta_D(const ProcessModel& model, PolarizationAngle theta, PolarizationAngle xi);

}  // namespace backflow
