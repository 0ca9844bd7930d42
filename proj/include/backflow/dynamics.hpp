#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "backflow/process.hpp"
#include "backflow/qubit.hpp"

namespace backflow {

/// Dynamical map: populations fixed, rho_HV -> conj(kappa) rho_HV,
/// rho_VH -> kappa rho_VH.
DensityMatrix apply_map(const ProcessModel& model, const DensityMatrix& rho0, double t);
/// Same map with a precomputed decoherence value.
DensityMatrix apply_coherence(Complex kappa_value, const DensityMatrix& rho0);

/// Sampling grid over [0, t_end]: each smooth piece between consecutive
/// breakpoints gets `cells_per_piece` equal cells, and breakpoints are
/// grid nodes. The result is strictly increasing and ends exactly at t_end.
std::vector<double> stage_grid(const ProcessModel& model, double t_end,
                               std::size_t cells_per_piece);

struct IntegratorOptions {
  /// Upper bound on the step in ps.
  double max_step_ps = std::numeric_limits<double>::infinity();
  /// Upper bound on max(|gamma|, |epsilon|) * step within each piece.
  double max_phase_per_step = 4e-3;
  /// Keep every k-th state (piece boundaries are always kept).
  std::size_t store_every = 10;
};

struct IntegrationStats {
  std::size_t steps = 0;
  double max_trace_drift = 0.0;       // before any renormalization
  double max_hermiticity_error = 0.0;
  double max_population_drift = 0.0;  // |rho_HH(t) - rho_HH(0)|
  std::size_t renormalizations = 0;
};

/// Integrated states on a piecewise-uniform grid (one step size per
/// stage piece).
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> piece_steps;  // step used inside each piece
  IntegrationStats stats;
};

/// Classic fixed-step RK4 for
///   d rho/dt = -i (eps/2)[sz, rho] + (gamma/2)(sz rho sz - rho).
/// Throws ErrorCode::StepSize if |gamma| * step exceeds 0.1 in any piece,
/// ErrorCode::Domain if t_end is outside (0, tf].
Trajectory integrate_master_equation(const ProcessModel& model, const DensityMatrix& rho0,
                                     double t_end, const IntegratorOptions& options = {});

/// Right-hand side of the master equation for given rates.
Matrix2 master_equation_rhs(const Matrix2& rho, double gamma_rate, double epsilon_shift);

struct DistanceSeries {
  std::vector<double> times;
  std::vector<double> distance;   // D(t)
  std::vector<double> sigma;      // dD/dt, centered differences (one-sided at ends)
  std::vector<double> abs_kappa;
  std::vector<double> gamma;      // one-sided rate of the following cell
};

inline constexpr std::size_t kDefaultCellsPerPiece = 2000;

/// D(t) for a pair of initial states via the closed-form map.
DistanceSeries trace_distance_trajectory(const ProcessModel& model,
                                         const DensityMatrix& rho1_0,
                                         const DensityMatrix& rho2_0,
                                         std::size_t cells_per_piece = kDefaultCellsPerPiece);

/// Centered differences on a possibly non-uniform grid.
std::vector<double> centered_differences(const std::vector<double>& times,
                                         const std::vector<double>& values);

}  // namespace backflow
