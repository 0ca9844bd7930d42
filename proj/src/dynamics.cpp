#include "backflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "backflow/error.hpp"

namespace backflow {

namespace {

// Piece boundaries in [0, t_end], including both ends.
std::vector<double> piece_boundaries(const ProcessModel& model, double t_end) {
  std::vector<double> nodes{0.0};
  for (double b : model.breakpoints()) {
    if (b < t_end) nodes.push_back(b);
  }
  nodes.push_back(t_end);
  // A breakpoint that lands within rounding distance of its neighbour
  // would produce a degenerate piece.
  const double min_width = 1e-12 * std::max(1.0, t_end);
  std::vector<double> kept{nodes.front()};
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] - kept.back() > min_width) {
      kept.push_back(nodes[i]);
    } else if (i + 1 == nodes.size()) {
      kept.back() = nodes[i];
    }
  }
  return kept;
}

Matrix2 normalized_trace(Matrix2 m, double& drift, std::size_t& renorms) {
  const double tr = m.trace().real();
  drift = std::abs(tr - 1.0);
  if (drift > kTraceTolerance) {
    m *= Complex(1.0 / tr, 0.0);
    ++renorms;
  }
  return m;
}

}  // namespace

DensityMatrix apply_coherence(Complex kappa_value, const DensityMatrix& rho0) {
  const auto& m = rho0.matrix();
  return DensityMatrix::from_matrix(
      Matrix2{m.hh, std::conj(kappa_value) * m.hv, kappa_value * m.vh, m.vv});
}

DensityMatrix apply_map(const ProcessModel& model, const DensityMatrix& rho0, double t) {
  return apply_coherence(kappa(model, t), rho0);
}

std::vector<double> stage_grid(const ProcessModel& model, double t_end,
                               std::size_t cells_per_piece) {
  if (cells_per_piece == 0) raise(ErrorCode::Input, "cells_per_piece must be > 0");
  if (!(t_end > 0.0 && t_end <= model.times().tf)) {
    std::ostringstream os;
    os << "grid end " << t_end << " ps outside (0, " << model.times().tf << "]";
    raise(ErrorCode::Domain, os.str());
  }
  const auto bounds = piece_boundaries(model, t_end);
  std::vector<double> grid;
  grid.reserve((bounds.size() - 1) * cells_per_piece + 1);
  grid.push_back(bounds.front());
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const double a = bounds[p];
    const double b = bounds[p + 1];
    const double h = (b - a) / static_cast<double>(cells_per_piece);
    for (std::size_t i = 1; i < cells_per_piece; ++i) grid.push_back(a + h * i);
    grid.push_back(b);
  }
  return grid;
}

Matrix2 master_equation_rhs(const Matrix2& rho, double gamma_rate, double epsilon_shift) {
  // sz = diag(1, -1)
  const Matrix2 sz_rho{rho.hh, rho.hv, -rho.vh, -rho.vv};
  const Matrix2 rho_sz{rho.hh, -rho.hv, rho.vh, -rho.vv};
  const Matrix2 sz_rho_sz{rho.hh, -rho.hv, -rho.vh, rho.vv};
  const Complex coherent(0.0, -0.5 * epsilon_shift);
  return coherent * (sz_rho - rho_sz) + Complex(0.5 * gamma_rate) * (sz_rho_sz - rho);
}

Trajectory integrate_master_equation(const ProcessModel& model, const DensityMatrix& rho0,
                                     double t_end, const IntegratorOptions& options) {
  if (!(t_end > 0.0 && t_end <= model.times().tf)) {
    std::ostringstream os;
    os << "t_end " << t_end << " ps outside (0, " << model.times().tf << "]";
    raise(ErrorCode::Domain, os.str());
  }
  if (!(options.max_step_ps > 0.0) || !(options.max_phase_per_step > 0.0)) {
    raise(ErrorCode::StepSize, "step bounds must be positive");
  }
  const std::size_t keep = std::max<std::size_t>(1, options.store_every);
  const auto bounds = piece_boundaries(model, t_end);

  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(rho0);
  const double population0 = rho0.hh().real();

  Matrix2 rho = rho0.matrix();
  for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
    const double a = bounds[p];
    const double b = bounds[p + 1];
    // Rates are constant on the open piece; evaluate them from inside.
    const double g = gamma_one_sided(model, a, Side::Right);
    const double e = epsilon_one_sided(model, a, Side::Right);
    const double fastest = std::max(std::abs(g), std::abs(e));
    double h = std::min(options.max_step_ps, b - a);
    if (fastest > 0.0) h = std::min(h, options.max_phase_per_step / fastest);
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / h));
    h = (b - a) / static_cast<double>(n);
    if (std::abs(g) * h > 0.1) {
      std::ostringstream os;
      os << "step " << h << " ps too large: |gamma| * step = " << std::abs(g) * h
         << " > 0.1";
      raise(ErrorCode::StepSize, os.str());
    }
    out.piece_steps.push_back(h);

    auto rhs = [&](double t, const Matrix2& y) {
      // The last stage evaluation of the piece sits on its right boundary.
      const Side side = t < b ? Side::Right : Side::Left;
      return master_equation_rhs(y, gamma_one_sided(model, t, side),
                                 epsilon_one_sided(model, t, side));
    };

    for (std::size_t i = 0; i < n; ++i) {
      const double t = a + h * static_cast<double>(i);
      const double t_next = (i + 1 == n) ? b : a + h * static_cast<double>(i + 1);
      const Matrix2 k1 = rhs(t, rho);
      const Matrix2 k2 = rhs(t + 0.5 * h, rho + Complex(0.5 * h) * k1);
      const Matrix2 k3 = rhs(t + 0.5 * h, rho + Complex(0.5 * h) * k2);
      const Matrix2 k4 = rhs(t_next, rho + Complex(h) * k3);
      rho += Complex(h / 6.0) * (k1 + Complex(2.0) * k2 + Complex(2.0) * k3 + k4);
      ++out.stats.steps;

      double drift = 0.0;
      rho = normalized_trace(rho, drift, out.stats.renormalizations);
      out.stats.max_trace_drift = std::max(out.stats.max_trace_drift, drift);
      out.stats.max_hermiticity_error =
          std::max(out.stats.max_hermiticity_error, hermiticity_error(rho));
      out.stats.max_population_drift = std::max(out.stats.max_population_drift,
                                                std::abs(rho.hh.real() - population0));

      if ((i + 1) % keep == 0 || i + 1 == n) {
        out.times.push_back(t_next);
        out.states.push_back(DensityMatrix::from_matrix(rho));
      }
    }
  }
  return out;
}

std::vector<double> centered_differences(const std::vector<double>& times,
                                         const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d.front() = (values[1] - values[0]) / (times[1] - times[0]);
  d.back() = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
  }
  return d;
}

DistanceSeries trace_distance_trajectory(const ProcessModel& model,
                                         const DensityMatrix& rho1_0,
                                         const DensityMatrix& rho2_0,
                                         std::size_t cells_per_piece) {
  DistanceSeries s;
  s.times = stage_grid(model, model.times().tf, cells_per_piece);
  const std::size_t n = s.times.size();
  s.distance.reserve(n);
  s.abs_kappa.reserve(n);
  s.gamma.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = s.times[i];
    const Complex k = kappa(model, t);
    s.distance.push_back(
        trace_distance(apply_coherence(k, rho1_0), apply_coherence(k, rho2_0)));
    s.abs_kappa.push_back(std::abs(k));
    s.gamma.push_back(gamma_one_sided(model, t, i + 1 < n ? Side::Right : Side::Left));
  }
  s.sigma = centered_differences(s.times, s.distance);
  return s;
}

}  // namespace backflow
