#include <doctest.h>

#include <cmath>

#include "backflow/dynamics.hpp"
#include "backflow/error.hpp"

using namespace backflow;

namespace {

constexpr double kOmega0 = 1990.5437676306174;

ProcessModel model_with(double x0_mm, double omega0 = kOmega0, double inv_dw = 35.8) {
  ExperimentParams p;
  p.x0_mm = x0_mm;
  return ProcessModel(Spectrum::lorentzian(omega0, 1.0 / inv_dw), p);
}

DensityMatrix state(double deg) { return pure_state(PolarizationAngle::degrees(deg)); }

double max_entry_gap(const DensityMatrix& a, const DensityMatrix& b) {
  const Matrix2 d = a.matrix() - b.matrix();
  return std::max({std::abs(d.hh), std::abs(d.hv), std::abs(d.vh), std::abs(d.vv)});
}

}  // namespace

TEST_CASE("apply_map leaves pole states alone") {
  const auto m = model_with(19.15);
  const auto h = state(0.0);
  for (double t : {0.0, m.times().t0, 1e5, m.times().tf}) {
    CHECK(max_entry_gap(apply_map(m, h, t), h) == 0.0);
  }
}

TEST_CASE("apply_map on the diagonal state") {
  const auto m = model_with(19.15);
  const double t0 = m.times().t0;
  const Complex k = kappa(m, t0);
  const auto rho = apply_map(m, state(45.0), t0);
  CHECK(rho.hh().real() == doctest::Approx(0.5));
  CHECK(rho.vv().real() == doctest::Approx(0.5));
  CHECK(std::abs(rho.hv() - 0.5 * std::conj(k)) < 1e-15);
  CHECK(std::abs(rho.vh() - 0.5 * k) < 1e-15);
  CHECK(std::abs(rho.hv()) == doctest::Approx(0.5 * 0.028195954390748016).epsilon(1e-12));
}

TEST_CASE("full revival at the compensation point") {
  // dn * l = 2 x0 here, so the fiber undoes the whole delay.
  const auto m = model_with(19.15);
  const auto rho0 = state(30.0);
  CHECK(max_entry_gap(apply_map(m, rho0, m.times().tf), rho0) < 1e-9);
}

TEST_CASE("stage grid contains breakpoints and ends at tf") {
  const auto m = model_with(10.0);
  const auto grid = stage_grid(m, m.times().tf, 100);
  CHECK(grid.size() == 301);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == m.times().tf);
  CHECK(grid[100] == m.times().t0);
  CHECK(grid[200] == m.times().t1);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
  // Uniform within each piece.
  for (std::size_t i = 1; i < 100; ++i) {
    CHECK(grid[i + 1] - grid[i] == doctest::Approx(grid[1] - grid[0]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(stage_grid(m, m.times().tf * 2, 10), Error);
  CHECK_THROWS_AS(stage_grid(m, m.times().tf, 0), Error);
}

TEST_CASE("master equation rhs vanishes with zero rates and preserves populations") {
  const auto rho = state(30.0).matrix();
  const Matrix2 zero = master_equation_rhs(rho, 0.0, 0.0);
  CHECK(std::abs(zero.hh) + std::abs(zero.hv) + std::abs(zero.vh) + std::abs(zero.vv) == 0.0);
  const Matrix2 d = master_equation_rhs(rho, 0.3, 2.0);
  CHECK(std::abs(d.hh) == 0.0);
  CHECK(std::abs(d.vv) == 0.0);
  CHECK(std::abs(d.hv - Complex(-0.3, -2.0) * rho.hv) < 1e-15);
}

TEST_CASE("integrator matches the map over the delay stage at reference parameters") {
  const auto m = model_with(19.15);
  const double t0 = m.times().t0;
  IntegratorOptions opts;
  opts.store_every = 1000000;
  const auto traj = integrate_master_equation(m, state(45.0), t0, opts);
  const auto& last = traj.states.back();
  CHECK(traj.times.back() == t0);
  CHECK(std::abs(std::abs(last.hv()) - 0.5 * std::exp(-t0 / 35.8)) < 1e-6);
  CHECK(max_entry_gap(last, apply_map(m, state(45.0), t0)) < 1e-6);
}

TEST_CASE("integrated coherence grows through the negative-rate region") {
  // Slow carrier so the whole fiber stage integrates quickly.
  const auto m = model_with(10.0, 0.05);
  IntegratorOptions opts;
  opts.store_every = 2000;
  const auto traj = integrate_master_equation(m, state(45.0), m.times().tf, opts);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    worst = std::max(worst, max_entry_gap(traj.states[i], apply_map(m, state(45.0), traj.times[i])));
  }
  CHECK(worst < 1e-6);
  CHECK(traj.stats.max_trace_drift < 1e-9);
  CHECK(traj.stats.max_population_drift < 1e-9);
  CHECK(traj.stats.max_hermiticity_error < 1e-10);
  CHECK(traj.piece_steps.size() == 3);

  // Coherence rises between t0 and t1.
  double at_t0 = 0.0, at_t1 = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] == m.times().t0) at_t0 = std::abs(traj.states[i].hv());
    if (traj.times[i] == m.times().t1) at_t1 = std::abs(traj.states[i].hv());
  }
  CHECK(at_t1 > at_t0);
  CHECK(at_t1 == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("vanishing generator keeps the state fixed") {
  // Tiny width and zero carrier: rates are ~0, so rho(t) = rho(0).
  const auto m = model_with(5.0, 0.0, 1e12);
  const auto rho0 = state(60.0);
  IntegratorOptions opts;
  opts.max_step_ps = 5000.0;
  const auto traj = integrate_master_equation(m, rho0, m.times().tf, opts);
  for (const auto& s : traj.states) CHECK(max_entry_gap(s, rho0) < 1e-9);
}

TEST_CASE("oversized steps are rejected") {
  const auto m = model_with(19.15);
  IntegratorOptions opts;
  opts.max_phase_per_step = 1e9;
  opts.max_step_ps = 10.0;  // |gamma| * 10 ps = 0.28
  CHECK_THROWS_AS(integrate_master_equation(m, state(45.0), m.times().t0, opts), Error);
  try {
    integrate_master_equation(m, state(45.0), m.times().t0, opts);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepSize);
  }
  CHECK_THROWS_AS(integrate_master_equation(m, state(45.0), 0.0), Error);
}

TEST_CASE("trace distance trajectory examples") {
  const auto m = model_with(19.15);
  const auto anti = trace_distance_trajectory(m, state(135.0), state(45.0), 500);
  for (std::size_t i = 0; i < anti.times.size(); ++i) {
    CHECK(std::abs(anti.distance[i] - anti.abs_kappa[i]) < 1e-12);
    CHECK(std::isfinite(anti.gamma[i]));
  }
  CHECK(anti.distance.front() == doctest::Approx(1.0));
  CHECK(anti.distance.back() == doctest::Approx(1.0).epsilon(1e-9));

  const auto poles = trace_distance_trajectory(m, state(0.0), state(90.0), 200);
  for (double d : poles.distance) CHECK(d == doctest::Approx(1.0).epsilon(1e-15));

  const auto same = trace_distance_trajectory(m, state(20.0), state(20.0), 200);
  for (std::size_t i = 0; i < same.times.size(); ++i) {
    CHECK(same.distance[i] == 0.0);
    CHECK(same.sigma[i] == 0.0);
  }
}

TEST_CASE("trace distance contracts wherever the rate is positive") {
  const auto m = model_with(10.0);
  for (double theta : {10.0, 45.0, 100.0, 135.0}) {
    for (double xi : {0.0, 30.0, 45.0, 170.0}) {
      const auto s = trace_distance_trajectory(m, state(theta), state(xi), 400);
      for (std::size_t i = 0; i + 1 < s.times.size(); ++i) {
        if (s.gamma[i] > 0.0) CHECK(s.distance[i + 1] <= s.distance[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("centered differences are exact for linear data") {
  const std::vector<double> t{0.0, 1.0, 3.0, 4.0};
  const std::vector<double> y{1.0, 3.0, 7.0, 9.0};
  for (double d : centered_differences(t, y)) CHECK(d == doctest::Approx(2.0));
}
