#include <doctest.h>

#include <cmath>

#include "backflow/error.hpp"
#include "backflow/experiment.hpp"
#include "backflow/fit.hpp"

using namespace backflow;

namespace {

constexpr double kOmega0 = 1990.5437676306174;

const StatePair kBestPair{PolarizationAngle::degrees(135), PolarizationAngle::degrees(45)};

std::vector<double> design() { return angle_axis(0.0, 40.0, 40.0 / 14.0); }

}  // namespace

TEST_CASE("model curve") {
  CHECK(final_distance_curve(19.15, 35.8, 38.3) == doctest::Approx(1.0));
  CHECK(final_distance_curve(0.0, 35.8, 38.3) ==
        doctest::Approx(0.028195954390748016).epsilon(1e-12));
}

TEST_CASE("noise-free data is recovered exactly") {
  for (double inv_dw : {20.0, 35.8, 60.0}) {
    const auto x0 = design();
    std::vector<double> d;
    for (double x : x0) d.push_back(final_distance_curve(x, inv_dw, 38.3));
    const auto r = fit_delta_omega(x0, d);
    CHECK(r.converged);
    CHECK(r.physical);
    CHECK(r.inv_delta_omega_ps == doctest::Approx(inv_dw).epsilon(1e-9));
    CHECK(r.delta_n_l_mm == doctest::Approx(38.3).epsilon(1e-9));
    CHECK(r.residual_norm < 1e-9);
  }
}

TEST_CASE("sweep output round-trips through the fit") {
  const auto x0 = angle_axis(0.0, 40.0, 0.5);
  const auto rows = sweep_delay(Spectrum::lorentzian(kOmega0, 1.0 / 35.8), ExperimentParams{},
                                x0, kBestPair);
  std::vector<double> d;
  for (const auto& r : rows) d.push_back(r.D_tf);
  const auto fit = fit_delta_omega(x0, d);
  CHECK(fit.inv_delta_omega_ps == doctest::Approx(35.8).epsilon(1e-6));
}

TEST_CASE("invalid fit input") {
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(fit_delta_omega(two, two), Error);

  const std::vector<double> x0{1.0, 2.0, 3.0};
  const std::vector<double> bad{0.5, 1.5, 0.5};
  try {
    fit_delta_omega(x0, bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Input);
  }
  const std::vector<double> zero{0.5, 0.0, 0.5};
  CHECK_THROWS_AS(fit_delta_omega(x0, zero), Error);

  const std::vector<double> same{5.0, 5.0, 5.0};
  const std::vector<double> d{0.3, 0.4, 0.5};
  try {
    fit_delta_omega(same, d);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Fit);
  }
}

TEST_CASE("noisy fits stay inside the quoted uncertainty") {
  const auto spectrum = Spectrum::lorentzian(kOmega0, 1.0 / 35.8);
  const auto x0 = design();
  const int trials = 200;
  int within_quoted = 0, within_own = 0;
  for (int k = 0; k < trials; ++k) {
    CountingConfig cfg;
    cfg.rng_seed = derive_seed(4242, k);
    const auto d = synthesize_final_distances(spectrum, ExperimentParams{}, x0, kBestPair, cfg,
                                              true);
    const auto r = fit_delta_omega(x0, d);
    CHECK(r.converged);
    within_quoted += std::abs(r.inv_delta_omega_ps - 35.8) <= 1.9;
    within_own += std::abs(r.inv_delta_omega_ps - 35.8) <= r.std_error_ps;
  }
  CHECK(within_quoted >= 0.58 * trials);
  const double own = static_cast<double>(within_own) / trials;
  CHECK(own >= 0.50);
  CHECK(own <= 0.86);
}

TEST_CASE("spectrum fit in the wavelength domain") {
  const auto truth = Spectrum::from_wavelength(946.3, 34.0);
  std::vector<double> lambda;
  for (double l = 945.3; l <= 947.3 + 1e-9; l += 0.005) lambda.push_back(l);
  const auto intensity = sample_spectrum_wavelength(truth, lambda);
  const auto fit = fit_lorentzian_spectrum(lambda, intensity);
  CHECK(fit.converged);
  CHECK(fit.inv_delta_omega_ps == doctest::Approx(34.0).epsilon(1e-6));
  CHECK(fit.center_wavelength_nm == doctest::Approx(946.3).epsilon(1e-9));
}
