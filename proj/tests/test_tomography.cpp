#include <doctest.h>

#include <cmath>

#include "backflow/error.hpp"
#include "backflow/tomography.hpp"

using namespace backflow;

namespace {

double max_entry_gap(const DensityMatrix& a, const DensityMatrix& b) {
  const Matrix2 d = a.matrix() - b.matrix();
  return std::max({std::abs(d.hh), std::abs(d.hv), std::abs(d.vh), std::abs(d.vv)});
}

DensityMatrix mixed_coherent(double p, Complex hv) {
  return DensityMatrix::from_matrix(Matrix2{p, hv, std::conj(hv), 1.0 - p});
}

}  // namespace

TEST_CASE("projector probabilities") {
  const auto h = pure_state(PolarizationAngle::degrees(0));
  const auto p = projector_probabilities(h);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == doctest::Approx(0.5));

  const auto d = projector_probabilities(pure_state(PolarizationAngle::degrees(45)));
  CHECK(d[2] == doctest::Approx(1.0));
  CHECK(d[3] == doctest::Approx(0.5));

  // Right circular (|H> - i|V>)/sqrt2 has rho_HV = i/2.
  const auto r = projector_probabilities(mixed_coherent(0.5, Complex(0.0, 0.5)));
  CHECK(r[3] == doctest::Approx(1.0));
  CHECK(r[2] == doctest::Approx(0.5));
}

TEST_CASE("linear inversion recovers exact expectations") {
  const auto rho = mixed_coherent(0.3, Complex(0.1, -0.2));
  const auto probs = projector_probabilities(rho);
  std::array<double, kProjectorCount> counts{};
  for (std::size_t k = 0; k < kProjectorCount; ++k) counts[k] = 1e6 * probs[k];
  const auto r = reconstruct_state(counts);
  CHECK_FALSE(r.positivity_projected);
  CHECK(max_entry_gap(r.state, rho) < 1e-12);
}

TEST_CASE("unphysical counts are projected onto the Bloch sphere") {
  // D and R both at certainty is outside the sphere.
  const auto r = reconstruct_state({50.0, 50.0, 100.0, 100.0});
  CHECK(r.positivity_projected);
  CHECK(purity(r.state) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.state.hv().real() == doctest::Approx(r.state.hv().imag()));
  CHECK(r.state.hh().real() == doctest::Approx(0.5));
}

TEST_CASE("zero counts cannot be reconstructed") {
  try {
    reconstruct_state({0.0, 0.0, 5.0, 5.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Reconstruction);
  }
}

TEST_CASE("infinite-count limit matches the true state") {
  const auto rho = mixed_coherent(0.4, Complex(0.2, 0.15));
  CountingConfig cfg;
  cfg.signal_rate_per_s = 1e11;
  cfg.dark_rate_per_s = 0.0;
  cfg.rng_seed = 7;
  const auto rec = simulate_tomography(rho, cfg);
  CHECK(max_entry_gap(rec.reconstructed, rho) < 1e-3);
}

TEST_CASE("dark counts alone look maximally mixed") {
  CountingConfig cfg;
  cfg.signal_rate_per_s = 0.0;
  cfg.dark_rate_per_s = 1e9;
  cfg.rng_seed = 3;
  const auto rec = simulate_tomography(pure_state(PolarizationAngle::degrees(45)), cfg);
  CHECK(max_entry_gap(rec.reconstructed, DensityMatrix::maximally_mixed()) < 1e-3);
}

TEST_CASE("dark-count correction") {
  const auto rho = pure_state(PolarizationAngle::degrees(45));
  CountingConfig cfg;
  cfg.rng_seed = 11;

  SUBCASE("no dark rate leaves the record untouched") {
    cfg.dark_rate_per_s = 0.0;
    const auto rec = simulate_tomography(rho, cfg);
    const auto out = correct_dark_counts(rec, cfg);
    CHECK(out.counts == rec.counts);
    CHECK_FALSE(out.dark_corrected);
    CHECK(max_entry_gap(out.reconstructed, rec.reconstructed) == 0.0);
  }
  SUBCASE("subtraction restores coherence") {
    cfg.signal_rate_per_s = 1e9;
    cfg.dark_rate_per_s = 1e8;
    const auto rec = simulate_tomography(rho, cfg);
    const auto out = correct_dark_counts(rec, cfg);
    CHECK(out.dark_corrected);
    CHECK(std::abs(rec.reconstructed.hv()) < 0.45);
    CHECK(std::abs(out.reconstructed.hv()) == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("clamping everything to zero is a reconstruction error") {
    cfg.signal_rate_per_s = 0.0;
    cfg.dark_rate_per_s = 1e3;
    TomographyRecord rec;
    rec.counts = {10, 10, 10, 10};
    CHECK_THROWS_AS(correct_dark_counts(rec, cfg), Error);
  }
}

TEST_CASE("seeded simulation is reproducible") {
  const auto rho = mixed_coherent(0.6, Complex(0.1, 0.05));
  CountingConfig cfg;
  cfg.rng_seed = 2024;
  const auto a = simulate_tomography(rho, cfg);
  const auto b = simulate_tomography(rho, cfg);
  CHECK(a.counts == b.counts);
  CHECK(max_entry_gap(a.reconstructed, b.reconstructed) == 0.0);
  cfg.rng_seed = 2025;
  CHECK(simulate_tomography(rho, cfg).counts != a.counts);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("reconstructions are valid density matrices") {
  CountingConfig cfg;
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    const auto rho = pure_state(PolarizationAngle::degrees(i * 0.73));
    const auto rec = simulate_tomography(rho, cfg, rng);
    const auto& m = rec.reconstructed;
    CHECK(std::abs(m.hh() + m.vv() - 1.0) < 1e-12);
    CHECK(std::abs(m.hv() - std::conj(m.vh())) < 1e-12);
    CHECK(hermitian_eigenvalues(m.matrix()).lower >= -1e-10);
  }
}

TEST_CASE("counting configuration is validated") {
  CountingConfig cfg;
  cfg.integration_time_s = 0.0;
  try {
    cfg.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("integration_time_s") != std::string::npos);
  }
  cfg = CountingConfig{};
  cfg.dark_rate_per_s = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
