#include "backflow/tomography.hpp"

#include <algorithm>
#include <cmath>

#include "backflow/error.hpp"

namespace backflow {

void CountingConfig::validate() const {
  auto fail = [](const char* what) { raise(ErrorCode::InvariantViolation, what); };
  if (!(std::isfinite(signal_rate_per_s) && signal_rate_per_s >= 0.0))
    fail("signal_rate_per_s: must be >= 0");
  if (!(std::isfinite(integration_time_s) && integration_time_s > 0.0))
    fail("integration_time_s: must be > 0");
  if (!(std::isfinite(dark_rate_per_s) && dark_rate_per_s >= 0.0))
    fail("dark_rate_per_s: must be >= 0");
}

std::array<double, kProjectorCount> projector_probabilities(const DensityMatrix& rho) {
  const double hh = rho.hh().real();
  const double vv = rho.vv().real();
  const Complex hv = rho.hv();
  return {hh, vv, 0.5 + hv.real(), 0.5 + hv.imag()};
}

Reconstruction reconstruct_state(const std::array<double, kProjectorCount>& counts) {
  const double total = counts[0] + counts[1];
  if (!(total > 0.0)) {
    raise(ErrorCode::Reconstruction, "no counts in the H/V basis; cannot normalize");
  }
  const double p_h = counts[0] / total;
  const double p_d = counts[2] / total;
  const double p_r = counts[3] / total;
  const Complex hv(p_d - 0.5, p_r - 0.5);
  Matrix2 m{p_h, hv, std::conj(hv), 1.0 - p_h};

  const auto ev = hermitian_eigenvalues(m);
  bool projected = false;
  if (ev.lower < 0.0) {
    // Clipping the negative eigenvalue and renormalizing leaves the pure
    // state along the same Bloch direction: radius 1/2 in these units.
    const double scale = 0.5 / (0.5 * (ev.upper - ev.lower));
    m = Matrix2{0.5 + (m.hh.real() - 0.5) * scale, m.hv * scale, m.vh * scale,
                0.5 + (m.vv.real() - 0.5) * scale};
    projected = true;
  }
  return {DensityMatrix::from_matrix(m), projected};
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 over a combination of both inputs.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::array<double, kProjectorCount> as_doubles(
    const std::array<std::uint64_t, kProjectorCount>& counts) {
  std::array<double, kProjectorCount> out{};
  std::transform(counts.begin(), counts.end(), out.begin(),
                 [](std::uint64_t c) { return static_cast<double>(c); });
  return out;
}

}  // namespace

TomographyRecord simulate_tomography(const DensityMatrix& rho_true, const CountingConfig& cfg,
                                     std::mt19937_64& rng) {
  cfg.validate();
  TomographyRecord rec;
  const auto probs = projector_probabilities(rho_true);
  for (std::size_t k = 0; k < kProjectorCount; ++k) {
    const double p = std::clamp(probs[k], 0.0, 1.0);
    const double mean = cfg.signal_rate_per_s * cfg.integration_time_s * p + cfg.dark_counts();
    rec.expected_counts[k] = mean;
    std::uint64_t n = 0;
    if (mean > 0.0) {
      std::poisson_distribution<std::uint64_t> dist(mean);
      n = dist(rng);
    }
    rec.counts[k] = n;
    rec.count_std_errors[k] = std::sqrt(static_cast<double>(n));
  }
  const auto r = reconstruct_state(as_doubles(rec.counts));
  rec.reconstructed = r.state;
  rec.positivity_projected = r.positivity_projected;
  return rec;
}

TomographyRecord simulate_tomography(const DensityMatrix& rho_true, const CountingConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  return simulate_tomography(rho_true, cfg, rng);
}

TomographyRecord correct_dark_counts(const TomographyRecord& record, const CountingConfig& cfg) {
  cfg.validate();
  if (cfg.dark_rate_per_s == 0.0) return record;
  TomographyRecord out = record;
  const double dark = cfg.dark_counts();
  std::array<double, kProjectorCount> corrected{};
  for (std::size_t k = 0; k < kProjectorCount; ++k) {
    corrected[k] = std::max(0.0, static_cast<double>(record.counts[k]) - dark);
    out.expected_counts[k] = std::max(0.0, record.expected_counts[k] - dark);
  }
  const auto r = reconstruct_state(corrected);
  out.reconstructed = r.state;
  out.positivity_projected = r.positivity_projected;
  out.dark_corrected = true;
  return out;
}

}  // namespace backflow
