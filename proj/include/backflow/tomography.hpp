#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "backflow/qubit.hpp"

namespace backflow {

struct CountingConfig {
  double signal_rate_per_s = 7000.0;
  double integration_time_s = 4.0;
  double dark_rate_per_s = 150.0;
  std::uint64_t rng_seed = 0;

  /// Throws ErrorCode::InvariantViolation naming the offending field.
  void validate() const;
  double dark_counts() const { return dark_rate_per_s * integration_time_s; }
};

/// Minimal polarization tomography set: H, V, diagonal (+45 deg) and
/// right circular (|H> - i|V>)/sqrt(2).
enum class Projector { H = 0, V = 1, D = 2, R = 3 };
inline constexpr std::size_t kProjectorCount = 4;

/// <P|rho|P> for each projector.
std::array<double, kProjectorCount> projector_probabilities(const DensityMatrix& rho);

struct TomographyRecord {
  std::array<double, kProjectorCount> expected_counts{};
  std::array<std::uint64_t, kProjectorCount> counts{};
  std::array<double, kProjectorCount> count_std_errors{};
  DensityMatrix reconstructed = DensityMatrix::maximally_mixed();
  bool positivity_projected = false;
  bool dark_corrected = false;
};

struct Reconstruction {
  DensityMatrix state;
  bool positivity_projected;
};

/// Linear inversion from the four projector counts followed by projection
/// onto the nearest density matrix (eigenvalue clipping) when needed.
/// Throws ErrorCode::Reconstruction when the H + V counts are zero.
Reconstruction reconstruct_state(const std::array<double, kProjectorCount>& counts);

/// Per-trial seed for reproducible ensembles independent of run order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Poisson counts with mean signal * T * <P|rho|P> + dark * T per projector.
TomographyRecord simulate_tomography(const DensityMatrix& rho_true, const CountingConfig& cfg);
TomographyRecord simulate_tomography(const DensityMatrix& rho_true, const CountingConfig& cfg,
                                     std::mt19937_64& rng);

/// Subtracts the expected dark counts (clamped at zero) and reconstructs
/// again. A record with dark_rate = 0 is returned unchanged.
TomographyRecord correct_dark_counts(const TomographyRecord& record, const CountingConfig& cfg);

}  // namespace backflow
