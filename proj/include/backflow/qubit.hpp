#pragma once

#include <array>
#include <complex>

namespace backflow {

using Complex = std::complex<double>;

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;

/// Polarization direction measured from horizontal, in degrees.
/// Stored normalized to [0, 360).
class PolarizationAngle {
 public:
  constexpr PolarizationAngle() = default;
  static PolarizationAngle degrees(double deg);

  double degrees() const noexcept { return deg_; }
  double radians() const noexcept;

  friend bool operator==(PolarizationAngle, PolarizationAngle) = default;

 private:
  explicit PolarizationAngle(double deg) : deg_(deg) {}
  double deg_ = 0.0;
};

/// Raw 2x2 complex matrix in the {H, V} basis. No invariants.
struct Matrix2 {
  Complex hh{}, hv{}, vh{}, vv{};

  Matrix2& operator+=(const Matrix2& o);
  Matrix2& operator-=(const Matrix2& o);
  Matrix2& operator*=(Complex s);
  friend Matrix2 operator+(Matrix2 a, const Matrix2& b) { return a += b; }
  friend Matrix2 operator-(Matrix2 a, const Matrix2& b) { return a -= b; }
  friend Matrix2 operator*(Matrix2 a, Complex s) { return a *= s; }
  friend Matrix2 operator*(Complex s, Matrix2 a) { return a *= s; }
  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b);

  Complex trace() const { return hh + vv; }
};

struct Eigenvalues2 {
  double lower;
  double upper;
};

/// Closed-form eigenvalues of a 2x2 Hermitian matrix. Only the Hermitian
/// part is used (diagonal real parts, hv for the coupling).
Eigenvalues2 hermitian_eigenvalues(const Matrix2& m);

/// Largest entrywise deviation from Hermiticity.
double hermiticity_error(const Matrix2& m);

/// Qubit state. Construction always checks Hermiticity, unit trace and
/// positivity; a DensityMatrix that exists is valid.
class DensityMatrix {
 public:
  /// Throws ErrorCode::InvariantViolation if m is not a density matrix.
  static DensityMatrix from_matrix(const Matrix2& m);
  static DensityMatrix maximally_mixed();

  const Matrix2& matrix() const noexcept { return m_; }
  Complex hh() const noexcept { return m_.hh; }
  Complex hv() const noexcept { return m_.hv; }
  Complex vh() const noexcept { return m_.vh; }
  Complex vv() const noexcept { return m_.vv; }

 private:
  explicit DensityMatrix(const Matrix2& m) : m_(m) {}
  Matrix2 m_;
};

/// |psi><psi| for |psi> = cos(phi)|H> + sin(phi)|V>.
DensityMatrix pure_state(PolarizationAngle phi);

/// Half the sum of absolute eigenvalues of rho1 - rho2.
double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// tr(rho^2)
double purity(const DensityMatrix& rho);

namespace detail {
// Trace distance without re-validating; for hot loops over states built
// from already validated ones.
double trace_norm_half(const Matrix2& difference);
}  // namespace detail

}  // namespace backflow
