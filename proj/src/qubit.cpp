#include "backflow/qubit.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "backflow/error.hpp"

namespace backflow {

PolarizationAngle PolarizationAngle::degrees(double deg) {
  if (!std::isfinite(deg)) raise(ErrorCode::Input, "polarization angle must be finite");
  double normalized = std::fmod(deg, 360.0);
  if (normalized < 0.0) normalized += 360.0;
  if (normalized >= 360.0) normalized = 0.0;
  return PolarizationAngle(normalized);
}

double PolarizationAngle::radians() const noexcept {
  return deg_ * std::numbers::pi / 180.0;
}

Matrix2& Matrix2::operator+=(const Matrix2& o) {
  hh += o.hh;
  hv += o.hv;
  vh += o.vh;
  vv += o.vv;
  return *this;
}

Matrix2& Matrix2::operator-=(const Matrix2& o) {
  hh -= o.hh;
  hv -= o.hv;
  vh -= o.vh;
  vv -= o.vv;
  return *this;
}

Matrix2& Matrix2::operator*=(Complex s) {
  hh *= s;
  hv *= s;
  vh *= s;
  vv *= s;
  return *this;
}

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {a.hh * b.hh + a.hv * b.vh, a.hh * b.hv + a.hv * b.vv,
          a.vh * b.hh + a.vv * b.vh, a.vh * b.hv + a.vv * b.vv};
}

Eigenvalues2 hermitian_eigenvalues(const Matrix2& m) {
  const double a = m.hh.real();
  const double d = m.vv.real();
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), std::abs(m.hv));
  return {mean - radius, mean + radius};
}

double hermiticity_error(const Matrix2& m) {
  return std::max({std::abs(m.hh.imag()), std::abs(m.vv.imag()),
                   std::abs(m.hv - std::conj(m.vh))});
}

DensityMatrix DensityMatrix::from_matrix(const Matrix2& m) {
  const double herm = hermiticity_error(m);
  if (!(herm <= kHermiticityTolerance)) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (deviation " << herm << ")";
    raise(ErrorCode::InvariantViolation, os.str());
  }
  const double trace_dev = std::abs(m.trace() - Complex(1.0, 0.0));
  if (!(trace_dev <= kTraceTolerance)) {
    std::ostringstream os;
    os << "density matrix trace deviates from 1 by " << trace_dev;
    raise(ErrorCode::InvariantViolation, os.str());
  }
  const auto ev = hermitian_eigenvalues(m);
  if (!(ev.lower >= -kPositivityTolerance)) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << ev.lower;
    raise(ErrorCode::InvariantViolation, os.str());
  }
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(Matrix2{0.5, 0.0, 0.0, 0.5});
}

DensityMatrix pure_state(PolarizationAngle phi) {
  const double c = std::cos(phi.radians());
  const double s = std::sin(phi.radians());
  // Real amplitudes, so the projector is exactly symmetric.
  return DensityMatrix::from_matrix(Matrix2{c * c, c * s, c * s, s * s});
}

namespace detail {

double trace_norm_half(const Matrix2& difference) {
  const auto ev = hermitian_eigenvalues(difference);
  return 0.5 * (std::abs(ev.lower) + std::abs(ev.upper));
}

}  // namespace detail

double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return detail::trace_norm_half(rho1.matrix() - rho2.matrix());
}

double purity(const DensityMatrix& rho) {
  const auto& m = rho.matrix();
  // tr(rho^2) = rho_hh^2 + rho_vv^2 + 2|rho_hv|^2 for Hermitian rho.
  return std::norm(m.hh) + std::norm(m.vv) + 2.0 * std::norm(m.hv);
}

}  // namespace backflow
