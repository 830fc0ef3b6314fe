#pragma once

#include <cmath>
#include <string>

#include "nipsqw/matrix_core.hpp"
#include "nipsqw/profile.hpp"

namespace nipsqw {

/// The complex corner entry z carrying the boundary dynamics.
struct BoundaryValue {
  Complex z{0.0, 0.0};
};

/// Discrete Robin boundary data.
struct RobinParams {
  double alpha = 0.0;
  double beta = 0.0;
  double grid_h = 1.0;
};

/// z = 1 / (1 - beta h - i alpha h).
inline BoundaryValue robin_to_z(const RobinParams& p) {
  if (!(p.grid_h > 0.0)) throw DomainError("robin_to_z: grid_h must be positive");
  const Complex denom{1.0 - p.beta * p.grid_h, -p.alpha * p.grid_h};
  if (std::abs(denom) <= 1e-12) {
    throw DegenerateBoundary("1 - beta h - i alpha h vanishes");
  }
  return {1.0 / denom};
}

/// z = i sqrt(1 - r^2), principal non-negative root.
inline BoundaryValue z_from_r(double r) {
  if (!(std::abs(r) <= 1.0)) throw OutOfRange("|r| must not exceed 1");
  return {Complex{0.0, std::sqrt(1.0 - r * r)}};
}

/// z = i cos(phi). Agrees with z_from_r(sin phi) for cos(phi) >= 0 and
/// continues it analytically through phi = pi/2, where H is Hermitian.
inline BoundaryValue z_from_phi(double phi) { return {Complex{0.0, std::cos(phi)}}; }

/// Tridiagonal well: diagonal (2 - z, 2, ..., 2, 2 - z*), off-diagonals -1.
inline ComplexMatrix build_h(Eigen::Index n, BoundaryValue bv) {
  if (n < 2) throw DomainError("build_h: dimension must be at least 2");
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = 2.0;
    if (i + 1 < n) {
      h(i, i + 1) = -1.0;
      h(i + 1, i) = -1.0;
    }
  }
  h(0, 0) = 2.0 - bv.z;
  h(n - 1, n - 1) = 2.0 - std::conj(bv.z);
  return h;
}

inline ComplexMatrix build_h_at_phi(Eigen::Index n, double phi) {
  return build_h(n, z_from_phi(phi));
}

inline ComplexMatrix build_h_at_time(Eigen::Index n, const PhiProfile& profile, double t) {
  return build_h_at_phi(n, profile.at(t).phi);
}

/// Antidiagonal parity matrix.
inline ComplexMatrix parity(Eigen::Index n) {
  return identity(n).rowwise().reverse();
}

/// ||P conj(H) P - H||; zero exactly for PT-symmetric H.
inline double pt_residual(const ComplexMatrix& h) {
  require_square_finite(h, "pt_residual");
  const ComplexMatrix p = parity(h.rows());
  return norm2(p * h.conjugate() * p - h);
}

}  // namespace nipsqw
