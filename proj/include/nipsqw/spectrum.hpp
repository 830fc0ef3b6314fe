#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "nipsqw/hamiltonian.hpp"
#include "nipsqw/matrix_core.hpp"

namespace nipsqw {

struct SpectrumResult {
  ComplexVector energies;        // ascending (Re, Im)
  std::vector<bool> real_flag;   // |Im E| <= tol_real
  bool all_real = true;          // unbroken PT symmetry
  double vector_condition = 1.0;
  ComplexMatrix eigvecs;
};

inline SpectrumResult solve_spectrum(const ComplexMatrix& h, double tol_real,
                                     const Tolerances& tol = {}) {
  EigenDecomposition eig = eig_general(h, tol);
  SpectrumResult out;
  out.energies = std::move(eig.eigenvalues);
  out.eigvecs = std::move(eig.right_vectors);
  out.vector_condition = eig.vector_condition;
  out.real_flag.reserve(static_cast<std::size_t>(out.energies.size()));
  for (Eigen::Index k = 0; k < out.energies.size(); ++k) {
    const bool real = std::abs(out.energies(k).imag()) <= tol_real;
    out.real_flag.push_back(real);
    out.all_real = out.all_real && real;
  }
  return out;
}

inline SpectrumResult solve_spectrum(const ComplexMatrix& h, const Tolerances& tol = {}) {
  return solve_spectrum(h, tol.tol_real, tol);
}

/// Chebyshev polynomials T_0..T_{count-1} and U_0..U_{count-1} at y by the
/// three-term recurrence p_{k+1} = 2y p_k - p_{k-1}.
struct ChebyshevTable {
  std::vector<Complex> t;
  std::vector<Complex> u;

  ChebyshevTable(Eigen::Index count, Complex y) {
    const auto n = static_cast<std::size_t>(std::max<Eigen::Index>(count, 2));
    t.resize(n);
    u.resize(n);
    t[0] = 1.0;
    t[1] = y;
    u[0] = 1.0;
    u[1] = 2.0 * y;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      t[k + 1] = 2.0 * y * t[k] - t[k - 1];
      u[k + 1] = 2.0 * y * u[k] - u[k - 1];
    }
  }

  /// U_k with U_{-1} = 0 and U_{-2} = -1.
  Complex u_at(Eigen::Index k) const {
    if (k == -1) return 0.0;
    if (k == -2) return -1.0;
    return u[static_cast<std::size_t>(k)];
  }
};

namespace detail {

// Interior rows of (H - E) phi = 0 are the Chebyshev recurrence in y, with
// 2 - E = 2y. Its solution space is spanned by {U_{k-1}, U_{k-2}} for every y
// (T_{k-1} = U_{k-1} - y U_{k-2} coincides with U_{k-1} at y = 0, so the
// {T, U} pair is only a basis for y != 0). The boundary rows then give
//   first row: z a + b = 0
//   last row:  a c_a + b c_b = 0
struct BoundarySystem {
  Complex y;
  Complex c_a;
  Complex c_b;
  ChebyshevTable table;
};

inline BoundarySystem boundary_system(Eigen::Index n, Complex z, Complex energy) {
  const Complex y = 0.5 * (2.0 - energy);
  ChebyshevTable table(n, y);
  const Complex w = 2.0 * y - std::conj(z);
  const Complex c_a = table.u_at(n - 2) - w * table.u_at(n - 1);
  const Complex c_b = table.u_at(n - 3) - w * table.u_at(n - 2);
  return {y, c_a, c_b, std::move(table)};
}

}  // namespace detail

/// Determinant of the 2x2 boundary system for the Chebyshev ansatz; it equals
/// det(H(z) - E) and vanishes exactly on the spectrum of build_h(n, z).
inline Complex secular_value(Eigen::Index n, BoundaryValue bv, Complex energy) {
  if (n < 2) throw DomainError("secular_value: dimension must be at least 2");
  const auto sys = detail::boundary_system(n, bv.z, energy);
  return bv.z * sys.c_b - sys.c_a;
}

struct ChebyshevSolution {
  Complex y;
  // Coefficients of phi_k = A T_{k-1}(y) + B U_{k-1}(y). When tu_form is
  // false (y = 0 with z != 0, where T and U coincide on the lattice) they are
  // instead the coefficients of U_{k-1}(y) and U_{k-2}(y).
  Complex A;
  Complex B;
  bool tu_form = true;
  ComplexVector components;
  double residual = 0.0;  // ||(H - E) phi|| / ||phi||
};

inline ChebyshevSolution chebyshev_eigvec(Eigen::Index n, BoundaryValue bv, Complex energy,
                                          const Tolerances& tol = {}) {
  const Complex sec = secular_value(n, bv, energy);
  if (!(std::abs(sec) <= tol.secular)) {
    throw NotAnEigenvalue("|secular value| = " + std::to_string(std::abs(sec)));
  }
  const auto sys = detail::boundary_system(n, bv.z, energy);
  // The first boundary row fixes (a, b) = (1, -z) in the shifted-U basis.
  const Complex a = 1.0;
  const Complex b = -bv.z;

  ChebyshevSolution out;
  out.y = sys.y;
  constexpr double kTiny = 1e-14;
  if (std::abs(sys.y) > kTiny) {
    out.A = -b / sys.y;
    out.B = a - out.A;
  } else if (std::abs(bv.z) <= kTiny) {
    out.A = 0.0;
    out.B = 1.0;
  } else {
    out.tu_form = false;
    out.A = a;
    out.B = b;
  }
  const double scale = std::max(std::abs(out.A), std::abs(out.B));
  out.A /= scale;
  out.B /= scale;

  out.components.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.components(k) = out.tu_form ? out.A * sys.table.t[static_cast<std::size_t>(k)] +
                                          out.B * sys.table.u_at(k)
                                    : out.A * sys.table.u_at(k) + out.B * sys.table.u_at(k - 1);
  }
  const ComplexMatrix h = build_h(n, bv);
  out.residual = (h * out.components - energy * out.components).norm() / out.components.norm();
  return out;
}

struct SpectralCurvePoint {
  double energy = 0.0;
  double r_squared = 0.0;
  std::optional<double> r_plus;
  std::optional<double> r_minus;
  double residual = 0.0;
};

/// Inverts E(r) for z = i sqrt(1 - r^2). Since z + z* = 0 and z z* = 1 - r^2,
/// det(H(r) - E) = a(E) + (d(E) - a(E)) r^2 with a at r^2 = 0 and d at r^2 = 1.
/// The residual rebuilds H from r_plus; for r^2 > 1 no such real r exists and
/// the residual of the affine model is reported instead.
inline SpectralCurvePoint spectral_curve(Eigen::Index n, double energy,
                                         const Tolerances& tol = {}) {
  if (n < 2) throw DomainError("spectral_curve: dimension must be at least 2");
  const Complex a = secular_value(n, BoundaryValue{Complex{0.0, 1.0}}, energy);
  const Complex d = secular_value(n, BoundaryValue{Complex{0.0, 0.0}}, energy);
  if (std::abs(d - a) <= tol.no_slope) {
    throw NoSlope("det(H - E) does not depend on r^2 at E = " + std::to_string(energy));
  }
  SpectralCurvePoint out;
  out.energy = energy;
  out.r_squared = (-a / (d - a)).real();
  if (out.r_squared >= 0.0 && out.r_squared <= 1.0) {
    out.r_plus = std::sqrt(out.r_squared);
    out.r_minus = -*out.r_plus;
  }
  if (out.r_squared <= 1.0) {
    const ComplexMatrix h = build_h(n, BoundaryValue{Complex{0.0, std::sqrt(1.0 - out.r_squared)}});
    const ComplexMatrix shifted = h - energy * identity(n);
    out.residual = std::abs(shifted.partialPivLu().determinant());
  } else {
    out.residual = std::abs(a + (d - a) * out.r_squared);
  }
  return out;
}

struct EpScanRow {
  double r = 0.0;
  double min_gap = std::numeric_limits<double>::quiet_NaN();
  double vector_condition = std::numeric_limits<double>::infinity();
};

/// Smallest pairwise eigenvalue distance.
inline double min_gap(const ComplexVector& values) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    for (Eigen::Index j = i + 1; j < values.size(); ++j) {
      gap = std::min(gap, std::abs(values(i) - values(j)));
    }
  }
  return gap;
}

inline EpScanRow ep_scan_point(Eigen::Index n, double r, const Tolerances& tol = {}) {
  EpScanRow row;
  row.r = r;
  const ComplexMatrix h = build_h(n, z_from_r(r));
  try {
    const EigenDecomposition eig = eig_general(h, tol);
    row.min_gap = min_gap(eig.eigenvalues);
    row.vector_condition = eig.vector_condition;
  } catch (const NoConvergence&) {
    row.vector_condition = std::numeric_limits<double>::infinity();
  }
  return row;
}

/// Gap and eigenvector conditioning along an r grid; the condition number
/// blows up as r -> 0, the exceptional point.
inline std::vector<EpScanRow> ep_scan(Eigen::Index n, const std::vector<double>& r_grid,
                                      const Tolerances& tol = {}) {
  for (double r : r_grid) {
    if (!(std::abs(r) <= 1.0)) throw OutOfRange("ep_scan: r values must lie in [-1, 1]");
  }
  std::vector<EpScanRow> rows;
  rows.reserve(r_grid.size());
  for (double r : r_grid) rows.push_back(ep_scan_point(n, r, tol));
  return rows;
}

}  // namespace nipsqw
