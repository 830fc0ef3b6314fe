#pragma once

// Closed forms for the two-level well in the angle variable r = sin(phi).
// Everything here is written out entry by entry, independently of the
// numerical pipeline, so it can serve as ground truth for it.

#include <cmath>
#include <complex>
#include <utility>

#include "nipsqw/matrix_core.hpp"

namespace nipsqw::n2 {

inline constexpr double kEpGuard = 1e-12;

enum class Regime { almost_stationary, strongly_non_stationary, boundary };

struct N2Params {
  double phi = 0.0;
  double phi_dot = 0.0;

  /// D = phi_dot / (2 sin phi).
  double D() const {
    const double s = std::sin(phi);
    if (std::abs(s) < kEpGuard) throw EPProximity("sin(phi) vanishes");
    return phi_dot / (2.0 * s);
  }
};

namespace detail {
inline ComplexMatrix mat(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}
inline void guard(double phi) {
  if (std::abs(std::sin(phi)) < kEpGuard) throw EPProximity("sin(phi) vanishes");
}
}  // namespace detail

/// [[2 - i cos phi, -1], [-1, 2 + i cos phi]].
inline ComplexMatrix hamiltonian(double phi) {
  const double c = std::cos(phi);
  return detail::mat({2.0, -c}, -1.0, -1.0, {2.0, c});
}

inline ComplexMatrix omega_s(double phi) {
  const Complex e = std::polar(1.0, -phi);
  return detail::mat(1.0, -kI * e, kI * e, 1.0);
}

inline ComplexMatrix omega_s_dagger(double phi) {
  const Complex e = std::polar(1.0, phi);
  return detail::mat(1.0, -kI * e, kI * e, 1.0);
}

inline ComplexMatrix omega_s_inv(double phi) {
  detail::guard(phi);
  const Complex e = std::polar(1.0, -phi);
  const Complex pre = 1.0 / (1.0 - std::polar(1.0, -2.0 * phi));
  return pre * detail::mat(1.0, kI * e, -kI * e, 1.0);
}

inline ComplexMatrix omega_s_dot(double phi, double phi_dot) {
  const Complex e = std::polar(1.0, -phi);
  return phi_dot * detail::mat(0.0, -e, e, 0.0);
}

inline ComplexMatrix theta_s(double phi) {
  const double c = std::cos(phi);
  return detail::mat(2.0, Complex{0.0, -2.0 * c}, Complex{0.0, 2.0 * c}, 2.0);
}

/// (2 - 2|cos phi|, 2 + 2|cos phi|), ascending.
inline std::pair<double, double> theta_eigs(double phi) {
  const double c = std::abs(std::cos(phi));
  return {2.0 - 2.0 * c, 2.0 + 2.0 * c};
}

/// Coriolis force i Omega_S^{-1} dOmega_S/dt = D [[i e^{-i phi}, -1], [1, i e^{-i phi}]].
inline ComplexMatrix sigma_s(double phi, double phi_dot) {
  const double d = N2Params{phi, phi_dot}.D();
  const Complex ie = kI * std::polar(1.0, -phi);
  return d * detail::mat(ie, -1.0, 1.0, ie);
}

/// sigma_pm = (1 + i (cos phi +- 1) / sin phi) phi_dot / 2.
inline std::pair<Complex, Complex> sigma_eigs(double phi, double phi_dot) {
  detail::guard(phi);
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  return {Complex{1.0, (c + 1.0) / s} * (phi_dot / 2.0),
          Complex{1.0, (c - 1.0) / s} * (phi_dot / 2.0)};
}

/// G_S = H - Sigma_S with A = 1 - D, B = 1 + D.
inline ComplexMatrix g_s(double phi, double phi_dot) {
  const double d = N2Params{phi, phi_dot}.D();
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double a = 1.0 - d;
  const double b = 1.0 + d;
  return detail::mat(Complex{2.0 - d * s, -b * c}, -a, -b, Complex{2.0 - d * s, a * c});
}

/// w_pm = -i D cos phi +- sqrt(sin^2 phi - D^2), principal branch.
inline std::pair<Complex, Complex> w_pm(double phi, double phi_dot) {
  const double d = N2Params{phi, phi_dot}.D();
  const double s = std::sin(phi);
  const Complex root = std::sqrt(Complex{s * s - d * d, 0.0});
  const Complex shift{0.0, -d * std::cos(phi)};
  return {shift + root, shift - root};
}

/// g_pm = 2 - D sin phi + w_pm.
inline std::pair<Complex, Complex> g_eigs(double phi, double phi_dot) {
  const double d = N2Params{phi, phi_dot}.D();
  const double base = 2.0 - d * std::sin(phi);
  const auto [wp, wm] = w_pm(phi, phi_dot);
  return {base + wp, base + wm};
}

/// Sign of sin^2 phi - D^2. In the strongly non-stationary regime the
/// Coriolis correction w_pm is purely imaginary.
inline Regime regime(const N2Params& p, double boundary_tol = 1e-14) {
  const double s2 = std::pow(std::sin(p.phi), 2);
  const double d2 = std::pow(p.D(), 2);
  const double gap = s2 - d2;
  if (std::abs(gap) <= boundary_tol * std::max(s2, d2)) return Regime::boundary;
  if (gap > 0.0) return Regime::almost_stationary;
  const auto [wp, wm] = w_pm(p.phi, p.phi_dot);
  if (std::abs(wp.real()) > 1e-12 || std::abs(wm.real()) > 1e-12) {
    throw NumericalError("w_pm not purely imaginary in the strongly non-stationary regime");
  }
  return Regime::strongly_non_stationary;
}

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::almost_stationary:
      return "almost_stationary";
    case Regime::strongly_non_stationary:
      return "strongly_non_stationary";
    case Regime::boundary:
      return "boundary";
  }
  return "?";
}

}  // namespace nipsqw::n2
