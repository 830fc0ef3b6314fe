#pragma once

// Non-Hermitian interaction picture: kets evolve under G = H - Sigma with the
// Coriolis force Sigma = i Omega^{-1} dOmega/dt, and the physical norm
// <psi|Theta(t)|psi> is conserved. The textbook picture psi' = Omega psi
// evolves under the Hermitian h = Omega H Omega^{-1} and serves as a
// cross-check.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nipsqw/hamiltonian.hpp"
#include "nipsqw/metric.hpp"
#include "nipsqw/profile.hpp"

namespace nipsqw {

struct EvolutionOptions {
  DysonKind dyson = DysonKind::ketket_columns;
  RealVector kappa;  // constant positive weights; empty means all ones
  Tolerances tol;
};

/// Metric data at one instant.
struct DysonFrame {
  double t = 0.0;
  ComplexMatrix h;
  ComplexMatrix omega;
  ComplexMatrix omega_inv;
  ComplexMatrix theta;
};

struct GeneratorSnapshot {
  double t = 0.0;
  ComplexMatrix H;
  ComplexMatrix Sigma;
  ComplexMatrix G;
  ComplexVector sigma_eigs;
  ComplexVector g_eigs;
};

struct EvolutionState {
  double t = 0.0;
  ComplexVector psi;
  ComplexMatrix theta;
  ComplexMatrix omega;
  double phys_norm = 0.0;
};

struct Trajectory {
  std::vector<EvolutionState> states;
  bool aborted = false;
  std::string diagnostic;
};

struct TextbookState {
  double t = 0.0;
  ComplexVector psi;
  double norm = 0.0;
};

struct TextbookTrajectory {
  std::vector<TextbookState> states;
  bool aborted = false;
  std::string diagnostic;
};

namespace detail {

inline RealVector weights_or_ones(const EvolutionOptions& opt, Eigen::Index n) {
  return opt.kappa.size() == 0 ? RealVector::Ones(n) : opt.kappa;
}

inline void require_margin(const PhiProfile& profile, double t, double margin) {
  const double phi = profile.at(t).phi;
  const double s = std::abs(std::sin(phi));
  if (s < margin) {
    throw EPProximity("|sin phi| = " + std::to_string(s) + " at t = " + std::to_string(t) +
                      " is below the margin " + std::to_string(margin));
  }
}

inline ComplexMatrix omega_for(const KetketBasis& basis, const RealVector& kappa, DysonKind kind,
                               const Tolerances& tol) {
  if (kind == DysonKind::ketket_columns) return dyson_map(basis, kappa);
  return sqrt_hpd(build_metric(basis, kappa), tol);
}

inline ComplexMatrix inverse_dyson(const ComplexMatrix& omega, const Tolerances& tol) {
  try {
    return inverse(omega, tol);
  } catch (const SingularMatrix& e) {
    throw SingularDyson(e.what());
  }
}

struct CoriolisFrame {
  DysonFrame frame;
  ComplexMatrix sigma;
};

// H depends on t only through phi, so dOmega/dt = phi_dot dOmega/dphi; the
// central difference is taken in phi with step fd_step.
inline CoriolisFrame coriolis_frame(Eigen::Index n, const PhiProfile& profile, double t,
                                    double fd_step, const EvolutionOptions& opt) {
  if (!(fd_step > 0.0)) throw DomainError("fd_step must be positive");
  const Tolerances& tol = opt.tol;
  const PhiSample at = profile.at(t);
  for (double phi : {at.phi, at.phi - fd_step, at.phi + fd_step}) {
    const double s = std::abs(std::sin(phi));
    if (s < tol.ep_margin) {
      throw EPProximity("|sin phi| = " + std::to_string(s) + " near t = " + std::to_string(t) +
                        " is below the margin " + std::to_string(tol.ep_margin));
    }
  }
  const RealVector kappa = weights_or_ones(opt, n);

  CoriolisFrame out;
  out.frame.t = t;
  out.frame.h = build_h_at_phi(n, at.phi);
  const KetketBasis basis = ketkets(out.frame.h, tol);
  out.frame.omega = omega_for(basis, kappa, opt.dyson, tol);
  out.frame.omega_inv = inverse_dyson(out.frame.omega, tol);
  out.frame.theta = build_metric(basis, kappa);
  if (at.phi_dot == 0.0) {
    out.sigma = ComplexMatrix::Zero(n, n);
    return out;
  }
  const KetketBasis ahead = ketkets_aligned(build_h_at_phi(n, at.phi + fd_step), basis, tol);
  const KetketBasis behind = ketkets_aligned(build_h_at_phi(n, at.phi - fd_step), basis, tol);
  const ComplexMatrix omega_dot = (omega_for(ahead, kappa, opt.dyson, tol) -
                                   omega_for(behind, kappa, opt.dyson, tol)) *
                                  (at.phi_dot / (2.0 * fd_step));
  out.sigma = kI * out.frame.omega_inv * omega_dot;
  return out;
}

// Classical fourth-order Runge-Kutta for i dpsi/dt = A(t) psi, sampling every
// `stride` steps. `generator` returns A(t) and may throw NumericalError, which
// ends the integration with the partial result.
template <class Sample>
inline bool rk4(const std::function<ComplexMatrix(double)>& generator, ComplexVector psi,
                double t0, double t1, double dt, int stride, const Sample& sample,
                std::string& diagnostic) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (t1 < t0) throw DomainError("t1 must not precede t0");
  if (stride < 1) throw DomainError("stride must be at least 1");
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
  try {
    ComplexMatrix a_now = generator(t0);
    sample(t0, psi);
    for (long k = 0; k < steps; ++k) {
      const double t = t0 + static_cast<double>(k) * dt;
      const double h = (k + 1 == steps) ? t1 - t : dt;
      const ComplexMatrix a_mid = generator(t + 0.5 * h);
      const ComplexMatrix a_end = generator(t + h);
      const ComplexVector k1 = -kI * (a_now * psi);
      const ComplexVector k2 = -kI * (a_mid * (psi + 0.5 * h * k1));
      const ComplexVector k3 = -kI * (a_mid * (psi + 0.5 * h * k2));
      const ComplexVector k4 = -kI * (a_end * (psi + h * k3));
      psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      a_now = a_end;
      if ((k + 1) % stride == 0 || k + 1 == steps) sample(t + h, psi);
    }
  } catch (const NumericalError& e) {
    diagnostic = e.what();
    return false;
  }
  return true;
}

inline void require_initial(const ComplexVector& psi0, Eigen::Index n) {
  if (psi0.size() != n) throw DomainError("psi0 has the wrong dimension");
  if (psi0.norm() == 0.0) throw DomainError("psi0 must be nonzero");
}

}  // namespace detail

/// Metric, Dyson map and its inverse at time t (no derivative needed).
inline DysonFrame dyson_frame(Eigen::Index n, const PhiProfile& profile, double t,
                              const EvolutionOptions& opt = {}) {
  const RealVector kappa = detail::weights_or_ones(opt, n);
  DysonFrame out;
  out.t = t;
  out.h = build_h_at_time(n, profile, t);
  const KetketBasis basis = ketkets(out.h, opt.tol);
  out.omega = detail::omega_for(basis, kappa, opt.dyson, opt.tol);
  out.omega_inv = detail::inverse_dyson(out.omega, opt.tol);
  out.theta = build_metric(basis, kappa);
  return out;
}

/// Sigma(t) = i Omega^{-1} dOmega/dt, differencing the continuity-aligned
/// Dyson map centrally in phi with step fd_step.
inline ComplexMatrix coriolis(Eigen::Index n, const PhiProfile& profile, double t, double fd_step,
                              const EvolutionOptions& opt = {}) {
  return detail::coriolis_frame(n, profile, t, fd_step, opt).sigma;
}

inline GeneratorSnapshot generator(Eigen::Index n, const PhiProfile& profile, double t,
                                   const EvolutionOptions& opt = {}) {
  auto cf = detail::coriolis_frame(n, profile, t, opt.tol.fd_step, opt);
  GeneratorSnapshot out;
  out.t = t;
  out.H = std::move(cf.frame.h);
  out.Sigma = std::move(cf.sigma);
  out.G = out.H - out.Sigma;
  out.sigma_eigs = eig_general(out.Sigma, opt.tol).eigenvalues;
  out.g_eigs = eig_general(out.G, opt.tol).eigenvalues;
  return out;
}

/// <psi|Theta|psi>; throws NonRealNorm when the imaginary part is not
/// negligible, which signals a corrupted metric.
inline double physical_norm(const ComplexVector& psi, const ComplexMatrix& theta,
                            const Tolerances& tol = {}) {
  const Complex q = psi.dot(theta * psi);
  if (std::abs(q.imag()) > tol.nonreal_norm * std::abs(q.real())) {
    throw NonRealNorm("<psi|Theta|psi> = (" + std::to_string(q.real()) + ", " +
                      std::to_string(q.imag()) + ")");
  }
  if (!(q.real() > 0.0)) throw NotPositiveDefinite("<psi|Theta|psi> is not positive");
  return q.real();
}

inline double physical_norm(const EvolutionState& state, const Tolerances& tol = {}) {
  return physical_norm(state.psi, state.theta, tol);
}

/// <psi|Theta Lambda|psi> / <psi|Theta|psi> before the imaginary part is dropped.
inline Complex expectation_complex(const EvolutionState& state, const ComplexMatrix& lambda) {
  const ComplexVector theta_psi = state.theta * state.psi;
  return theta_psi.dot(lambda * state.psi) / theta_psi.dot(state.psi);
}

inline double expectation(const EvolutionState& state, const ComplexMatrix& lambda,
                          const Tolerances& tol = {}) {
  const double residual = observable_check(lambda, state.theta);
  if (!(residual <= tol.observable)) {
    throw NotAnObservable("quasi-Hermiticity residual " + std::to_string(residual));
  }
  return expectation_complex(state, lambda).real();
}

/// Integrates i dpsi/dt = G(t) psi with RK4. An EP approach (or any other
/// numerical obstruction) ends the run early with `aborted` set.
inline Trajectory evolve(Eigen::Index n, const PhiProfile& profile, const ComplexVector& psi0,
                         double t0, double t1, double dt, const EvolutionOptions& opt = {},
                         int stride = 1) {
  detail::require_initial(psi0, n);
  Trajectory out;
  // Frame data for sampled times, keyed by the last generator evaluation.
  DysonFrame last;
  auto gen = [&](double t) {
    // Evaluation times are at most dt/2 apart; nothing may slip between them.
    if (t > t0 && profile.min_abs_sin(std::max(t0, t - 0.5 * dt), t, 16) < opt.tol.ep_margin) {
      throw EPProximity("|sin phi| drops below the margin before t = " + std::to_string(t));
    }
    auto cf = detail::coriolis_frame(n, profile, t, opt.tol.fd_step, opt);
    last = std::move(cf.frame);
    return ComplexMatrix(last.h - cf.sigma);
  };
  auto sample = [&](double t, const ComplexVector& psi) {
    if (last.t != t) last = dyson_frame(n, profile, t, opt);
    EvolutionState s;
    s.t = t;
    s.psi = psi;
    s.theta = last.theta;
    s.omega = last.omega;
    s.phys_norm = physical_norm(psi, last.theta, opt.tol);
    out.states.push_back(std::move(s));
  };
  out.aborted = !detail::rk4(gen, psi0, t0, t1, dt, stride, sample, out.diagnostic);
  return out;
}

/// Integrates the textbook picture i dpsi'/dt = Omega H Omega^{-1} psi' from
/// psi'(t0) = Omega(t0) psi0.
inline TextbookTrajectory textbook_evolve(Eigen::Index n, const PhiProfile& profile,
                                          const ComplexVector& psi0, double t0, double t1,
                                          double dt, const EvolutionOptions& opt = {},
                                          int stride = 1) {
  detail::require_initial(psi0, n);
  TextbookTrajectory out;
  ComplexVector start;
  try {
    detail::require_margin(profile, t0, opt.tol.ep_margin);
    start = dyson_frame(n, profile, t0, opt).omega * psi0;
  } catch (const NumericalError& e) {
    out.aborted = true;
    out.diagnostic = e.what();
    return out;
  }
  auto gen = [&](double t) {
    detail::require_margin(profile, t, opt.tol.ep_margin);
    const DysonFrame f = dyson_frame(n, profile, t, opt);
    return ComplexMatrix(f.omega * f.h * f.omega_inv);
  };
  auto sample = [&](double t, const ComplexVector& psi) {
    out.states.push_back({t, psi, psi.norm()});
  };
  out.aborted = !detail::rk4(gen, start, t0, t1, dt, stride, sample, out.diagnostic);
  return out;
}

/// max_t |N(t) - N(t0)| / N(t0) for the physical norm.
inline double max_norm_drift(const Trajectory& traj) {
  if (traj.states.empty()) return 0.0;
  const double ref = traj.states.front().phys_norm;
  double worst = 0.0;
  for (const auto& s : traj.states) worst = std::max(worst, std::abs(s.phys_norm - ref) / ref);
  return worst;
}

}  // namespace nipsqw
