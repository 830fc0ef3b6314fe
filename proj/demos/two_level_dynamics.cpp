// Two-level well driven by phi(t) = 1 + 0.1 t: compares the closed-form
// Coriolis force with the finite-difference one and follows the physical norm.

#include <cstdio>

#include "nipsqw/nipsqw.hpp"

int main() {
  using namespace nipsqw;
  const PhiProfile profile = PhiProfile::linear(1.0, 0.1);

  std::printf("%6s %14s %14s %14s\n", "t", "|Sigma err|", "Re g+", "Im g+");
  for (double t = 0.0; t <= 5.0; t += 1.0) {
    const PhiSample p = profile.at(t);
    const double err = (coriolis(2, profile, t, 1e-5) - n2::sigma_s(p.phi, p.phi_dot)).norm();
    const auto [gp, gm] = n2::g_eigs(p.phi, p.phi_dot);
    std::printf("%6.2f %14.3e %14.10f %14.10f\n", t, err, gp.real(), gp.imag());
  }

  ComplexVector psi0 = ComplexVector::Zero(2);
  psi0(0) = 1.0;
  const Trajectory traj = evolve(2, profile, psi0, 0.0, 5.0, 1e-3);
  std::printf("physical norm drift over [0, 5]: %.3e\n", max_norm_drift(traj));
}
