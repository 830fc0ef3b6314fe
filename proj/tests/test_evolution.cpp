#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nipsqw/nipsqw.hpp"

using namespace nipsqw;
constexpr double kPi = std::numbers::pi;

namespace {
ComplexVector e0(Eigen::Index n) { return ComplexVector::Unit(n, 0); }
double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST(Coriolis, StationaryProfileVanishes) {
  EXPECT_EQ(max_abs(coriolis(2, PhiProfile::constant(0.9), 3.0, 1e-5)), 0.0);
}

TEST(Coriolis, HalfPiUnitRate) {
  ComplexMatrix expected(2, 2);
  expected << 0.5, -0.5, 0.5, 0.5;
  EXPECT_LE(max_abs(coriolis(2, PhiProfile::linear(kPi / 2, 1.0), 0.0, 1e-5) - expected), 1e-8);
}

TEST(Coriolis, GuardNearExceptionalPoint) {
  // phi(t) = t - 1 + 1e-9 has sin(phi) = 1e-9 at t = 1.
  EXPECT_THROW(coriolis(2, PhiProfile::linear(-1.0 + 1e-9, 1.0), 1.0, 1e-5), EPProximity);
}

TEST(Coriolis, SecondOrderInTheStep) {
  const PhiProfile p = PhiProfile::linear(0.7, 2.0);
  const PhiSample s = p.at(0.0);
  const ComplexMatrix exact = n2::sigma_s(s.phi, s.phi_dot);
  const double e1 = max_abs(coriolis(2, p, 0.0, 1e-3) - exact);
  const double e2 = max_abs(coriolis(2, p, 0.0, 2e-3) - exact);
  EXPECT_NEAR(e2 / e1, 4.0, 0.5);
}

TEST(Coriolis, GenericDimensionMatchesDefinition) {
  // i Omega^{-1} dOmega/dt against an independent five-point stencil.
  const PhiProfile p = PhiProfile::linear(1.1, 0.3);
  const ComplexMatrix sigma = coriolis(5, p, 0.0, 1e-4);
  const KetketBasis ref = ketkets(build_h_at_phi(5, 1.1));
  auto om = [&](double phi) { return dyson_map(ketkets_aligned(build_h_at_phi(5, phi), ref), RealVector::Ones(5)); };
  const double h = 1e-3;
  const ComplexMatrix d = (om(1.1 - 2 * h) - 8.0 * om(1.1 - h) + 8.0 * om(1.1 + h) - om(1.1 + 2 * h)) / (12 * h) * 0.3;
  EXPECT_LE(max_abs(sigma - kI * inverse(om(1.1)) * d), 1e-7);
}

TEST(Generator, SlowDriveEigenvalues) {
  const GeneratorSnapshot g = generator(2, PhiProfile::linear(kPi / 3, 0.2), 0.0);
  const Complex gp{1.9 + 0.85829, -0.057735}, gm{1.9 - 0.85829, -0.057735};
  EXPECT_NEAR(std::abs(g.g_eigs(1) - gp), 0.0, 1e-5);
  EXPECT_NEAR(std::abs(g.g_eigs(0) - gm), 0.0, 1e-5);
}

TEST(Generator, StationaryLimit) {
  const double phi = 1.2;
  const GeneratorSnapshot g = generator(2, PhiProfile::constant(phi), 0.0);
  EXPECT_EQ(max_abs(g.G - g.H), 0.0);
  EXPECT_NEAR(std::abs(g.g_eigs(0) - (2.0 - std::sin(phi))), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(g.g_eigs(1) - (2.0 + std::sin(phi))), 0.0, 1e-13);
}

TEST(Generator, FastDriveCorrectionIsImaginary) {
  const double phi = kPi / 3, pd = 10.0;
  const GeneratorSnapshot g = generator(2, PhiProfile::linear(phi, pd), 0.0);
  const double base = 2.0 - n2::N2Params{phi, pd}.D() * std::sin(phi);
  for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(g.g_eigs(k).real(), base, 1e-7);
  EXPECT_GT(std::abs(g.g_eigs(0).imag() - g.g_eigs(1).imag()), 1.0);
}

TEST(Evolve, HermitianLimit) {
  const Trajectory tr = evolve(2, PhiProfile::constant(kPi / 2), e0(2), 0.0, 3.0, 1e-3);
  ASSERT_FALSE(tr.aborted);
  for (const auto& s : tr.states) EXPECT_NEAR(s.phys_norm, 2.0 * s.psi.squaredNorm(), 1e-12);
  // psi(t) = exp(-i H t) psi0 with H = [[2, -1], [-1, 2]].
  const auto& last = tr.states.back();
  const double t = last.t;
  ComplexVector exact(2);
  exact << std::exp(Complex(0, -2 * t)) * std::cos(t), std::exp(Complex(0, -2 * t)) * Complex(0, std::sin(t));
  EXPECT_LE((last.psi - exact).norm(), 1e-10);
}

TEST(Evolve, HiddenUnitarity) {
  const Trajectory tr = evolve(2, PhiProfile::linear(1.0, 0.1), e0(2), 0.0, 5.0, 1e-3);
  ASSERT_FALSE(tr.aborted);
  EXPECT_LE(max_norm_drift(tr), 1e-8);
}

TEST(Evolve, FourthOrderWhileTruncationDominates) {
  // Coarse steps, where the integrator error sits well above rounding.
  const PhiProfile p = PhiProfile::linear(1.0, 0.1);
  const double d1 = max_norm_drift(evolve(2, p, e0(2), 0.0, 5.0, 0.1));
  const double d2 = max_norm_drift(evolve(2, p, e0(2), 0.0, 5.0, 0.05));
  EXPECT_GE(d1 / d2, 12.0);
}

TEST(Evolve, LargerWellConservesItsNorm) {
  const Trajectory tr = evolve(4, PhiProfile::sinusoidal(1.0, 0.3, 1.5), e0(4), 0.0, 2.0, 2e-3);
  ASSERT_FALSE(tr.aborted);
  EXPECT_LE(max_norm_drift(tr), 1e-8);
}

TEST(Evolve, HermitianRootDysonMap) {
  EvolutionOptions opt;
  opt.dyson = DysonKind::hermitian_root;
  const Trajectory tr = evolve(3, PhiProfile::linear(1.0, 0.2), e0(3), 0.0, 2.0, 2e-3, opt);
  ASSERT_FALSE(tr.aborted);
  EXPECT_LE(max_norm_drift(tr), 1e-8);
}

TEST(Evolve, AbortsBeforeTheExceptionalPoint) {
  const Trajectory tr = evolve(2, PhiProfile::linear(0.3, -0.5), e0(2), 0.0, 1.0, 1e-3);
  EXPECT_TRUE(tr.aborted);
  EXPECT_FALSE(tr.states.empty());
  EXPECT_LT(tr.states.back().t, 0.6);
  EXPECT_NE(tr.diagnostic.find("EPProximity"), std::string::npos);
}

TEST(Evolve, RejectsBadArguments) {
  const PhiProfile p = PhiProfile::constant(1.0);
  EXPECT_THROW(evolve(2, p, e0(3), 0.0, 1.0, 1e-2), DomainError);
  EXPECT_THROW(evolve(2, p, e0(2), 0.0, 1.0, -1e-2), DomainError);
  EXPECT_THROW(evolve(2, p, e0(2), 1.0, 0.0, 1e-2), DomainError);
  EvolutionOptions opt;
  opt.kappa = RealVector::Constant(2, -1.0);
  EXPECT_THROW(evolve(2, p, e0(2), 0.0, 1.0, 1e-2, opt), BadWeights);
}

TEST(PhysicalNorm, Values) {
  EXPECT_DOUBLE_EQ(physical_norm(e0(2), 2.0 * identity(2)), 2.0);
  ComplexVector psi(2);
  psi << 1.0, 1.0;
  psi /= std::sqrt(2.0);
  EXPECT_NEAR(physical_norm(psi, n2::theta_s(kPi / 3)), 2.0, 1e-15);
  ComplexMatrix noisy = 2.0 * identity(2);
  noisy(0, 0) += Complex(0.0, 1e-6);
  EXPECT_THROW(physical_norm(e0(2), noisy), NonRealNorm);
}

TEST(Expectation, Values) {
  const double phi = kPi / 3;
  EvolutionState s;
  s.theta = n2::theta_s(phi);
  s.psi = ComplexVector::Zero(2);
  s.psi << 0.3, Complex(0.1, 0.4);
  EXPECT_NEAR(expectation(s, identity(2)), 1.0, 1e-15);

  const EigenDecomposition eig = eig_general(n2::hamiltonian(phi));
  s.psi = eig.right_vectors.col(1);
  EXPECT_NEAR(expectation(s, n2::hamiltonian(phi)), 2.0 + std::sin(phi), 1e-13);
  EXPECT_LE(std::abs(expectation_complex(s, n2::hamiltonian(phi)).imag()), 1e-10);

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  EXPECT_THROW(expectation(s, d), NotAnObservable);
}

TEST(TextbookEvolve, ConstantProfileRotatesPhases) {
  const double phi = 0.9;
  const PhiProfile p = PhiProfile::constant(phi);
  const ComplexVector psi0 = (ComplexVector(2) << 0.6, 0.8).finished();
  const TextbookTrajectory tb = textbook_evolve(2, p, psi0, 0.0, 2.0, 1e-3);
  ASSERT_FALSE(tb.aborted);
  const ComplexVector start = n2::omega_s(phi) * psi0;
  const double t = tb.states.back().t;
  const double ep = 2.0 + std::sin(phi), em = 2.0 - std::sin(phi);
  EXPECT_NEAR(std::abs(tb.states.back().psi(0) - std::exp(Complex(0, -ep * t)) * start(0)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(tb.states.back().psi(1) - std::exp(Complex(0, -em * t)) * start(1)), 0.0, 1e-10);
}

TEST(TextbookEvolve, CrossCheckAgainstInteractionPicture) {
  const PhiProfile p = PhiProfile::linear(1.0, 0.1);
  const Trajectory tr = evolve(2, p, e0(2), 0.0, 5.0, 1e-3, {}, 50);
  const TextbookTrajectory tb = textbook_evolve(2, p, e0(2), 0.0, 5.0, 1e-3, {}, 50);
  ASSERT_EQ(tr.states.size(), tb.states.size());
  double worst = 0.0, norm_drift = 0.0;
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    worst = std::max(worst, (tr.states[k].omega * tr.states[k].psi - tb.states[k].psi).norm());
    norm_drift = std::max(norm_drift, std::abs(tb.states[k].norm - tb.states[0].norm));
  }
  EXPECT_LE(worst, 1e-6);
  EXPECT_LE(norm_drift, 1e-8);
}
