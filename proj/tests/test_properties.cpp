// Randomised invariants. Every generator is a seeded mt19937, so failures
// reproduce exactly.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nipsqw/nipsqw.hpp"
#include "oracles.hpp"

using namespace nipsqw;

namespace {

struct Gen {
  std::mt19937 rng;
  explicit Gen(unsigned seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  Complex complex(double radius) { return {uniform(-radius, radius), uniform(-radius, radius)}; }
  RealVector weights(Eigen::Index n) {
    RealVector k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = uniform(0.1, 5.0);
    return k;
  }
};

constexpr int kCases = 60;

}  // namespace

TEST(Properties, ParityTimeSymmetry) {
  Gen g(101);
  for (int c = 0; c < kCases; ++c) {
    const ComplexMatrix h = build_h(g.integer(2, 8), {g.complex(2.0)});
    EXPECT_LE(pt_residual(h), 1e-15 * norm2(h));
  }
}

TEST(Properties, SecularValueIsTheDeterminant) {
  Gen g(102);
  for (int c = 0; c < kCases; ++c) {
    const int n = g.integer(2, 8);
    const Complex z = g.complex(1.5), e = g.complex(3.0) + 2.0;
    const Complex ref = oracle::det_shifted(oracle::tridiagonal(n, z), e);
    EXPECT_LE(std::abs(secular_value(n, {z}, e) - ref), 1e-11 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Properties, UnbrokenSpectrumInsideTheUnitInterval) {
  Gen g(103);
  for (int c = 0; c < kCases; ++c) {
    const int n = g.integer(2, 8);
    const double r = g.uniform(0.05, 1.0);
    EXPECT_TRUE(solve_spectrum(build_h(n, z_from_r(r))).all_real) << n << ' ' << r;
  }
}

TEST(Properties, SexticIsAffineInRSquared) {
  Gen g(104);
  for (int c = 0; c < 20; ++c) {
    const double r = g.uniform(0.0, 1.0);
    const auto coeffs = char_poly(build_h(6, z_from_r(r)));
    const auto printed = oracle::sextic(r);
    for (int k = 0; k < 7; ++k) EXPECT_NEAR(std::abs(coeffs[k] - printed[k]), 0.0, 1e-9);
  }
}

TEST(Properties, QuasiHermiticityWithRandomWeights) {
  Gen g(105);
  for (int c = 0; c < kCases; ++c) {
    const int n = g.integer(2, 8);
    const ComplexMatrix h = build_h(n, z_from_r(g.uniform(0.1, 1.0)));
    const KetketBasis b = ketkets(h);
    const RealVector kappa = g.weights(n);
    const MetricBundle m = dyson_from_ketkets(b, kappa);
    EXPECT_LE(quasi_hermiticity_residual(h, m.theta), 1e-9);
    EXPECT_GT(m.positivity_eigs.minCoeff(), 0.0);
    EXPECT_TRUE(approx_equal(m.omega.adjoint() * m.omega, m.theta, 1e-10 * norm2(m.theta)));
    // Omega H Omega^{-1} is Hermitian (and here diagonal).
    const ComplexMatrix hh = m.omega * h * inverse(m.omega);
    EXPECT_LE(norm2(hh - hh.adjoint()), 1e-9 * norm2(hh));
    const ComplexMatrix root = dyson_hermitian(m.theta).omega;
    const ComplexMatrix hr = root * h * inverse(root);
    EXPECT_LE(norm2(hr - hr.adjoint()), 1e-9 * norm2(hr));
  }
}

TEST(Properties, ExpectationsAreReal) {
  Gen g(106);
  for (int c = 0; c < kCases; ++c) {
    const int n = g.integer(2, 6);
    const ComplexMatrix h = build_h(n, z_from_r(g.uniform(0.2, 1.0)));
    EvolutionState s;
    s.theta = build_metric(ketkets(h), g.weights(n));
    s.psi = ComplexVector(n);
    for (Eigen::Index k = 0; k < n; ++k) s.psi(k) = g.complex(1.0);
    for (const ComplexMatrix& lambda : {h, identity(n), ComplexMatrix(h * h)}) {
      ASSERT_LE(observable_check(lambda, s.theta), 1e-8);
      const Complex v = expectation_complex(s, lambda);
      EXPECT_LE(std::abs(v.imag()), 1e-10 * std::max(1.0, std::abs(v)));
    }
  }
}

TEST(Properties, GeneratorSpectraAreNonRealAwayFromSpecialAngles) {
  Gen g(107);
  int checked = 0;
  while (checked < kCases) {
    const double phi = g.uniform(0.15, 3.0);
    const double pd = g.uniform(-5.0, 5.0);
    const double d = pd / (2 * std::sin(phi));
    if (std::abs(std::cos(phi)) < 1e-2 || std::abs(pd) < 1e-2 || std::abs(std::abs(d) - 1) < 1e-2) continue;
    ++checked;
    const GeneratorSnapshot snap = generator(2, PhiProfile::linear(phi, pd), 0.0);
    for (Eigen::Index k = 0; k < 2; ++k) {
      EXPECT_GT(std::abs(snap.sigma_eigs(k).imag()), 1e-9);
      EXPECT_GT(std::abs(snap.g_eigs(k).imag()), 1e-9);
    }
    EXPECT_GT(std::abs(snap.g_eigs(0) - std::conj(snap.g_eigs(1))), 1e-8);
    // The instantaneous energies stay real.
    EXPECT_TRUE(solve_spectrum(snap.H).all_real);
  }
}

TEST(Properties, CoriolisMatchesClosedForm) {
  Gen g(108);
  for (int c = 0; c < kCases; ++c) {
    const double phi = g.uniform(0.15, 3.0);
    const double pd = g.uniform(-10.0, 10.0);
    const ComplexMatrix fd = coriolis(2, PhiProfile::linear(phi, pd), 0.0, 1e-5);
    EXPECT_LE((fd - n2::sigma_s(phi, pd)).cwiseAbs().maxCoeff(), 1e-8) << phi << ' ' << pd;
  }
}
