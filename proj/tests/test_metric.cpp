#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nipsqw/nipsqw.hpp"

using namespace nipsqw;
constexpr double kPi = std::numbers::pi;

namespace {
ComplexMatrix diag12() {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  return d;
}
}  // namespace

TEST(Ketkets, TwoLevelColumns) {
  const double phi = kPi / 3;
  const KetketBasis b = ketkets(build_h_at_phi(2, phi));
  const Complex ie = kI * std::polar(1.0, phi);
  EXPECT_NEAR(std::abs(b.vectors(0, 0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b.vectors(1, 0) - ie), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b.vectors(0, 1) + ie), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b.vectors(1, 1) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b.eigenvalues(0) - (2.0 + std::sin(phi))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b.eigenvalues(1) - (2.0 - std::sin(phi))), 0.0, 1e-14);
}

TEST(Ketkets, HermitianCaseGivesOrthogonalBasis) {
  const KetketBasis b = ketkets(build_h_at_phi(2, kPi / 2));
  ComplexMatrix q = b.vectors;
  for (Eigen::Index k = 0; k < 2; ++k) q.col(k).normalize();
  EXPECT_TRUE(approx_equal(q.adjoint() * q, identity(2), 1e-14));
}

TEST(Ketkets, DefectiveAtExceptionalPoint) {
  EXPECT_THROW(ketkets(build_h(2, z_from_r(0.0))), DefectiveAtEP);
}

TEST(BuildMetric, ReproducesClosedForm) {
  const double phi = kPi / 3;
  const KetketBasis b = ketkets(build_h_at_phi(2, phi));
  EXPECT_TRUE(approx_equal(build_metric(b), n2::theta_s(phi), 1e-14));
  EXPECT_TRUE(approx_equal(build_metric(b, RealVector::Constant(2, 2.0)), 2.0 * n2::theta_s(phi), 1e-14));
}

TEST(BuildMetric, OrthonormalBasisGivesIdentity) {
  const ComplexMatrix h = build_h(4, {0.3});
  KetketBasis b = ketkets(h);
  for (Eigen::Index k = 0; k < 4; ++k) b.vectors.col(k).normalize();
  EXPECT_TRUE(approx_equal(build_metric(b), identity(4), 1e-13));
}

TEST(BuildMetric, RejectsBadWeights) {
  const KetketBasis b = ketkets(build_h_at_phi(2, 1.0));
  EXPECT_THROW(build_metric(b, RealVector::Constant(2, -1.0)), BadWeights);
  EXPECT_THROW(build_metric(b, RealVector::Ones(3)), BadWeights);
}

TEST(QuasiHermiticity, Residuals) {
  const double phi = kPi / 3;
  const ComplexMatrix h = build_h_at_phi(2, phi);
  EXPECT_LE(quasi_hermiticity_residual(h, n2::theta_s(phi)), 1e-12);
  EXPECT_EQ(quasi_hermiticity_residual(build_h(3, {0.5}), identity(3)), 0.0);
  EXPECT_GT(quasi_hermiticity_residual(h, identity(2)), 1e-2);
}

TEST(ObservableCheck, Values) {
  const ComplexMatrix h = build_h(5, z_from_r(0.7));
  const ComplexMatrix theta = build_metric(ketkets(h));
  EXPECT_LE(observable_check(h, theta), 1e-12);
  EXPECT_EQ(observable_check(identity(5), theta), 0.0);
  EXPECT_GT(observable_check(diag12(), n2::theta_s(kPi / 3)), 1e-3);
}

TEST(DysonFromKetkets, TwoLevelClosedForm) {
  const double phi = kPi / 3;
  const MetricBundle m = dyson_from_ketkets(ketkets(build_h_at_phi(2, phi)));
  EXPECT_TRUE(approx_equal(m.omega, n2::omega_s(phi), 1e-14));
  EXPECT_NEAR(std::abs(m.h_diag(0, 0) - (2.0 + std::sin(phi))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(m.h_diag(1, 1) - (2.0 - std::sin(phi))), 0.0, 1e-14);
  EXPECT_TRUE(approx_equal(m.omega.adjoint() * m.omega, m.theta, 1e-14));
  // Omega H Omega^{-1} is the diagonal h.
  const ComplexMatrix h = build_h_at_phi(2, phi);
  EXPECT_TRUE(approx_equal(m.omega * h * inverse(m.omega), m.h_diag, 1e-13));
}

TEST(DysonFromKetkets, HermitianLimit) {
  const MetricBundle m = dyson_from_ketkets(ketkets(build_h_at_phi(2, kPi / 2)));
  EXPECT_TRUE(approx_equal(m.theta, 2.0 * identity(2), 1e-14));
  EXPECT_TRUE(approx_equal(m.omega * m.omega.adjoint(), 2.0 * identity(2), 1e-14));
}

TEST(DysonFromKetkets, SingularNearExceptionalPoint) {
  // Built from the closed form: the numerical ketkets stop first with DefectiveAtEP.
  const double phi = 1e-14;
  KetketBasis b;
  b.eigenvalues = ComplexVector::Constant(2, 2.0);
  b.vectors = n2::omega_s_dagger(phi);
  b.pivots = {0, 1};
  EXPECT_THROW(dyson_from_ketkets(b), SingularDyson);
}

TEST(DysonHermitian, Values) {
  EXPECT_TRUE(approx_equal(dyson_hermitian(4.0 * identity(3)).omega, 2.0 * identity(3), 1e-15));
  const ComplexMatrix theta = n2::theta_s(kPi / 3);
  const ComplexMatrix om = dyson_hermitian(theta).omega;
  EXPECT_TRUE(approx_equal(om, om.adjoint(), 1e-15));
  EXPECT_TRUE(approx_equal(om * om, theta, 1e-10));
  EXPECT_THROW(dyson_hermitian(n2::theta_s(kPi - 1e-9)), NotPositiveDefinite);
}

TEST(MetricReproduction, GridAgainstClosedForm) {
  for (int k = 0; k < 100; ++k) {
    const double phi = 1e-3 + (kPi - 2e-3) * k / 99.0;
    if (std::abs(std::sin(phi)) < 1e-3) continue;
    const ComplexMatrix theta = build_metric(ketkets(build_h_at_phi(2, phi)));
    EXPECT_LE((theta - n2::theta_s(phi)).cwiseAbs().maxCoeff(), 1e-10) << phi;
  }
}

TEST(KetketsAligned, FollowsReference) {
  const KetketBasis ref = ketkets(build_h(4, z_from_r(0.5)));
  const KetketBasis next = ketkets_aligned(build_h(4, z_from_r(0.5 + 1e-6)), ref);
  EXPECT_LT((next.vectors - ref.vectors).norm(), 1e-4);
  EXPECT_EQ(next.pivots, ref.pivots);
}
