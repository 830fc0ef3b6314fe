#pragma once

// Dense complex linear algebra for the small (N <= 64) matrices of the model.
// Eigen provides the factorizations; this layer adds the contracts the rest
// of the library relies on: sorted spectra, residual and conditioning
// reports, numerical multiplets at exceptional points, and typed failures.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nipsqw/errors.hpp"
#include "nipsqw/tolerances.hpp"

namespace nipsqw {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr int kMaxDimension = 64;
inline constexpr int kMaxCharPolyDimension = 16;

struct EigenDecomposition {
  ComplexVector eigenvalues;   // ascending by real part, then imaginary part
  ComplexMatrix right_vectors; // unit-norm columns
  double vector_condition = 1.0;
  double residual = 0.0;       // max_n ||M v_n - lambda_n v_n|| / ||M||
};

/// Spectral norm (largest singular value); zero for an empty matrix.
inline double norm2(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

/// 2-norm condition number; +inf for a numerically singular matrix.
inline double condition_number(const ComplexMatrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

inline bool is_finite(const ComplexMatrix& m) { return m.allFinite(); }

inline void require_square_finite(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DomainError(std::string(what) + ": matrix must be square and non-empty");
  }
  if (!is_finite(m)) {
    throw DomainError(std::string(what) + ": matrix has non-finite entries");
  }
}

/// Entrywise comparison with an absolute tolerance.
inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

/// Lexicographic (Re, Im) ordering used for every reported spectrum.
inline bool spectral_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

inline ComplexMatrix inverse(const ComplexMatrix& m, const Tolerances& tol = {}) {
  require_square_finite(m, "inverse");
  const Eigen::PartialPivLU<ComplexMatrix> lu(m);
  const double scale = norm2(m);
  const double det = std::abs(lu.determinant());
  const double bound = tol.eps_singular * std::pow(scale, static_cast<double>(m.rows()));
  if (!(det > bound)) {
    throw SingularMatrix("|det| = " + std::to_string(det) + " is below " +
                         std::to_string(bound));
  }
  return lu.inverse();
}

namespace detail {

inline void sort_decomposition(ComplexVector& values, ComplexMatrix& vectors) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return spectral_less(values(a), values(b));
  });
  ComplexVector v(n);
  ComplexMatrix w(vectors.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    v(k) = values(order[static_cast<std::size_t>(k)]);
    w.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  values = std::move(v);
  vectors = std::move(w);
}

inline double decomposition_residual(const ComplexMatrix& m, const ComplexVector& values,
                                     const ComplexMatrix& vectors, double scale) {
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const ComplexVector v = vectors.col(k);
    worst = std::max(worst, (m * v - values(k) * v).norm() / scale);
  }
  return worst;
}

// Computed eigenvalues of a defective matrix split by O(sqrt(eps)). A cluster
// is collapsed to its mean when M - mean*I is singular at the level of a
// backward error n*eps*||M||, i.e. when the members cannot be told apart in
// double precision. Eigenvectors of a collapsed cluster span the numerical
// null space; a deficient null space is reported through repeated columns
// (vector_condition = inf).
inline void merge_numerical_multiplets(const ComplexMatrix& m, double scale,
                                       const Tolerances& tol, ComplexVector& values,
                                       ComplexMatrix& vectors) {
  const Eigen::Index n = values.size();
  if (n < 2 || scale == 0.0) return;
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto root = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  const double radius = tol.cluster_radius * scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(values(i) - values(j)) <= radius) {
        parent[static_cast<std::size_t>(root(j))] = root(i);
      }
    }
  }
  const double singular_level = static_cast<double>(n) * DBL_EPSILON * scale;
  const double rank_level = std::sqrt(DBL_EPSILON) * scale;
  for (Eigen::Index r = 0; r < n; ++r) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (root(i) == r) members.push_back(i);
    }
    if (members.size() < 2) continue;
    Complex mean{0.0, 0.0};
    for (auto i : members) mean += values(i);
    mean /= static_cast<double>(members.size());

    const ComplexMatrix shifted = m - mean * identity(n);
    Eigen::JacobiSVD<ComplexMatrix> svd(shifted, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s(n - 1) > singular_level) continue;

    Eigen::Index nullity = 0;
    for (Eigen::Index k = n - 1; k >= 0 && s(k) <= rank_level; --k) ++nullity;
    nullity = std::min<Eigen::Index>(nullity, static_cast<Eigen::Index>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Eigen::Index use = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), nullity - 1);
      values(members[k]) = mean;
      vectors.col(members[k]) = svd.matrixV().col(n - 1 - use);
    }
  }
}

}  // namespace detail

/// General eigendecomposition. Throws NoConvergence when the Schur iteration
/// exhausts its 100*N^2 budget or the residual contract fails.
inline EigenDecomposition eig_general(const ComplexMatrix& m, const Tolerances& tol = {}) {
  require_square_finite(m, "eig_general");
  const Eigen::Index n = m.rows();
  if (n > kMaxDimension) throw DomainError("eig_general: dimension exceeds 64");

  Eigen::ComplexEigenSolver<ComplexMatrix> solver;
  solver.setMaxIterations(100 * n * n);
  solver.compute(m, true);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("Schur iteration did not converge");
  }
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.right_vectors = solver.eigenvectors();
  const double scale = norm2(m);
  detail::merge_numerical_multiplets(m, scale, tol, out.eigenvalues, out.right_vectors);
  detail::sort_decomposition(out.eigenvalues, out.right_vectors);
  out.right_vectors.colwise().normalize();
  out.residual = detail::decomposition_residual(m, out.eigenvalues, out.right_vectors, scale);
  out.vector_condition = condition_number(out.right_vectors);
  if (!(out.residual <= tol.eig_residual)) {
    throw NoConvergence("eigen residual " + std::to_string(out.residual));
  }
  return out;
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues real and ascending.
inline EigenDecomposition eig_hermitian(const ComplexMatrix& m, const Tolerances& tol = {}) {
  require_square_finite(m, "eig_hermitian");
  const double scale = norm2(m);
  const double skew = norm2(m - m.adjoint());
  if (skew > tol.hermitian * scale) {
    throw NotHermitian("||M - M^dagger|| = " + std::to_string(skew));
  }
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("Hermitian eigensolver did not converge");
  }
  EigenDecomposition out;
  out.eigenvalues = solver.eigenvalues().cast<Complex>();
  out.right_vectors = solver.eigenvectors();
  out.residual = detail::decomposition_residual(m, out.eigenvalues, out.right_vectors, scale);
  out.vector_condition = 1.0;
  return out;
}

/// Hermitian positive-definite square root through the spectral decomposition.
inline ComplexMatrix sqrt_hpd(const ComplexMatrix& m, const Tolerances& tol = {}) {
  const EigenDecomposition eig = eig_hermitian(m, tol);
  const double scale = norm2(m);
  const double smallest = eig.eigenvalues(0).real();
  if (!(smallest > tol.eps_pd * scale)) {
    throw NotPositiveDefinite("smallest eigenvalue " + std::to_string(smallest));
  }
  const RealVector roots = eig.eigenvalues.real().cwiseSqrt();
  const ComplexMatrix s =
      eig.right_vectors * roots.cast<Complex>().asDiagonal() * eig.right_vectors.adjoint();
  return 0.5 * (s + s.adjoint());
}

/// Characteristic polynomial det(lambda I - M): monic, descending powers.
/// Uses La Budde's recurrence on the upper Hessenberg form (M itself when it
/// already is Hessenberg, e.g. tridiagonal Hamiltonians).
inline std::vector<Complex> char_poly(const ComplexMatrix& m) {
  require_square_finite(m, "char_poly");
  const Eigen::Index n = m.rows();
  if (n > kMaxCharPolyDimension) throw DomainError("char_poly: dimension exceeds 16");

  bool hessenberg = true;
  for (Eigen::Index j = 0; j < n && hessenberg; ++j) {
    for (Eigen::Index i = j + 2; i < n; ++i) {
      if (m(i, j) != Complex{0.0, 0.0}) {
        hessenberg = false;
        break;
      }
    }
  }
  const ComplexMatrix h =
      hessenberg ? m : ComplexMatrix(Eigen::HessenbergDecomposition<ComplexMatrix>(m).matrixH());

  // p[i] holds ascending coefficients of the leading i x i principal minor polynomial.
  std::vector<std::vector<Complex>> p(static_cast<std::size_t>(n + 1));
  p[0] = {Complex{1.0, 0.0}};
  for (Eigen::Index i = 1; i <= n; ++i) {
    const auto& prev = p[static_cast<std::size_t>(i - 1)];
    std::vector<Complex> cur(static_cast<std::size_t>(i + 1), Complex{0.0, 0.0});
    const Complex diag = h(i - 1, i - 1);
    for (std::size_t k = 0; k < prev.size(); ++k) {
      cur[k + 1] += prev[k];
      cur[k] -= diag * prev[k];
    }
    Complex chain{1.0, 0.0};
    for (Eigen::Index mm = 1; mm < i; ++mm) {
      chain *= h(i - mm, i - mm - 1);
      const Complex factor = h(i - mm - 1, i - 1) * chain;
      const auto& lower = p[static_cast<std::size_t>(i - mm - 1)];
      for (std::size_t k = 0; k < lower.size(); ++k) cur[k] -= factor * lower[k];
    }
    p[static_cast<std::size_t>(i)] = std::move(cur);
  }
  std::vector<Complex> out(p[static_cast<std::size_t>(n)].rbegin(),
                           p[static_cast<std::size_t>(n)].rend());
  return out;
}

/// Horner evaluation of a descending-power coefficient vector.
inline Complex poly_eval(const std::vector<Complex>& coeffs, Complex x) {
  Complex acc{0.0, 0.0};
  for (const auto& c : coeffs) acc = acc * x + c;
  return acc;
}

}  // namespace nipsqw
