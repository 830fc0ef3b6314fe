#pragma once

// Physical inner-product metrics Theta = sum_n kappa_n |xi_n>><<xi_n| built
// from the eigenvectors of H^dagger ("ketkets"), and the two Dyson
// factorizations Theta = Omega^dagger Omega used downstream.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nipsqw/matrix_core.hpp"

namespace nipsqw {

struct KetketBasis {
  ComplexVector eigenvalues;  // of H^dagger, i.e. conj(E_n)
  ComplexMatrix vectors;      // columns |xi_n>>
  std::vector<Eigen::Index> pivots;  // entry of column n normalised to 1
};

enum class DysonKind { ketket_columns, hermitian_root };

struct MetricBundle {
  ComplexMatrix theta;
  RealVector kappa;
  ComplexMatrix omega;
  DysonKind omega_kind = DysonKind::ketket_columns;
  ComplexMatrix h_diag;        // empty for hermitian_root
  RealVector positivity_eigs;  // eigenvalues of theta, ascending
};

namespace detail {

inline EigenDecomposition diagonalizable_or_throw(const ComplexMatrix& m, const Tolerances& tol,
                                                  const char* what) {
  EigenDecomposition eig;
  try {
    eig = eig_general(m, tol);
  } catch (const NoConvergence& e) {
    throw DefectiveAtEP(std::string(what) + ": " + e.what());
  }
  if (!(eig.vector_condition <= tol.defect_condition)) {
    throw DefectiveAtEP(std::string(what) + ": eigenvector condition " +
                        std::to_string(eig.vector_condition));
  }
  return eig;
}

inline Eigen::Index normalise_column(ComplexMatrix& vectors, Eigen::Index col,
                                     Eigen::Index preferred, double pivot_tol) {
  Eigen::Index pivot = preferred;
  if (std::abs(vectors(preferred, col)) < pivot_tol) {
    vectors.col(col).cwiseAbs().maxCoeff(&pivot);
  }
  vectors.col(col) /= vectors(pivot, col);
  return pivot;
}

}  // namespace detail

/// Eigenvectors of H^dagger. Column n belongs to the n-th eigenvalue of H in
/// descending (Re, Im) order, is paired with the H^dagger eigenvalue nearest
/// conj(E_n), and is scaled so that its n-th entry equals 1 (or its
/// largest-modulus entry, if the n-th is below tol.ketket_pivot).
inline KetketBasis ketkets(const ComplexMatrix& h, const Tolerances& tol = {}) {
  require_square_finite(h, "ketkets");
  const Eigen::Index n = h.rows();
  const EigenDecomposition right = detail::diagonalizable_or_throw(h, tol, "ketkets(H)");
  const EigenDecomposition left = detail::diagonalizable_or_throw(h.adjoint(), tol, "ketkets(H^dagger)");

  KetketBasis out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  out.pivots.resize(static_cast<std::size_t>(n));
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex target = std::conj(right.eigenvalues(n - 1 - k));
    Eigen::Index best = -1;
    double best_dist = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double dist = std::abs(left.eigenvalues(j) - target);
      if (best < 0 || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.eigenvalues(k) = left.eigenvalues(best);
    out.vectors.col(k) = left.right_vectors.col(best);
    out.pivots[static_cast<std::size_t>(k)] =
        detail::normalise_column(out.vectors, k, k, tol.ketket_pivot);
  }
  return out;
}

/// Ketkets of H re-paired to a reference basis by maximal overlap and
/// normalised on the reference pivots, so that a basis evaluated at nearby
/// times varies smoothly.
inline KetketBasis ketkets_aligned(const ComplexMatrix& h, const KetketBasis& reference,
                                   const Tolerances& tol = {}) {
  require_square_finite(h, "ketkets_aligned");
  const Eigen::Index n = h.rows();
  if (reference.vectors.rows() != n) throw DomainError("ketkets_aligned: dimension mismatch");
  const EigenDecomposition left =
      detail::diagonalizable_or_throw(h.adjoint(), tol, "ketkets(H^dagger)");

  struct Candidate {
    double overlap;
    Eigen::Index ref;
    Eigen::Index cand;
  };
  std::vector<Candidate> pairs;
  pairs.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const ComplexVector r = reference.vectors.col(i).normalized();
    for (Eigen::Index j = 0; j < n; ++j) {
      pairs.push_back({std::abs(r.dot(left.right_vectors.col(j))), i, j});
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Candidate& a, const Candidate& b) { return a.overlap > b.overlap; });
  std::vector<Eigen::Index> match(static_cast<std::size_t>(n), -1);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (const auto& p : pairs) {
    if (match[static_cast<std::size_t>(p.ref)] >= 0 || taken[static_cast<std::size_t>(p.cand)]) {
      continue;
    }
    match[static_cast<std::size_t>(p.ref)] = p.cand;
    taken[static_cast<std::size_t>(p.cand)] = true;
  }

  KetketBasis out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  out.pivots = reference.pivots;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = match[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = left.eigenvalues(j);
    out.vectors.col(k) = left.right_vectors.col(j);
    const Eigen::Index pivot = reference.pivots[static_cast<std::size_t>(k)];
    if (std::abs(out.vectors(pivot, k)) == 0.0) {
      throw SingularDyson("aligned ketket vanishes on its reference pivot");
    }
    out.vectors.col(k) /= out.vectors(pivot, k);
  }
  return out;
}

inline void require_weights(const RealVector& kappa, Eigen::Index n) {
  if (kappa.size() != n) throw BadWeights("expected " + std::to_string(n) + " weights");
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(kappa(k) > 0.0) || !std::isfinite(kappa(k))) {
      throw BadWeights("weights must be finite and strictly positive");
    }
  }
}

/// Theta = sum_n kappa_n |xi_n>><<xi_n|.
inline ComplexMatrix build_metric(const KetketBasis& basis, const RealVector& kappa) {
  require_weights(kappa, basis.vectors.cols());
  return basis.vectors * kappa.cast<Complex>().asDiagonal() * basis.vectors.adjoint();
}

inline ComplexMatrix build_metric(const KetketBasis& basis) {
  return build_metric(basis, RealVector::Ones(basis.vectors.cols()));
}

/// ||H^dagger Theta - Theta H|| / (||H|| ||Theta||).
inline double quasi_hermiticity_residual(const ComplexMatrix& h, const ComplexMatrix& theta) {
  const double scale = norm2(h) * norm2(theta);
  if (scale == 0.0) return 0.0;
  return norm2(h.adjoint() * theta - theta * h) / scale;
}

/// Same test for an arbitrary candidate observable.
inline double observable_check(const ComplexMatrix& lambda, const ComplexMatrix& theta) {
  return quasi_hermiticity_residual(lambda, theta);
}

/// Omega with Omega^dagger = [sqrt(kappa_n) |xi_n>>] column by column.
inline ComplexMatrix dyson_map(const KetketBasis& basis, const RealVector& kappa) {
  require_weights(kappa, basis.vectors.cols());
  return kappa.cwiseSqrt().cast<Complex>().asDiagonal() * basis.vectors.adjoint();
}

inline MetricBundle dyson_from_ketkets(const KetketBasis& basis, const RealVector& kappa,
                                       const Tolerances& tol = {}) {
  MetricBundle out;
  out.kappa = kappa;
  out.omega_kind = DysonKind::ketket_columns;
  out.omega = dyson_map(basis, kappa);
  try {
    (void)inverse(out.omega, tol);
  } catch (const SingularMatrix& e) {
    throw SingularDyson(e.what());
  }
  out.theta = build_metric(basis, kappa);
  out.h_diag = basis.eigenvalues.conjugate().asDiagonal();
  out.positivity_eigs = eig_hermitian(out.theta, tol).eigenvalues.real();
  return out;
}

/// Ketket-column Dyson map; the implied weights are all ones.
inline MetricBundle dyson_from_ketkets(const KetketBasis& basis, const Tolerances& tol = {}) {
  return dyson_from_ketkets(basis, RealVector::Ones(basis.vectors.cols()), tol);
}

/// Self-adjoint root Omega = Theta^{1/2}.
inline MetricBundle dyson_hermitian(const ComplexMatrix& theta, const Tolerances& tol = {}) {
  MetricBundle out;
  out.omega_kind = DysonKind::hermitian_root;
  out.theta = theta;
  out.omega = sqrt_hpd(theta, tol);
  out.positivity_eigs = eig_hermitian(theta, tol).eigenvalues.real();
  return out;
}

}  // namespace nipsqw
