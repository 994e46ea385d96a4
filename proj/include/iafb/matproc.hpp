#pragma once

// Dense complex linear algebra and subspace kernel.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "iafb/error.hpp"

namespace iafb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTol = 1e-9;
inline constexpr double kOrthoTol = 1e-10;

inline bool all_finite(const CMatrix& a) {
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      if (!std::isfinite(a(r, c).real()) || !std::isfinite(a(r, c).imag())) return false;
  return true;
}

inline void require_finite(const CMatrix& a, const char* where) {
  require(all_finite(a), ErrorKind::InvalidInput, std::string(where) + ": non-finite entry");
}

inline double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

/// A point of G(A,B): a B x A matrix with orthonormal columns.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;

  // Takes ownership of an already-orthonormal basis; throws if it is not.
  explicit SubspaceBasis(CMatrix basis) : basis_(std::move(basis)) {
    require_finite(basis_, "SubspaceBasis");
    require(basis_.cols() <= basis_.rows(), ErrorKind::InvalidInput,
            "SubspaceBasis: rank exceeds ambient dimension");
    if (rank() == 0) return;
    const CMatrix gram = basis_.adjoint() * basis_;
    const double err = (gram - CMatrix::Identity(rank(), rank())).cwiseAbs().maxCoeff();
    require(err <= 1e-8, ErrorKind::InvalidInput, "SubspaceBasis: columns are not orthonormal");
  }

  static SubspaceBasis empty(int ambient) { return SubspaceBasis(CMatrix(ambient, 0)); }
  static SubspaceBasis whole(int ambient) {
    return SubspaceBasis(CMatrix::Identity(ambient, ambient));
  }

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int rank() const { return static_cast<int>(basis_.cols()); }
  const CMatrix& basis() const { return basis_; }

  /// Complex dimension of the Grassmannian this point lives on.
  long manifold_dim() const { return static_cast<long>(rank()) * (ambient_dim() - rank()); }

  /// Orthogonal projector onto the span.
  CMatrix projector() const { return basis_ * basis_.adjoint(); }

 private:
  CMatrix basis_;
};

/// Number of singular values above tol * sigma_max.
inline int numerical_rank(const CMatrix& a, double tol = kRankTol) {
  require_finite(a, "numerical_rank");
  if (a.size() == 0) return 0;
  Eigen::BDCSVD<CMatrix> svd(a);
  const RVector& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  const double cut = tol * s(0);
  int r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) ++r;
  return r;
}

/// True iff sigma_min > tol * sigma_max.
inline bool det_nonzero(const CMatrix& a, double tol = kRankTol) {
  require_finite(a, "det_nonzero");
  require(a.rows() == a.cols(), ErrorKind::InvalidInput, "det_nonzero: matrix is not square");
  if (a.size() == 0) return true;
  Eigen::BDCSVD<CMatrix> svd(a);
  const RVector& s = svd.singularValues();
  return s(0) > 0.0 && s(s.size() - 1) > tol * s(0);
}

inline SubspaceBasis null_space(const CMatrix& a, double tol = kRankTol) {
  require_finite(a, "null_space");
  const Eigen::Index n = a.cols();
  if (a.rows() == 0 || n == 0) return SubspaceBasis(CMatrix::Identity(n, n));
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  int r = 0;
  if (s(0) > 0.0)
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) > tol * s(0)) ++r;
  return SubspaceBasis(svd.matrixV().rightCols(n - r));
}

inline SubspaceBasis left_null_space(const CMatrix& a, double tol = kRankTol) {
  return null_space(a.adjoint(), tol);
}

/// Orthonormal basis of the column span of a.
inline SubspaceBasis column_span(const CMatrix& a, double tol = kRankTol) {
  require_finite(a, "column_span");
  const Eigen::Index m = a.rows();
  if (a.cols() == 0 || m == 0) return SubspaceBasis(CMatrix(m, 0));
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  int r = 0;
  if (s(0) > 0.0)
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) > tol * s(0)) ++r;
  return SubspaceBasis(svd.matrixU().leftCols(r));
}

/// Intersection of subspaces of a common ambient space. Each input S
/// contributes the constraint rows (S-perp)^H; the stack's null space is the
/// intersection.
inline SubspaceBasis intersect_subspaces(std::span<const SubspaceBasis> spaces,
                                         double tol = kRankTol) {
  require(!spaces.empty(), ErrorKind::InvalidInput, "intersect_subspaces: no inputs");
  const int b = spaces.front().ambient_dim();
  Eigen::Index rows = 0;
  for (const auto& s : spaces) {
    require(s.ambient_dim() == b, ErrorKind::InvalidInput,
            "intersect_subspaces: mismatched ambient dimensions");
    rows += b - s.rank();
  }
  CMatrix constraints(rows, b);
  Eigen::Index at = 0;
  for (const auto& s : spaces) {
    const int k = b - s.rank();
    if (k == 0) continue;
    constraints.middleRows(at, k) = left_null_space(s.basis(), tol).basis().adjoint();
    at += k;
  }
  return null_space(constraints, tol);
}

inline bool is_hermitian(const CMatrix& h, double tol = kOrthoTol) {
  if (h.rows() != h.cols()) return false;
  if (h.size() == 0) return true;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Orthonormal eigenvectors for the d smallest eigenvalues, ascending.
inline CMatrix smallest_eigvecs(const CMatrix& h, int d) {
  require_finite(h, "smallest_eigvecs");
  require(is_hermitian(h), ErrorKind::InvalidInput, "smallest_eigvecs: matrix is not hermitian");
  require(d >= 0 && d <= h.rows(), ErrorKind::InvalidInput,
          "smallest_eigvecs: requested more vectors than the dimension");
  if (d == 0) return CMatrix(h.rows(), 0);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  require(eig.info() == Eigen::Success, ErrorKind::InvalidInput,
          "smallest_eigvecs: eigensolver failed");
  return eig.eigenvectors().leftCols(d);
}

inline RVector eigenvalues_ascending(const CMatrix& h) {
  require(is_hermitian(h), ErrorKind::InvalidInput, "eigenvalues: matrix is not hermitian");
  if (h.size() == 0) return RVector(0);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

inline double chordal_distance(const SubspaceBasis& s1, const SubspaceBasis& s2) {
  require(s1.ambient_dim() == s2.ambient_dim() && s1.rank() == s2.rank(), ErrorKind::InvalidInput,
          "chordal_distance: subspaces live on different Grassmannians");
  const double overlap = (s1.basis().adjoint() * s2.basis()).squaredNorm();
  return std::sqrt(std::max(0.0, s1.rank() - overlap));
}

}  // namespace iafb
