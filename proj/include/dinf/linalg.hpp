#pragma once

// Tolerance-aware rank-revealing linear algebra and subspace arithmetic.
// All subspaces are carried as orthonormal bases; set operations reduce to
// rank decisions on concatenated bases.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace dinf {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

struct Tolerances {
  // Relative singular-value threshold; scaled by max(rows, cols) at the
  // point of use.
  double rank_rtol = 1e-10;
  // Half-width of the numerical unit-circle band.
  double boundary_delta = 1e-8;
  // Absolute residual bound for subspace containment checks.
  double containment_atol = 1e-8;

  void validate() const {
    if (!(rank_rtol > 0.0 && rank_rtol < 1.0))
      throw std::invalid_argument("Tolerances: rank_rtol must be in (0, 1)");
    if (!(boundary_delta > 0.0))
      throw std::invalid_argument("Tolerances: boundary_delta must be > 0");
    if (!(containment_atol > 0.0))
      throw std::invalid_argument("Tolerances: containment_atol must be > 0");
  }
};

inline void require_finite(const Matrix& A, const std::string& name) {
  if (!A.allFinite())
    throw std::invalid_argument("matrix '" + name + "' has non-finite entries");
}

// Number of singular values above rank_rtol * max(rows, cols) * sigma_max.
// `ref` is an optional reference scale for the inputs of the computation
// that produced A: with a purely relative threshold a matrix that is
// mathematically zero but contaminated by roundoff (entries ~ eps * inputs)
// would be declared rank >= 1, since its own sigma_max is the noise itself.
// Thresholding against max(sigma_max, ref) treats such matrices as zero.
inline Index numerical_rank(const Matrix& A, const Tolerances& tol,
                            double ref = 0.0) {
  require_finite(A, "A");
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double thresh = tol.rank_rtol *
                        static_cast<double>(std::max(A.rows(), A.cols())) *
                        std::max(s(0), ref);
  Index r = 0;
  while (r < s.size() && s(r) > thresh) ++r;
  return r;
}

inline Index numerical_rank(const ComplexMatrix& A, const Tolerances& tol,
                            double ref = 0.0) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  if (!A.allFinite())
    throw std::invalid_argument("complex matrix has non-finite entries");
  Eigen::JacobiSVD<ComplexMatrix> svd(A);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double thresh = tol.rank_rtol *
                        static_cast<double>(std::max(A.rows(), A.cols())) *
                        std::max(s(0), ref);
  Index r = 0;
  while (r < s.size() && s(r) > thresh) ++r;
  return r;
}

// Orthonormal-basis representation of a linear subspace of R^ambient.
// Zero-dimensional subspaces are first-class: the basis is ambient x 0.
class Subspace {
 public:
  Subspace(Index ambient, Matrix basis, Tolerances tol)
      : ambient_(ambient), basis_(std::move(basis)), tol_(tol) {
    if (basis_.rows() != ambient_)
      throw std::invalid_argument("Subspace: basis row count != ambient");
    if (basis_.cols() > ambient_)
      throw std::invalid_argument("Subspace: dim exceeds ambient");
    if (basis_.cols() > 0) {
      const Matrix gram = basis_.transpose() * basis_;
      const double err =
          (gram - Matrix::Identity(basis_.cols(), basis_.cols()))
              .cwiseAbs()
              .maxCoeff();
      if (err > 1e-8)
        throw std::invalid_argument("Subspace: basis is not orthonormal");
    }
  }

  static Subspace zero(Index ambient, const Tolerances& tol) {
    return Subspace(ambient, Matrix(ambient, 0), tol);
  }

  static Subspace full(Index ambient, const Tolerances& tol) {
    return Subspace(ambient, Matrix::Identity(ambient, ambient), tol);
  }

  Index ambient() const { return ambient_; }
  Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  const Tolerances& tol() const { return tol_; }

 private:
  Index ambient_;
  Matrix basis_;
  Tolerances tol_;
};

// Orthonormal basis of the column space of A. See numerical_rank for `ref`.
inline Subspace image_basis(const Matrix& A, const Tolerances& tol,
                            double ref = 0.0) {
  require_finite(A, "A");
  if (A.rows() == 0) return Subspace::zero(0, tol);
  if (A.cols() == 0) return Subspace::zero(A.rows(), tol);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU);
  const Vector& s = svd.singularValues();
  Index r = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double thresh = tol.rank_rtol *
                          static_cast<double>(std::max(A.rows(), A.cols())) *
                          std::max(s(0), ref);
    while (r < s.size() && s(r) > thresh) ++r;
  }
  return Subspace(A.rows(), svd.matrixU().leftCols(r), tol);
}

// Orthonormal basis of the null space of A. See numerical_rank for `ref`.
inline Subspace kernel_basis(const Matrix& A, const Tolerances& tol,
                             double ref = 0.0) {
  require_finite(A, "A");
  if (A.cols() == 0) return Subspace::zero(0, tol);
  if (A.rows() == 0) return Subspace::full(A.cols(), tol);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Index r = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double thresh = tol.rank_rtol *
                          static_cast<double>(std::max(A.rows(), A.cols())) *
                          std::max(s(0), ref);
    while (r < s.size() && s(r) > thresh) ++r;
  }
  return Subspace(A.cols(), svd.matrixV().rightCols(A.cols() - r), tol);
}

// Matrix K with orthonormal rows spanning (im V)^perp, so ker K = im V.
// K has rows(V) - rank(V) rows and K * V = 0 within tolerance.
inline Matrix annihilator_of_image(const Matrix& V, const Tolerances& tol) {
  require_finite(V, "V");
  const Index n = V.rows();
  if (V.cols() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(V, Eigen::ComputeFullU);
  const Vector& s = svd.singularValues();
  Index r = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double thresh =
        tol.rank_rtol * static_cast<double>(std::max(V.rows(), V.cols())) *
        s(0);
    while (r < s.size() && s(r) > thresh) ++r;
  }
  return svd.matrixU().rightCols(n - r).transpose();
}

// Inverse image {x | Ax in S}, computed as ker(annihilator(S) * A).
// K has orthonormal rows, so sigma_max(KA) <= sigma_max(A): rank decisions on
// the product are referenced against the scale of A itself.
inline Subspace inverse_image(const Matrix& A, const Subspace& S,
                              const Tolerances& tol) {
  if (S.ambient() != A.rows())
    throw std::invalid_argument("inverse_image: ambient of S != rows of A");
  const Matrix K = annihilator_of_image(S.basis(), tol);
  if (K.rows() == 0) return Subspace::full(A.cols(), tol);
  return kernel_basis(K * A, tol, A.norm());
}

namespace detail {
inline void require_same_ambient(const Subspace& a, const Subspace& b,
                                 const char* op) {
  if (a.ambient() != b.ambient())
    throw std::invalid_argument(std::string(op) + ": ambient mismatch");
}
}  // namespace detail

inline Subspace subspace_sum(const Subspace& S1, const Subspace& S2) {
  detail::require_same_ambient(S1, S2, "subspace_sum");
  Matrix cat(S1.ambient(), S1.dim() + S2.dim());
  cat << S1.basis(), S2.basis();
  return image_basis(cat, S1.tol());
}

inline Subspace subspace_intersect(const Subspace& S1, const Subspace& S2) {
  detail::require_same_ambient(S1, S2, "subspace_intersect");
  const Tolerances& tol = S1.tol();
  const Matrix K1 = annihilator_of_image(S1.basis(), tol);
  const Matrix K2 = annihilator_of_image(S2.basis(), tol);
  Matrix stacked(K1.rows() + K2.rows(), S1.ambient());
  stacked << K1, K2;
  if (stacked.rows() == 0) return Subspace::full(S1.ambient(), tol);
  return kernel_basis(stacked, tol);
}

// True iff inner is contained in outer: rank [outer inner] = dim outer.
inline bool subspace_contains(const Subspace& outer, const Subspace& inner) {
  detail::require_same_ambient(outer, inner, "subspace_contains");
  if (inner.dim() == 0) return true;
  if (outer.dim() == 0) {
    // Nonempty orthonormal basis always has full column rank.
    return false;
  }
  Matrix cat(outer.ambient(), outer.dim() + inner.dim());
  cat << outer.basis(), inner.basis();
  return numerical_rank(cat, outer.tol()) == outer.dim();
}

inline bool subspace_equal(const Subspace& a, const Subspace& b) {
  return a.dim() == b.dim() && subspace_contains(a, b) &&
         subspace_contains(b, a);
}

// Image of a subspace under a linear map. S carries an orthonormal basis, so
// the product is rank-referenced against the scale of A.
inline Subspace apply_map(const Matrix& A, const Subspace& S,
                          const Tolerances& tol) {
  if (A.cols() != S.ambient())
    throw std::invalid_argument("apply_map: cols of A != ambient of S");
  return image_basis(A * S.basis(), tol, A.norm());
}

inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols())
    throw std::invalid_argument("vstack: column count mismatch");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

inline Matrix hstack(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows())
    throw std::invalid_argument("hstack: row count mismatch");
  Matrix out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

}  // namespace dinf
