#pragma once

// Data and structure ingestion: validates dimensions, classifies the noise
// pattern, and derives the reduced triple (P, Q, R) together with the
// annihilator (M N) of im [E; F].

#include <stdexcept>
#include <string>

#include "dinf/linalg.hpp"

namespace dinf {

struct SystemStructure {
  Matrix B;  // n x m
  Matrix C;  // p x n
  Matrix D;  // p x m
  Matrix E;  // n x r_w
  Matrix F;  // p x r_w

  Index n() const { return B.rows(); }
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }
  Index rw() const { return E.cols(); }

  void validate() const {
    require_finite(B, "B");
    require_finite(C, "C");
    require_finite(D, "D");
    require_finite(E, "E");
    require_finite(F, "F");
    if (C.cols() != n())
      throw std::invalid_argument("SystemStructure: C must have n columns");
    if (D.rows() != p() || D.cols() != m())
      throw std::invalid_argument("SystemStructure: D must be p x m");
    if (E.rows() != n())
      throw std::invalid_argument("SystemStructure: E must have n rows");
    if (F.rows() != p() || F.cols() != E.cols())
      throw std::invalid_argument(
          "SystemStructure: F must be p x r_w with r_w matching E");
    if (n() < 1) throw std::invalid_argument("SystemStructure: n must be >= 1");
  }
};

struct DataSet {
  Matrix U_minus;  // m x T
  Matrix X;        // n x (T+1)
  Matrix Y_minus;  // p x T

  Index T() const { return U_minus.cols(); }
  Matrix X_minus() const { return X.leftCols(T()); }
  Matrix X_plus() const { return X.rightCols(T()); }

  void validate(const SystemStructure& sys) const {
    require_finite(U_minus, "U");
    require_finite(X, "X");
    require_finite(Y_minus, "Y");
    if (T() < 1) throw std::invalid_argument("DataSet: T must be >= 1");
    if (U_minus.rows() != sys.m())
      throw std::invalid_argument("DataSet: U must have m rows");
    if (X.rows() != sys.n())
      throw std::invalid_argument("DataSet: X must have n rows");
    if (X.cols() != T() + 1)
      throw std::invalid_argument("DataSet: X must have T+1 columns");
    if (Y_minus.rows() != sys.p() || Y_minus.cols() != T())
      throw std::invalid_argument("DataSet: Y must be p x T");
  }
};

enum class NoisePattern { General, IndependentSplit, ProcessOnly, Noiseless };

inline const char* to_string(NoisePattern pattern) {
  switch (pattern) {
    case NoisePattern::General: return "general";
    case NoisePattern::IndependentSplit: return "independent-split";
    case NoisePattern::ProcessOnly: return "process-only";
    case NoisePattern::Noiseless: return "noiseless";
  }
  return "?";
}

// Classification is by declared structural zero blocks, not numerical
// inference.
inline NoisePattern classify_noise(const Matrix& E, const Matrix& F) {
  const bool e_zero = E.cols() == 0 || E.isZero(0.0);
  const bool f_zero = F.cols() == 0 || F.isZero(0.0);
  if (e_zero && f_zero) return NoisePattern::Noiseless;
  if (f_zero) return NoisePattern::ProcessOnly;
  if (e_zero) return NoisePattern::IndependentSplit;
  // E = (E1 0), F = (0 F2): all E-active columns precede all F-active ones.
  Index r1 = 0;
  for (Index j = 0; j < E.cols(); ++j)
    if (!E.col(j).isZero(0.0)) r1 = j + 1;
  bool split = true;
  for (Index j = 0; j < r1; ++j)
    if (!F.col(j).isZero(0.0)) split = false;
  return split ? NoisePattern::IndependentSplit : NoisePattern::General;
}

struct Reduction {
  Matrix P;        // X_-
  Matrix Q;        // M (pattern-simplified where applicable)
  Matrix R;        // pattern-simplified right-hand side
  Matrix MN;       // full annihilator of im [E; F]
  Matrix Q_full;   // first n columns of MN
  Matrix R_full;   // MN * [X_+ - B U_- ; Y_- - C X_- - D U_-]
  Matrix X_plus;   // retained for the simplified controllability pencils
  NoisePattern pattern = NoisePattern::General;
  // Magnitude of the raw data entering the reduction; reference scale for
  // rank decisions on derived matrices that may cancel to roundoff.
  double scale = 1.0;
};

inline Reduction build_reduction(const SystemStructure& sys,
                                 const DataSet& data, const Tolerances& tol) {
  sys.validate();
  data.validate(sys);
  tol.validate();
  const Index n = sys.n();
  const Index p = sys.p();

  Reduction red;
  red.pattern = classify_noise(sys.E, sys.F);
  red.P = data.X_minus();
  red.X_plus = data.X_plus();

  const Matrix state_residual = data.X_plus() - sys.B * data.U_minus;
  const Matrix output_residual =
      data.Y_minus - sys.C * data.X_minus() - sys.D * data.U_minus;
  const Matrix stacked = vstack(state_residual, output_residual);

  Matrix EF(n + p, sys.rw());
  EF << sys.E, sys.F;
  red.MN = annihilator_of_image(EF, tol);
  red.Q_full = red.MN.leftCols(n);
  red.R_full = red.MN * stacked;
  red.scale = std::max({1.0, stacked.cwiseAbs().maxCoeff(),
                        data.X.cwiseAbs().maxCoeff()});

  switch (red.pattern) {
    case NoisePattern::Noiseless:
      red.Q = Matrix::Identity(n, n);
      red.R = state_residual;
      break;
    case NoisePattern::ProcessOnly:
    case NoisePattern::IndependentSplit:
      // ker M = im E; the output equation puts no constraint on A.
      red.Q = annihilator_of_image(sys.E, tol);
      red.R = red.Q * state_residual;
      break;
    case NoisePattern::General:
      red.Q = red.Q_full;
      red.R = red.R_full;
      break;
  }
  return red;
}

// True iff the compatible family is nonempty: im R \subseteq im Q and
// ker P \subseteq ker R, evaluated on the full annihilator reduction so that
// the output equation participates.
inline bool consistency_check(const Reduction& red, const Tolerances& tol) {
  // Q_full is a block of a matrix with orthonormal rows and R_full is an
  // annihilator-data product: both can be mathematically zero yet carry
  // roundoff, so their rank decisions are referenced against unit scale and
  // the data magnitude respectively.
  const Subspace imQ = image_basis(red.Q_full, tol, 1.0);
  const Subspace imR = image_basis(red.R_full, tol, red.scale);
  if (!subspace_contains(imQ, imR)) return false;
  const Subspace kerP = kernel_basis(red.P, tol, red.scale);
  const Subspace kerR = kernel_basis(red.R_full, tol, red.scale);
  return subspace_contains(kerR, kerP);
}

}  // namespace dinf
