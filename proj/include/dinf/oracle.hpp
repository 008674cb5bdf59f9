#pragma once

// Cross-validation oracle: parametrizes the compatible family
// {A | R = Q A P}, samples members, runs model-based property checks, and
// constructs counterexample systems along the constructive proof of the
// uniform rank theorem.

#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "dinf/informativity.hpp"

namespace dinf {

// Minimum-norm solution of Q A P = R.
inline Matrix minimum_norm_solution(const Matrix& Q, const Matrix& P,
                                    const Matrix& R) {
  const Index n = Q.cols();
  if (Q.rows() == 0 || P.cols() == 0) return Matrix::Zero(n, n);
  Matrix K = Eigen::kroneckerProduct(P.transpose(), Q);
  Eigen::Map<const Vector> vecR(R.data(), R.size());
  Vector vecA = K.completeOrthogonalDecomposition().solve(vecR);
  return Eigen::Map<const Matrix>(vecA.data(), n, n);
}

// Affine parametrization of {A | Q A P = R}:
//   A = A_particular + U1 F1 + F2 U2,
// with U1 a column basis of ker Q and U2 rows spanning the left annihilator
// of P. The parametrization is complete: dimensions match
// n^2 - rank(Q) rank(P).
struct CompatibleFamily {
  Matrix A_particular;  // n x n
  Matrix U1;            // n x k1, columns span ker Q
  Matrix U2;            // k2 x n, rows span (im P)^perp
  Index k1 = 0;
  Index k2 = 0;

  Index n() const { return A_particular.rows(); }
};

inline CompatibleFamily parametrize(const Reduction& red,
                                    const Tolerances& tol) {
  if (!consistency_check(red, tol))
    throw inconsistent_data_error(
        "parametrize: the compatible family is empty");
  CompatibleFamily fam;
  fam.A_particular = minimum_norm_solution(red.Q, red.P, red.R);
  fam.U1 = kernel_basis(red.Q, tol).basis();
  fam.U2 = annihilator_of_image(red.P, tol);
  fam.k1 = fam.U1.cols();
  fam.k2 = fam.U2.rows();
  return fam;
}

inline std::vector<Matrix> sample(const CompatibleFamily& fam, int count,
                                  double magnitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-magnitude, magnitude);
  const Index n = fam.n();
  std::vector<Matrix> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    Matrix A = fam.A_particular;
    if (fam.k1 > 0) {
      Matrix F1(fam.k1, n);
      for (Index i = 0; i < F1.size(); ++i) F1(i) = unif(rng);
      A += fam.U1 * F1;
    }
    if (fam.k2 > 0) {
      Matrix F2(n, fam.k2);
      for (Index i = 0; i < F2.size(); ++i) F2(i) = unif(rng);
      A += F2 * fam.U2;
    }
    out.push_back(std::move(A));
  }
  return out;
}

// ---- model-based property checks -------------------------------------------

namespace detail {

// PBH-style check with eigenvalues of A as the exact candidate set.
inline Tristate pbh_check(const Matrix& A, const Matrix& W, bool observability,
                          Region region, const Tolerances& tol) {
  const Index n = A.rows();
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  bool marginal = false;
  for (Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    bool in_region = true;
    bool in_band = false;
    if (region == Region::ClosedUnitExterior) {
      const double r = std::abs(lambda);
      in_band = std::abs(r - 1.0) <= tol.boundary_delta;
      in_region = r > 1.0 + tol.boundary_delta;
    }
    if (!in_region && !in_band) continue;
    ComplexMatrix M;
    const ComplexMatrix Ashift =
        A.cast<std::complex<double>>() -
        lambda * ComplexMatrix::Identity(n, n);
    if (observability) {
      M.resize(n + W.rows(), n);
      M << Ashift, W.cast<std::complex<double>>();
    } else {
      M.resize(n, n + W.cols());
      M << Ashift, W.cast<std::complex<double>>();
    }
    if (numerical_rank(M, tol) < n) {
      if (in_band) marginal = true;
      else return Tristate::False;
    }
  }
  return marginal ? Tristate::Marginal : Tristate::True;
}

inline PropertyPencil rosenbrock_pencil(const Matrix& A, const Matrix& B,
                                        const Matrix& C, const Matrix& D,
                                        Property prop, const Tolerances& tol) {
  const Index n = A.rows();
  const Matrix N0 = vstack(hstack(A, B), hstack(C, D));
  Matrix N1 = Matrix::Zero(N0.rows(), N0.cols());
  N1.topLeftCorner(n, n) = Matrix::Identity(n, n);
  Index target;
  if (prop == Property::StrongObservability ||
      prop == Property::StrongDetectability)
    target = n + numerical_rank(vstack(B, D), tol);
  else
    target = n + numerical_rank(hstack(C, D), tol);
  return {Pencil(N0, N1), target, region_of(prop)};
}

}  // namespace detail

// Model-based check of a property on a concrete A.
inline Tristate model_check(const Matrix& A, const SystemStructure& sys,
                            Property prop, const Tolerances& tol,
                            std::uint64_t seed = kDefaultSeed) {
  switch (prop) {
    case Property::Observability:
    case Property::Detectability:
      return detail::pbh_check(A, sys.C, true, region_of(prop), tol);
    case Property::Controllability:
    case Property::Stabilizability:
      return detail::pbh_check(A, sys.B, false, region_of(prop), tol);
    case Property::StrongObservability:
    case Property::StrongDetectability:
    case Property::StrongControllability:
    case Property::StrongStabilizability: {
      const PropertyPencil pp =
          detail::rosenbrock_pencil(A, sys.B, sys.C, sys.D, prop, tol);
      const RankVerdict rv =
          uniform_rank_test(pp.pencil, pp.target, pp.region, tol, seed);
      return rv.holds;
    }
    case Property::LeftInvertibility: {
      if (numerical_rank(vstack(sys.B, sys.D), tol) < sys.m())
        return Tristate::False;
      const Subspace V = weakly_unobservable(A, sys.B, sys.C, sys.D, tol);
      const Subspace meet =
          subspace_intersect(image_basis(V.basis(), tol),
                             b_times_ker_d(sys, tol));
      return meet.dim() == 0 ? Tristate::True : Tristate::False;
    }
  }
  throw std::logic_error("model_check: unreachable");
}

// ---- counterexample construction -------------------------------------------

struct Counterexample {
  Matrix A_bad;
  Property prop;
  std::optional<std::complex<double>> lambda;
  ComplexVector xi;   // state direction of the certificate, may be empty
  ComplexVector eta;  // input direction of the certificate, may be empty
  bool from_search = false;
  bool verified = false;
  std::string note;
};

namespace detail {

// Worst-case member per the V*/J* sandwich: an Abar in the family with
// P J* \subseteq V(Abar, B, C, D). Requires C^-1 im D \subseteq im P.
inline Matrix worst_case_member(const ReducedTriple& t,
                                const SystemStructure& sys,
                                const Tolerances& tol) {
  const Matrix A = minimum_norm_solution(t.Q, t.P, t.R);
  auto [J, trace] = jstar(t, sys, tol);
  (void)trace;
  const Matrix Jb = J.basis();
  const Matrix PJ = t.P * Jb;
  const Subspace PJspan = image_basis(PJ, tol, t.P.norm());
  const Index k = PJspan.dim();
  if (k == 0) return A;

  const Matrix Bx = PJspan.basis();
  const auto PJ_solver = PJ.completeOrthogonalDecomposition();
  const Matrix QP = t.Q * t.P;
  const Matrix QB = t.Q * sys.B;
  const Matrix CP = sys.C * t.P;
  // [QP Jb, QB; 0, D] (alpha; w) = (R nu; CP nu)
  Matrix sys_mat(t.Q.rows() + sys.p(), J.dim() + sys.m());
  sys_mat << QP * Jb, QB, Matrix::Zero(sys.p(), J.dim()), sys.D;
  const auto inc_solver = sys_mat.completeOrthogonalDecomposition();

  Matrix Z(t.P.rows(), k);
  for (Index i = 0; i < k; ++i) {
    const Vector x = Bx.col(i);
    const Vector nu = Jb * PJ_solver.solve(x);
    Vector rhs(t.Q.rows() + sys.p());
    rhs << t.R * nu, CP * nu;
    const Vector sol = inc_solver.solve(rhs);
    const Vector alpha = sol.head(J.dim());
    const Vector w = sol.tail(sys.m());
    const Vector u = -w;
    const Vector s = A * x + sys.B * u;
    Z.col(i) = s - t.P * (Jb * alpha);
  }
  // A0 = -Z * pinv(Bx); Q A0 = 0 because Q Z = 0.
  const Matrix A0 = -Z * Bx.completeOrthogonalDecomposition().pseudoInverse();
  return A + A0;
}

// Counterexample for the observability-side properties on a general triple,
// following the three-case split of the constructive proof. For the plain
// observability variants pass zero-width Beff/Deff.
inline std::optional<Matrix> obs_side_counterexample(
    const ReducedTriple& t, const Matrix& B, const Matrix& C, const Matrix& D,
    Region region, const Tolerances& tol, std::uint64_t seed) {
  const Index n = t.P.rows();
  const Matrix A = minimum_norm_solution(t.Q, t.P, t.R);
  // Real mu robustly inside the region (any valid choice works; verification
  // is by the model-based check).
  const double mu = region == Region::ClosedUnitExterior ? 2.0 : 0.5;

  const Subspace imP = image_basis(t.P, tol);
  const Subspace pre = inverse_image(C, image_basis(D, tol), tol);
  if (!subspace_contains(imP, pre)) {
    // Pick xhat in C^-1 im D with the largest component outside im P.
    Vector xhat;
    double best = 0.0;
    for (Index j = 0; j < pre.dim(); ++j) {
      Vector cand = pre.basis().col(j);
      Vector resid = cand - imP.basis() * (imP.basis().transpose() * cand);
      if (resid.norm() > best) {
        best = resid.norm();
        xhat = cand;
      }
    }
    if (best <= tol.containment_atol) return std::nullopt;
    Vector uhat =
        D.cols() > 0
            ? Vector(D.completeOrthogonalDecomposition().solve(
                  Vector(-C * xhat)))
            : Vector(0);
    const Vector z = -(A * xhat - mu * xhat) - B * uhat;
    // w with w^T P = 0 and w^T xhat = 1.
    Vector w = xhat - imP.basis() * (imP.basis().transpose() * xhat);
    w /= w.dot(xhat);
    return Matrix(A + z * w.transpose());
  }

  // Precondition holds; the failure comes from the rank condition.
  const Matrix QP = t.Q * t.P;
  const Matrix QB = t.Q * B;
  const Matrix CP = C * t.P;
  Pencil pencil(vstack(hstack(t.R, QB), hstack(CP, D)),
                vstack(hstack(QP, Matrix::Zero(t.Q.rows(), B.cols())),
                       Matrix::Zero(C.rows(), t.P.cols() + B.cols())));
  const Index target =
      numerical_rank(t.P, tol) + numerical_rank(vstack(QB, D), tol);
  const RankVerdict rv = uniform_rank_test(pencil, target, region, tol, seed);
  if (rv.holds != Tristate::False) return std::nullopt;

  const Index r = t.P.cols();
  const Index m = B.cols();
  for (const RankWitness& wit : rv.witnesses) {
    const std::complex<double> lambda = wit.lambda;
    if (std::abs(lambda.imag()) <= 1e-9) {
      // Real witness: real kernel vector (nu, eta) with P nu != 0.
      const Matrix L = pencil.N0 - lambda.real() * pencil.N1;
      const Matrix K = kernel_basis(L, tol).basis();
      Vector nu, eta;
      double best = 0.0;
      for (Index j = 0; j < K.cols(); ++j) {
        const Vector xi_cand = t.P * K.col(j).head(r);
        if (xi_cand.norm() > best) {
          best = xi_cand.norm();
          nu = K.col(j).head(r);
          eta = K.col(j).tail(m);
        }
      }
      if (best <= tol.containment_atol) continue;
      const Vector xi = t.P * nu;
      const Vector z = -(A * xi - lambda.real() * xi) - B * eta;
      return Matrix(A + z * xi.transpose() / xi.squaredNorm());
    }
    // Complex witness: kernel of the complex pencil.
    const ComplexMatrix L = pencil.eval(lambda);
    Eigen::JacobiSVD<ComplexMatrix> svd(L, Eigen::ComputeFullV);
    const Index rank = numerical_rank(L, tol);
    const ComplexMatrix K = svd.matrixV().rightCols(L.cols() - rank);
    ComplexVector nu, eta;
    double best = 0.0;
    for (Index j = 0; j < K.cols(); ++j) {
      const ComplexVector xi_cand =
          t.P.cast<std::complex<double>>() * K.col(j).head(r);
      if (xi_cand.norm() > best) {
        best = xi_cand.norm();
        nu = K.col(j).head(r);
        eta = K.col(j).tail(m);
      }
    }
    if (best <= tol.containment_atol) continue;
    const ComplexVector xi = t.P.cast<std::complex<double>>() * nu;
    Matrix reim(n, 2);
    reim << xi.real(), xi.imag();
    if (numerical_rank(reim, tol) < 2) {
      // Dependent real and imaginary parts: reduce to a real witness at mu.
      Index kmax = 0;
      xi.cwiseAbs().maxCoeff(&kmax);
      const std::complex<double> c = std::conj(xi(kmax)) / std::abs(xi(kmax));
      const Vector rhat = (c * xi).real();
      const Vector eta1 = m > 0 ? Vector((c * eta).real()) : Vector(0);
      const Vector eta2 = m > 0 ? Vector((c * eta).imag()) : Vector(0);
      const double a = lambda.real();
      const double b = lambda.imag();
      const Vector xip = b * rhat;
      if (xip.norm() <= tol.containment_atol) continue;
      const Vector etap =
          m > 0 ? Vector(b * eta1 + (mu - a) * eta2) : Vector(0);
      const Vector z = -(A * xip - mu * xip) - B * etap;
      return Matrix(A + z * xip.transpose() / xip.squaredNorm());
    }
    // Independent parts: match both directions at once.
    const ComplexVector zeta =
        (A.cast<std::complex<double>>() * xi - lambda * xi) +
        B.cast<std::complex<double>>() * eta;
    Matrix Zri(n, 2);
    Zri << zeta.real(), zeta.imag();
    const Matrix A0 =
        -Zri * reim.completeOrthogonalDecomposition().pseudoInverse();
    return Matrix(A + A0);
  }
  return std::nullopt;
}

inline Property dual_property(Property prop) {
  switch (prop) {
    case Property::StrongControllability: return Property::StrongObservability;
    case Property::StrongStabilizability: return Property::StrongDetectability;
    case Property::Controllability: return Property::Observability;
    case Property::Stabilizability: return Property::Detectability;
    default: return prop;
  }
}

}  // namespace detail

// Build a verified member of the compatible family on which the property
// fails, per the constructive proof. Returns nullopt for marginal verdicts
// and when no counterexample can be constructed or found.
inline std::optional<Counterexample> construct_counterexample(
    const Reduction& red, const SystemStructure& sys, Property prop,
    const Tolerances& tol, std::uint64_t seed = kDefaultSeed) {
  const ReducedTriple t = triple_of(red);
  const Index n = sys.n();
  std::optional<Matrix> A_bad;

  if (prop == Property::LeftInvertibility) {
    if (numerical_rank(vstack(sys.B, sys.D), tol) < sys.m()) {
      A_bad = minimum_norm_solution(t.Q, t.P, t.R);
    } else {
      // X- J* meets B ker D nontrivially; the worst-case member realizes the
      // intersection inside its weakly unobservable subspace.
      A_bad = detail::worst_case_member(t, sys, tol);
    }
  } else if (is_controllability_family(prop)) {
    ReducedTriple td{t.Q.transpose(), t.P.transpose(), t.R.transpose()};
    Matrix Beff = sys.C.transpose();
    Matrix Ceff = sys.B.transpose();
    Matrix Deff = sys.D.transpose();
    if (detail::dual_property(prop) == Property::Observability ||
        detail::dual_property(prop) == Property::Detectability) {
      Beff = Matrix::Zero(n, 0);
      Deff = Matrix::Zero(Ceff.rows(), 0);
    }
    auto dual = detail::obs_side_counterexample(
        td, Beff, Ceff, Deff, region_of(prop), tol, seed);
    if (dual) A_bad = dual->transpose();
  } else {
    Matrix Beff = sys.B;
    Matrix Ceff = sys.C;
    Matrix Deff = sys.D;
    if (prop == Property::Observability || prop == Property::Detectability) {
      Beff = Matrix::Zero(n, 0);
      Deff = Matrix::Zero(sys.p(), 0);
    }
    A_bad = detail::obs_side_counterexample(t, Beff, Ceff, Deff,
                                            region_of(prop), tol, seed);
    if (!A_bad && (prop == Property::StrongObservability)) {
      A_bad = detail::worst_case_member(t, sys, tol);
    }
  }

  // Q may have zero rows (fully free family); reductions over empty matrices
  // are undefined in Eigen, so treat them as zero.
  auto max_abs = [](const Matrix& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
  };
  auto verify = [&](const Matrix& A) {
    const double scale = std::max({1.0, max_abs(red.R), max_abs(A)});
    const double resid = max_abs(red.Q * A * red.P - red.R);
    if (resid > 1e3 * tol.containment_atol * scale) return false;
    return model_check(A, sys, prop, tol, seed) == Tristate::False;
  };

  if (A_bad && verify(*A_bad)) {
    Counterexample cex;
    cex.A_bad = *A_bad;
    cex.prop = prop;
    cex.verified = true;
    cex.note = "constructed";
    return cex;
  }

  // Randomized fall-back search over the compatible family.
  const CompatibleFamily fam = parametrize(red, tol);
  for (double magnitude : {1.0, 10.0, 100.0}) {
    for (const Matrix& A : sample(fam, 64, magnitude, seed ^ 0xc0dedull)) {
      if (model_check(A, sys, prop, tol, seed) == Tristate::False) {
        const double resid = max_abs(red.Q * A * red.P - red.R);
        if (resid > 1e3 * tol.containment_atol) continue;
        Counterexample cex;
        cex.A_bad = A;
        cex.prop = prop;
        cex.from_search = true;
        cex.verified = true;
        cex.note = "found by randomized search";
        return cex;
      }
    }
  }
  return std::nullopt;
}

// ---- cross-validation ------------------------------------------------------

struct PropertyReport {
  Property prop = Property::Observability;
  Outcome verdict = Outcome::NotInformative;
  int samples_checked = 0;
  int disagreements = 0;
  std::optional<Counterexample> counterexample;
  std::string status;  // "ok", "skipped-marginal", "skipped-inconclusive",
                       // "CRITICAL"
};

struct CrossValidationReport {
  std::vector<PropertyReport> entries;

  bool critical() const {
    for (const auto& e : entries)
      if (e.status == "CRITICAL") return true;
    return false;
  }
};

inline CrossValidationReport cross_validate(
    const SystemStructure& sys, const DataSet& data,
    const std::vector<Property>& properties, int samples, std::uint64_t seed,
    const Tolerances& tol, double magnitude = 10.0) {
  const Reduction red = build_reduction(sys, data, tol);
  if (!consistency_check(red, tol))
    throw inconsistent_data_error(
        "cross_validate: data are not consistent with the given structure");
  const CompatibleFamily fam = parametrize(red, tol);

  CrossValidationReport report;
  for (Property prop : properties) {
    PropertyReport rep;
    rep.prop = prop;
    const Verdict v = prop == Property::LeftInvertibility
                          ? geometric_test(sys, data, prop, tol)
                          : informativity_test(sys, data, prop, tol, seed);
    rep.verdict = v.informative;

    switch (v.informative) {
      case Outcome::Informative: {
        const std::uint64_t prop_seed =
            seed + 0x9e3779b9u * (static_cast<std::uint64_t>(prop) + 1);
        const auto members = sample(fam, samples, magnitude, prop_seed);
        for (const Matrix& A : members) {
          ++rep.samples_checked;
          if (model_check(A, sys, prop, tol, seed) == Tristate::False)
            ++rep.disagreements;
        }
        rep.status = rep.disagreements == 0 ? "ok" : "CRITICAL";
        break;
      }
      case Outcome::NotInformative: {
        rep.counterexample = construct_counterexample(red, sys, prop, tol,
                                                      seed);
        rep.status = (rep.counterexample && rep.counterexample->verified)
                         ? "ok"
                         : "CRITICAL";
        break;
      }
      case Outcome::Marginal:
        rep.status = "skipped-marginal";
        break;
      case Outcome::Inconclusive:
        rep.status = "skipped-inconclusive";
        break;
    }
    report.entries.push_back(std::move(rep));
  }
  return report;
}

}  // namespace dinf
