#pragma once

// Subspace-iteration machinery: the largest subspace J* of data-coordinate
// space whose image under the reduced maps stays output-nulling, its
// observability counterpart L*, the model-based weakly unobservable subspace,
// and the geometric informativity tests built on them.

#include <utility>

#include "dinf/properties.hpp"

namespace dinf {

namespace detail {

// Largest J in R^r with  F J \subseteq G J x {0} + im H,
// where F = [R; CP] ((l+p) x r), G = QP (l x r), H = [QB; D] ((l+p) x k).
// Decreasing iteration from the full space; fixed point detected by dimension
// stagnation plus a containment re-check.
inline std::pair<Subspace, IterationTrace> largest_inclusion_subspace(
    const Matrix& F, const Matrix& G, const Matrix& H, Index p_rows,
    const Tolerances& tol) {
  const Index r = F.cols();
  const Index l = G.rows();
  Subspace J = Subspace::full(r, tol);
  IterationTrace trace;
  trace.dims.push_back(J.dim());

  for (Index step = 0; step <= r; ++step) {
    // G J x {0} + im H inside R^{l+p}.
    Matrix lifted(l + p_rows, J.dim());
    lifted << G * J.basis(), Matrix::Zero(p_rows, J.dim());
    // G J can cancel to roundoff (e.g. J inside ker G); reference the rank
    // decision against the scale of the maps, not the product.
    const Subspace rhs =
        image_basis(hstack(lifted, H), tol, G.norm() + H.norm());
    Subspace next = inverse_image(F, rhs, tol);
    trace.steps = step + 1;
    trace.dims.push_back(next.dim());
    if (next.dim() == J.dim() && subspace_contains(J, next) &&
        subspace_contains(next, J)) {
      trace.converged = true;
      return {std::move(next), std::move(trace)};
    }
    J = std::move(next);
  }
  // The decreasing chain in R^r must stagnate within r steps.
  return {std::move(J), std::move(trace)};
}

}  // namespace detail

// J*: largest J with [R; CP] J \subseteq QP J x {0} + im [QB; D].
inline std::pair<Subspace, IterationTrace> jstar(const ReducedTriple& t,
                                                 const SystemStructure& sys,
                                                 const Tolerances& tol) {
  const Matrix F = vstack(t.R, sys.C * t.P);
  const Matrix G = t.Q * t.P;
  const Matrix H = vstack(t.Q * sys.B, sys.D);
  return detail::largest_inclusion_subspace(F, G, H, sys.C.rows(), tol);
}

inline std::pair<Subspace, IterationTrace> jstar(const Reduction& red,
                                                 const SystemStructure& sys,
                                                 const Tolerances& tol) {
  return jstar(triple_of(red), sys, tol);
}

// L*: largest L with R L \subseteq QP L and CP L = {0}; the J* iteration with
// B and D zeroed.
inline std::pair<Subspace, IterationTrace> lstar(const ReducedTriple& t,
                                                 const SystemStructure& sys,
                                                 const Tolerances& tol) {
  const Matrix F = vstack(t.R, sys.C * t.P);
  const Matrix G = t.Q * t.P;
  const Matrix H = Matrix::Zero(F.rows(), 0);
  return detail::largest_inclusion_subspace(F, G, H, sys.C.rows(), tol);
}

inline std::pair<Subspace, IterationTrace> lstar(const Reduction& red,
                                                 const SystemStructure& sys,
                                                 const Tolerances& tol) {
  return lstar(triple_of(red), sys, tol);
}

// Largest output-nulling controlled invariant subspace V(A, B, C, D).
inline Subspace weakly_unobservable(const Matrix& A, const Matrix& B,
                                    const Matrix& C, const Matrix& D,
                                    const Tolerances& tol) {
  const Matrix F = vstack(A, C);
  const Matrix H = vstack(B, D);
  const Matrix G = Matrix::Identity(A.rows(), A.cols());
  return detail::largest_inclusion_subspace(F, G, H, C.rows(), tol).first;
}

// Largest A-invariant subspace contained in ker C.
inline Subspace unobservable_subspace(const Matrix& A, const Matrix& C,
                                      const Tolerances& tol) {
  return weakly_unobservable(A, Matrix::Zero(A.rows(), 0), C,
                             Matrix::Zero(C.rows(), 0), tol);
}

// Geometric informativity tests (strong observability, observability,
// left-invertibility). With P = X_-:
//   strong observability <=> C^{-1} im D \subseteq im X_-  and  J* \subseteq ker X_-
//   observability        <=> ker C \subseteq im X_-        and  L* \subseteq ker X_-
//   left-invertibility   <=> X_- J* \cap B ker D = {0} and [B; D] full column
//                            rank, conclusive only when the precondition holds.
inline Verdict geometric_test(const SystemStructure& sys, const DataSet& data,
                              Property prop, const Tolerances& tol) {
  sys.validate();
  data.validate(sys);
  const Reduction red = build_reduction(sys, data, tol);
  if (!consistency_check(red, tol))
    throw inconsistent_data_error(
        "geometric_test: data are not consistent with the given structure");

  Verdict v;
  const Subspace kerP = kernel_basis(red.P, tol);

  switch (prop) {
    case Property::StrongObservability: {
      v.precondition_holds = precondition(red, sys, prop, tol);
      auto [J, trace] = jstar(red, sys, tol);
      v.trace = trace;
      if (!v.precondition_holds) {
        v.informative = Outcome::NotInformative;
        v.explanation = "precondition C^-1 im D <= im X- fails";
        return v;
      }
      const bool inside = subspace_contains(kerP, J);
      v.informative =
          inside ? Outcome::Informative : Outcome::NotInformative;
      v.explanation = inside ? "J* <= ker X-" : "J* not contained in ker X-";
      return v;
    }
    case Property::Observability: {
      v.precondition_holds = precondition(red, sys, prop, tol);
      auto [L, trace] = lstar(red, sys, tol);
      v.trace = trace;
      if (!v.precondition_holds) {
        v.informative = Outcome::NotInformative;
        v.explanation = "precondition ker C <= im X- fails";
        return v;
      }
      const bool inside = subspace_contains(kerP, L);
      v.informative =
          inside ? Outcome::Informative : Outcome::NotInformative;
      v.explanation = inside ? "L* <= ker X-" : "L* not contained in ker X-";
      return v;
    }
    case Property::LeftInvertibility: {
      Matrix BD = vstack(sys.B, sys.D);
      if (numerical_rank(BD, tol) < sys.m()) {
        v.precondition_holds = precondition(red, sys, prop, tol);
        v.informative = Outcome::NotInformative;
        v.explanation = "[B; D] does not have full column rank";
        return v;
      }
      v.precondition_holds = precondition(red, sys, prop, tol);
      if (!v.precondition_holds) {
        // The precondition is sufficient but not necessary here; without it
        // the geometric test cannot decide either way.
        v.informative = Outcome::Inconclusive;
        v.explanation =
            "precondition C^-1 im D <= im X- fails; geometric test is "
            "inconclusive";
        return v;
      }
      auto [J, trace] = jstar(red, sys, tol);
      v.trace = trace;
      const Subspace PJ = apply_map(red.P, J, tol);
      const Subspace meet = subspace_intersect(PJ, b_times_ker_d(sys, tol));
      const bool ok = meet.dim() == 0;
      v.informative = ok ? Outcome::Informative : Outcome::NotInformative;
      v.explanation = ok ? "X- J* meets B ker D trivially"
                         : "X- J* has nontrivial intersection with B ker D";
      return v;
    }
    default:
      throw std::invalid_argument(
          "geometric_test: only strong observability, observability and "
          "left-invertibility have geometric tests");
  }
}

}  // namespace dinf
