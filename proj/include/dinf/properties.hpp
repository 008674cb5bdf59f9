#pragma once

// The informativity tests as a property-parameterized combination of a
// subspace precondition and a uniform pencil rank test. Triple-level
// constructions work on any reduced triple (P, Q, R); the data-level entry
// points specialize to P = X_-, Q = M.

#include <optional>
#include <stdexcept>
#include <string>

#include "dinf/pencil.hpp"
#include "dinf/problem.hpp"

namespace dinf {

enum class Property {
  StrongObservability,
  StrongDetectability,
  Observability,
  Detectability,
  StrongControllability,
  StrongStabilizability,
  Controllability,
  Stabilizability,
  LeftInvertibility,
};

inline const char* to_string(Property prop) {
  switch (prop) {
    case Property::StrongObservability: return "strong-observability";
    case Property::StrongDetectability: return "strong-detectability";
    case Property::Observability: return "observability";
    case Property::Detectability: return "detectability";
    case Property::StrongControllability: return "strong-controllability";
    case Property::StrongStabilizability: return "strong-stabilizability";
    case Property::Controllability: return "controllability";
    case Property::Stabilizability: return "stabilizability";
    case Property::LeftInvertibility: return "left-invertibility";
  }
  return "?";
}

inline std::optional<Property> property_from_string(const std::string& s) {
  for (Property prop :
       {Property::StrongObservability, Property::StrongDetectability,
        Property::Observability, Property::Detectability,
        Property::StrongControllability, Property::StrongStabilizability,
        Property::Controllability, Property::Stabilizability,
        Property::LeftInvertibility}) {
    if (s == to_string(prop)) return prop;
  }
  return std::nullopt;
}

inline bool is_controllability_family(Property prop) {
  switch (prop) {
    case Property::StrongControllability:
    case Property::StrongStabilizability:
    case Property::Controllability:
    case Property::Stabilizability:
      return true;
    default:
      return false;
  }
}

inline bool is_strong(Property prop) {
  switch (prop) {
    case Property::StrongObservability:
    case Property::StrongDetectability:
    case Property::StrongControllability:
    case Property::StrongStabilizability:
      return true;
    default:
      return false;
  }
}

// Detectability/stabilizability variants quantify over |lambda| >= 1 only.
inline Region region_of(Property prop) {
  switch (prop) {
    case Property::StrongDetectability:
    case Property::Detectability:
    case Property::StrongStabilizability:
    case Property::Stabilizability:
      return Region::ClosedUnitExterior;
    default:
      return Region::AllComplex;
  }
}

enum class Outcome { NotInformative, Informative, Marginal, Inconclusive };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::NotInformative: return "not-informative";
    case Outcome::Informative: return "informative";
    case Outcome::Marginal: return "marginal";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct IterationTrace {
  std::vector<Index> dims;
  Index steps = 0;
  bool converged = false;
};

struct Verdict {
  Outcome informative = Outcome::NotInformative;
  bool precondition_holds = false;
  std::optional<RankVerdict> rank;
  std::optional<IterationTrace> trace;
  std::string explanation;
};

struct inconsistent_data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- triple-level constructions --------------------------------------------

struct ReducedTriple {
  Matrix P;  // n x r
  Matrix Q;  // l x n
  Matrix R;  // l x r
};

inline ReducedTriple triple_of(const Reduction& red) {
  return ReducedTriple{red.P, red.Q, red.R};
}

inline Subspace b_times_ker_d(const SystemStructure& sys,
                              const Tolerances& tol) {
  return image_basis(sys.B * kernel_basis(sys.D, tol).basis(), tol,
                     sys.B.norm());
}

// Subspace precondition of the uniform rank theorems, on a general triple.
inline bool triple_precondition(const ReducedTriple& t,
                                const SystemStructure& sys, Property prop,
                                const Tolerances& tol) {
  switch (prop) {
    case Property::StrongObservability:
    case Property::StrongDetectability:
    case Property::LeftInvertibility:
      return subspace_contains(
          image_basis(t.P, tol),
          inverse_image(sys.C, image_basis(sys.D, tol), tol));
    case Property::Observability:
    case Property::Detectability:
      return subspace_contains(image_basis(t.P, tol),
                               kernel_basis(sys.C, tol));
    case Property::StrongControllability:
    case Property::StrongStabilizability:
      // Exact dual of C^{-1} im D \subseteq im P.
      return subspace_contains(b_times_ker_d(sys, tol),
                               kernel_basis(t.Q, tol));
    case Property::Controllability:
    case Property::Stabilizability:
      return subspace_contains(image_basis(sys.B, tol),
                               kernel_basis(t.Q, tol));
  }
  throw std::logic_error("triple_precondition: unreachable");
}

struct PropertyPencil {
  Pencil pencil;
  Index target;
  Region region;
};

inline PropertyPencil build_triple_pencil(const ReducedTriple& t,
                                          const SystemStructure& sys,
                                          Property prop,
                                          const Tolerances& tol) {
  const Matrix QP = t.Q * t.P;
  const Matrix QB = t.Q * sys.B;
  const Matrix CP = sys.C * t.P;
  const Region region = region_of(prop);
  const Matrix Zl = Matrix::Zero(t.Q.rows(), sys.B.cols());
  const Matrix Zp = Matrix::Zero(sys.C.rows(), t.P.cols());
  const Matrix Zpm = Matrix::Zero(sys.C.rows(), sys.B.cols());

  switch (prop) {
    case Property::StrongObservability:
    case Property::StrongDetectability: {
      Pencil p(vstack(hstack(t.R, QB), hstack(CP, sys.D)),
               vstack(hstack(QP, Zl), hstack(Zp, Zpm)));
      const Index target =
          numerical_rank(t.P, tol) + numerical_rank(vstack(QB, sys.D), tol);
      return {std::move(p), target, region};
    }
    case Property::Observability:
    case Property::Detectability: {
      Pencil p(vstack(t.R, CP), vstack(QP, Zp));
      return {std::move(p), numerical_rank(t.P, tol), region};
    }
    case Property::StrongControllability:
    case Property::StrongStabilizability: {
      Pencil p(vstack(hstack(t.R, QB), hstack(CP, sys.D)),
               vstack(hstack(QP, Zl), hstack(Zp, Zpm)));
      const Index target =
          numerical_rank(t.Q, tol) + numerical_rank(hstack(CP, sys.D), tol);
      return {std::move(p), target, region};
    }
    case Property::Controllability:
    case Property::Stabilizability: {
      Pencil p(hstack(t.R, QB), hstack(QP, Zl));
      return {std::move(p), numerical_rank(t.Q, tol), region};
    }
    case Property::LeftInvertibility:
      break;
  }
  throw std::invalid_argument(
      "build_triple_pencil: left-invertibility has no pencil test; use the "
      "geometric module");
}

// ---- data-level constructions ----------------------------------------------

inline bool precondition(const Reduction& red, const SystemStructure& sys,
                         Property prop, const Tolerances& tol) {
  return triple_precondition(triple_of(red), sys, prop, tol);
}

inline PropertyPencil build_property_pencil(const Reduction& red,
                                            const SystemStructure& sys,
                                            Property prop,
                                            const Tolerances& tol) {
  const bool ctrb_plain =
      prop == Property::Controllability || prop == Property::Stabilizability;

  // Simplified controllability pencils for the structured noise patterns.
  if (ctrb_plain && red.pattern == NoisePattern::Noiseless) {
    const Index n = sys.n();
    Pencil p(hstack(red.X_plus, sys.B),
             hstack(red.P, Matrix::Zero(n, sys.m())));
    return {std::move(p), n, region_of(prop)};
  }
  if (ctrb_plain && red.pattern == NoisePattern::ProcessOnly) {
    Pencil p(hstack(red.Q * red.X_plus, red.Q * sys.B),
             hstack(red.Q * red.P, Matrix::Zero(red.Q.rows(), sys.m())));
    return {std::move(p), numerical_rank(red.Q, tol), region_of(prop)};
  }
  return build_triple_pencil(triple_of(red), sys, prop, tol);
}

}  // namespace dinf
