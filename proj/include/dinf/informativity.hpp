#pragma once

// Top-level informativity tests: precondition plus uniform pencil rank test,
// with left-invertibility delegated to the geometric module.

#include <sstream>

#include "dinf/geometric.hpp"
#include "dinf/properties.hpp"

namespace dinf {

namespace detail {

inline std::string describe_rank_failure(const RankVerdict& rv) {
  std::ostringstream os;
  os << "rank condition fails: normal rank " << rv.normal_rank << ", target "
     << rv.target_rank;
  if (!rv.witnesses.empty()) {
    const auto& w = rv.witnesses.front();
    os << "; witness lambda = " << w.lambda.real();
    if (w.lambda.imag() != 0.0) os << " + " << w.lambda.imag() << "i";
    os << " (rank " << w.rank_at << ")";
  }
  return os.str();
}

}  // namespace detail

inline Verdict informativity_test(const SystemStructure& sys,
                                  const DataSet& data, Property prop,
                                  const Tolerances& tol,
                                  std::uint64_t seed = kDefaultSeed) {
  sys.validate();
  data.validate(sys);
  if (prop == Property::LeftInvertibility)
    return geometric_test(sys, data, prop, tol);

  const Reduction red = build_reduction(sys, data, tol);
  if (!consistency_check(red, tol))
    throw inconsistent_data_error(
        "informativity_test: data are not consistent with the given "
        "structure (the compatible family is empty)");

  Verdict v;
  v.precondition_holds = precondition(red, sys, prop, tol);
  const PropertyPencil pp = build_property_pencil(red, sys, prop, tol);
  v.rank = uniform_rank_test(pp.pencil, pp.target, pp.region, tol, seed);

  if (!v.precondition_holds) {
    v.informative = Outcome::NotInformative;
    v.explanation = is_controllability_family(prop)
                        ? (is_strong(prop)
                               ? "precondition ker M <= B ker D fails"
                               : "precondition ker M <= im B fails")
                        : (is_strong(prop)
                               ? "precondition C^-1 im D <= im X- fails"
                               : "precondition ker C <= im X- fails");
    return v;
  }
  switch (v.rank->holds) {
    case Tristate::True:
      v.informative = Outcome::Informative;
      v.explanation = "precondition and uniform rank condition hold";
      break;
    case Tristate::Marginal:
      v.informative = Outcome::Marginal;
      v.explanation =
          "rank drop numerically on the unit circle; boundary membership "
          "cannot be certified";
      break;
    case Tristate::False:
      v.informative = Outcome::NotInformative;
      v.explanation = detail::describe_rank_failure(*v.rank);
      break;
  }
  return v;
}

}  // namespace dinf
