// Command-line front end: check informativity properties of a problem file,
// cross-validate verdicts against the sampling oracle, or simulate data from
// a true system.
//
// Exit codes: 0 clean run, 2 input error, 3 inconsistent data,
// 4 critical oracle disagreement.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dinf/dinf.hpp"

namespace {

using dinf::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInconsistent = 3;
constexpr int kExitCritical = 4;

const std::vector<dinf::Property> kAllProperties = {
    dinf::Property::StrongObservability, dinf::Property::StrongDetectability,
    dinf::Property::Observability,       dinf::Property::Detectability,
    dinf::Property::StrongControllability,
    dinf::Property::StrongStabilizability,
    dinf::Property::Controllability,     dinf::Property::Stabilizability,
    dinf::Property::LeftInvertibility};

const std::vector<dinf::Property> kGeometricProperties = {
    dinf::Property::StrongObservability, dinf::Property::Observability,
    dinf::Property::LeftInvertibility};

std::vector<dinf::Property> parse_properties(const std::string& csv,
                                             const std::string& method) {
  if (csv == "all")
    return method == "geometric" ? kGeometricProperties : kAllProperties;
  std::vector<dinf::Property> props;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto prop = dinf::property_from_string(item);
    if (!prop)
      throw std::invalid_argument("unknown property '" + item + "'");
    props.push_back(*prop);
  }
  if (props.empty()) throw std::invalid_argument("no properties selected");
  return props;
}

json complex_to_json(std::complex<double> z) {
  return json{{"re", z.real()}, {"im", z.imag()}};
}

json rank_verdict_to_json(const dinf::RankVerdict& rv) {
  json j;
  j["normal_rank"] = rv.normal_rank;
  j["target_rank"] = rv.target_rank;
  json wits = json::array();
  for (const auto& w : rv.witnesses) {
    json wj = complex_to_json(w.lambda);
    wj["rank_at"] = w.rank_at;
    wits.push_back(std::move(wj));
  }
  j["witnesses"] = std::move(wits);
  json marg = json::array();
  for (const auto& w : rv.marginal_witnesses) {
    json wj = complex_to_json(w.lambda);
    wj["rank_at"] = w.rank_at;
    marg.push_back(std::move(wj));
  }
  j["marginal_witnesses"] = std::move(marg);
  return j;
}

json verdict_to_json(const dinf::Verdict& v, double seconds) {
  json j;
  j["verdict"] = dinf::to_string(v.informative);
  j["precondition_holds"] = v.precondition_holds;
  j["explanation"] = v.explanation;
  if (v.rank) j["rank"] = rank_verdict_to_json(*v.rank);
  if (v.trace) {
    j["iteration_dims"] = v.trace->dims;
    j["iteration_steps"] = v.trace->steps;
  }
  j["seconds"] = seconds;
  return j;
}

void apply_tolerance_overrides(dinf::Tolerances& tol, double rank_rtol,
                               double boundary_delta) {
  if (rank_rtol > 0) tol.rank_rtol = rank_rtol;
  if (boundary_delta > 0) tol.boundary_delta = boundary_delta;
  tol.validate();
}

void emit(const json& report, const std::string& format,
          const std::string& output) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw std::invalid_argument("cannot write to " + output);
    os = &file;
  }
  if (format == "json") {
    *os << report.dump(2) << "\n";
    return;
  }
  // Plain-text rendering.
  for (const auto& [prop, entry] : report.at("properties").items()) {
    *os << prop << ": ";
    if (entry.contains("pencil") || entry.contains("geometric")) {
      if (entry.contains("pencil"))
        *os << "pencil=" << entry.at("pencil").at("verdict").get<std::string>()
            << " ";
      if (entry.contains("geometric"))
        *os << "geometric="
            << entry.at("geometric").at("verdict").get<std::string>();
      *os << "\n";
    } else {
      *os << entry.at("verdict").get<std::string>() << " ("
          << entry.at("explanation").get<std::string>() << ")\n";
    }
  }
}

int run_check(const std::string& problem_path, const std::string& props_csv,
              const std::string& method, double rank_rtol,
              double boundary_delta, std::uint64_t seed,
              const std::string& format, const std::string& output) {
  dinf::Problem prob = dinf::load_problem(problem_path);
  apply_tolerance_overrides(prob.tol, rank_rtol, boundary_delta);
  const auto props = parse_properties(props_csv, method);

  json report;
  report["schema_version"] = 1;
  report["problem"] = problem_path;
  report["method"] = method;
  json pj = json::object();
  for (dinf::Property prop : props) {
    json entry = json::object();
    const bool geometric_capable =
        prop == dinf::Property::StrongObservability ||
        prop == dinf::Property::Observability ||
        prop == dinf::Property::LeftInvertibility;
    if (method == "geometric" && !geometric_capable)
      throw std::invalid_argument(
          std::string("property '") + dinf::to_string(prop) +
          "' has no geometric test; use method pencil or both");
    if (method == "pencil" || method == "both") {
      const auto t0 = std::chrono::steady_clock::now();
      const dinf::Verdict v =
          dinf::informativity_test(prob.sys, prob.data, prop, prob.tol, seed);
      const double dt =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (method == "pencil")
        entry = verdict_to_json(v, dt);
      else
        entry["pencil"] = verdict_to_json(v, dt);
    }
    if ((method == "geometric" || method == "both") && geometric_capable) {
      const auto t0 = std::chrono::steady_clock::now();
      const dinf::Verdict v =
          dinf::geometric_test(prob.sys, prob.data, prop, prob.tol);
      const double dt =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      if (method == "geometric")
        entry = verdict_to_json(v, dt);
      else
        entry["geometric"] = verdict_to_json(v, dt);
    }
    pj[dinf::to_string(prop)] = std::move(entry);
  }
  report["properties"] = std::move(pj);
  emit(report, format, output);
  return kExitOk;
}

int run_validate(const std::string& problem_path, const std::string& props_csv,
                 int samples, double magnitude, double rank_rtol,
                 double boundary_delta, std::uint64_t seed,
                 const std::string& format, const std::string& output) {
  dinf::Problem prob = dinf::load_problem(problem_path);
  apply_tolerance_overrides(prob.tol, rank_rtol, boundary_delta);
  const auto props = parse_properties(props_csv, "pencil");

  const dinf::CrossValidationReport rep = dinf::cross_validate(
      prob.sys, prob.data, props, samples, seed, prob.tol, magnitude);

  json report;
  report["schema_version"] = 1;
  report["problem"] = problem_path;
  report["samples"] = samples;
  json pj = json::object();
  for (const auto& e : rep.entries) {
    json entry;
    entry["verdict"] = dinf::to_string(e.verdict);
    entry["status"] = e.status;
    entry["samples_checked"] = e.samples_checked;
    entry["disagreements"] = e.disagreements;
    entry["explanation"] = e.status;
    if (e.counterexample) {
      json cj;
      cj["A"] = dinf::io_detail::matrix_to_json(e.counterexample->A_bad);
      cj["verified"] = e.counterexample->verified;
      cj["from_search"] = e.counterexample->from_search;
      if (e.counterexample->lambda)
        cj["lambda"] = complex_to_json(*e.counterexample->lambda);
      entry["counterexample"] = std::move(cj);
    }
    pj[dinf::to_string(e.prop)] = std::move(entry);
  }
  report["properties"] = std::move(pj);
  report["critical"] = rep.critical();
  emit(report, format, output);
  return rep.critical() ? kExitCritical : kExitOk;
}

int run_simulate(const std::string& system_path, int horizon,
                 double magnitude, std::uint64_t seed,
                 const std::string& output) {
  const dinf::TrueSystem ts = dinf::load_true_system(system_path);
  const dinf::Problem prob = dinf::simulate(ts, horizon, seed, magnitude);
  if (output.empty()) throw std::invalid_argument("--output is required");
  dinf::save_problem(prob, output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data informativity analysis for structural system properties"};
  app.require_subcommand(1);

  std::string problem_path, props_csv = "all", method = "pencil";
  std::string format = "text", output;
  double rank_rtol = -1, boundary_delta = -1, magnitude = 10.0;
  std::uint64_t seed = dinf::kDefaultSeed;
  int samples = 500;
  int horizon = 8;
  std::string system_path;

  auto* check = app.add_subcommand("check", "run informativity tests");
  check->add_option("--problem", problem_path, "problem file (JSON)")
      ->required();
  check->add_option("--properties", props_csv, "CSV of properties or 'all'");
  check->add_option("--method", method, "pencil|geometric|both")
      ->check(CLI::IsMember({"pencil", "geometric", "both"}));
  check->add_option("--rank-rtol", rank_rtol, "rank tolerance override");
  check->add_option("--boundary-delta", boundary_delta,
                    "unit-circle band override");
  check->add_option("--seed", seed, "random seed");
  check->add_option("--format", format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));
  check->add_option("--output", output, "write report to file");

  auto* validate =
      app.add_subcommand("validate", "cross-validate verdicts with the oracle");
  validate->add_option("--problem", problem_path, "problem file (JSON)")
      ->required();
  validate->add_option("--properties", props_csv,
                       "CSV of properties or 'all'");
  validate->add_option("--samples", samples, "oracle sample count");
  validate->add_option("--magnitude", magnitude, "sample magnitude");
  validate->add_option("--rank-rtol", rank_rtol, "rank tolerance override");
  validate->add_option("--boundary-delta", boundary_delta,
                       "unit-circle band override");
  validate->add_option("--seed", seed, "random seed");
  validate->add_option("--format", format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));
  validate->add_option("--output", output, "write report to file");

  auto* simulate =
      app.add_subcommand("simulate", "simulate data from a true system file");
  simulate->add_option("--system", system_path, "true system file (JSON)")
      ->required();
  simulate->add_option("--horizon", horizon, "number of samples T");
  simulate->add_option("--magnitude", magnitude,
                       "range of random x0/input/noise");
  simulate->add_option("--seed", seed, "random seed");
  simulate->add_option("--output", output, "problem file to write")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed())
      return run_check(problem_path, props_csv, method, rank_rtol,
                       boundary_delta, seed, format, output);
    if (validate->parsed())
      return run_validate(problem_path, props_csv, samples, magnitude,
                          rank_rtol, boundary_delta, seed, format, output);
    return run_simulate(system_path, horizon, magnitude, seed, output);
  } catch (const dinf::inconsistent_data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInconsistent;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
