#pragma once

// Problem-file I/O. A problem file is a JSON object with keys
// "B","C","D","E","F" (row-major arrays of arrays), "U" (m x T),
// "X" (n x (T+1)), "Y" (p x T) and an optional "tolerances" object. A matrix
// may alternatively be given as {"csv": "path"} relative to the problem file.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dinf/problem.hpp"

namespace dinf {

using json = nlohmann::json;

struct Problem {
  SystemStructure sys;
  DataSet data;
  Tolerances tol;
};

namespace io_detail {

inline Matrix matrix_from_csv(const std::filesystem::path& path,
                              const std::string& key) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("matrix '" + key + "': cannot open csv file " +
                                path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("matrix '" + key +
                                  "': ragged csv rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::invalid_argument("matrix '" + key + "': empty csv file");
  Matrix M(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  return M;
}

inline Matrix matrix_from_json(const json& j, const std::string& key,
                               const std::filesystem::path& base_dir) {
  if (j.is_object() && j.contains("csv"))
    return matrix_from_csv(base_dir / j.at("csv").get<std::string>(), key);
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw std::invalid_argument("matrix '" + key +
                                "' must be a non-empty array of arrays");
  const size_t cols = j.front().size();
  Matrix M(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || row.size() != cols)
      throw std::invalid_argument("matrix '" + key + "': ragged row " +
                                  std::to_string(i));
    for (size_t c = 0; c < cols; ++c) {
      if (!row.at(c).is_number())
        throw std::invalid_argument("matrix '" + key + "': entry (" +
                                    std::to_string(i) + "," +
                                    std::to_string(c) + ") is not a number");
      M(i, c) = row.at(c).get<double>();
    }
  }
  if (!M.allFinite())
    throw std::invalid_argument("matrix '" + key +
                                "' has non-finite entries");
  return M;
}

inline json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Tolerances tolerances_from_json(const json& j) {
  Tolerances tol;
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    if (t.contains("rank_rtol")) tol.rank_rtol = t.at("rank_rtol");
    if (t.contains("boundary_delta"))
      tol.boundary_delta = t.at("boundary_delta");
    if (t.contains("containment_atol"))
      tol.containment_atol = t.at("containment_atol");
  }
  tol.validate();
  return tol;
}

}  // namespace io_detail

inline Problem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open problem file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("problem file " + path.string() +
                                " is not valid JSON: " + e.what());
  }
  const auto base = path.parent_path();
  for (const char* key : {"B", "C", "D", "E", "F", "U", "X", "Y"})
    if (!j.contains(key))
      throw std::invalid_argument("problem file is missing key '" +
                                  std::string(key) + "'");
  Problem prob;
  prob.sys.B = io_detail::matrix_from_json(j.at("B"), "B", base);
  prob.sys.C = io_detail::matrix_from_json(j.at("C"), "C", base);
  prob.sys.D = io_detail::matrix_from_json(j.at("D"), "D", base);
  prob.sys.E = io_detail::matrix_from_json(j.at("E"), "E", base);
  prob.sys.F = io_detail::matrix_from_json(j.at("F"), "F", base);
  prob.data.U_minus = io_detail::matrix_from_json(j.at("U"), "U", base);
  prob.data.X = io_detail::matrix_from_json(j.at("X"), "X", base);
  prob.data.Y_minus = io_detail::matrix_from_json(j.at("Y"), "Y", base);
  prob.tol = io_detail::tolerances_from_json(j);
  prob.sys.validate();
  prob.data.validate(prob.sys);
  return prob;
}

inline void save_problem(const Problem& prob,
                         const std::filesystem::path& path) {
  json j;
  j["B"] = io_detail::matrix_to_json(prob.sys.B);
  j["C"] = io_detail::matrix_to_json(prob.sys.C);
  j["D"] = io_detail::matrix_to_json(prob.sys.D);
  j["E"] = io_detail::matrix_to_json(prob.sys.E);
  j["F"] = io_detail::matrix_to_json(prob.sys.F);
  j["U"] = io_detail::matrix_to_json(prob.data.U_minus);
  j["X"] = io_detail::matrix_to_json(prob.data.X);
  j["Y"] = io_detail::matrix_to_json(prob.data.Y_minus);
  std::ofstream out(path);
  if (!out)
    throw std::invalid_argument("cannot write problem file " + path.string());
  out << j.dump(2) << "\n";
}

// A true system for simulation: a full (A, B, C, D, E, F) plus optional
// scripted initial state, input and noise.
struct TrueSystem {
  Matrix A;
  SystemStructure sys;
  std::optional<Vector> x0;
  std::optional<Matrix> U;
  std::optional<Matrix> W;
};

inline TrueSystem load_true_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open system file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("system file " + path.string() +
                                " is not valid JSON: " + e.what());
  }
  const auto base = path.parent_path();
  for (const char* key : {"A", "B", "C", "D", "E", "F"})
    if (!j.contains(key))
      throw std::invalid_argument("system file is missing key '" +
                                  std::string(key) + "'");
  TrueSystem ts;
  ts.A = io_detail::matrix_from_json(j.at("A"), "A", base);
  ts.sys.B = io_detail::matrix_from_json(j.at("B"), "B", base);
  ts.sys.C = io_detail::matrix_from_json(j.at("C"), "C", base);
  ts.sys.D = io_detail::matrix_from_json(j.at("D"), "D", base);
  ts.sys.E = io_detail::matrix_from_json(j.at("E"), "E", base);
  ts.sys.F = io_detail::matrix_from_json(j.at("F"), "F", base);
  ts.sys.validate();
  if (ts.A.rows() != ts.sys.n() || ts.A.cols() != ts.sys.n())
    throw std::invalid_argument("system file: A must be n x n");
  if (j.contains("x0")) {
    const Matrix M = io_detail::matrix_from_json(j.at("x0"), "x0", base);
    ts.x0 = M.reshaped();
  }
  if (j.contains("U")) ts.U = io_detail::matrix_from_json(j.at("U"), "U", base);
  if (j.contains("W")) ts.W = io_detail::matrix_from_json(j.at("W"), "W", base);
  return ts;
}

// Simulate the true system over a horizon and return a problem (A stripped).
// Scripted x0/U/W take precedence; anything unscripted is drawn uniformly
// from [-magnitude, magnitude].
inline Problem simulate(const TrueSystem& ts, Index T, std::uint64_t seed,
                        double magnitude = 1.0) {
  if (T < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
  const Index n = ts.sys.n();
  const Index m = ts.sys.m();
  const Index p = ts.sys.p();
  const Index rw = ts.sys.rw();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-magnitude, magnitude);

  Vector x0 = ts.x0 ? *ts.x0 : Vector::NullaryExpr(n, [&](Index) {
    return unif(rng);
  });
  if (x0.size() != n)
    throw std::invalid_argument("simulate: x0 must have n entries");
  Matrix U = ts.U ? *ts.U : Matrix::NullaryExpr(m, T, [&](Index, Index) {
    return unif(rng);
  });
  if (U.rows() != m || U.cols() != T)
    throw std::invalid_argument("simulate: U must be m x T");
  Matrix W = ts.W ? *ts.W : Matrix::NullaryExpr(rw, T, [&](Index, Index) {
    return unif(rng);
  });
  if (W.rows() != rw || W.cols() != T)
    throw std::invalid_argument("simulate: W must be r_w x T");

  Problem prob;
  prob.sys = ts.sys;
  prob.data.U_minus = U;
  prob.data.X.resize(n, T + 1);
  prob.data.Y_minus.resize(p, T);
  prob.data.X.col(0) = x0;
  for (Index t = 0; t < T; ++t) {
    prob.data.X.col(t + 1) = ts.A * prob.data.X.col(t) + ts.sys.B * U.col(t) +
                             ts.sys.E * W.col(t);
    prob.data.Y_minus.col(t) =
        ts.sys.C * prob.data.X.col(t) + ts.sys.D * U.col(t) + ts.sys.F * W.col(t);
  }
  return prob;
}

}  // namespace dinf
