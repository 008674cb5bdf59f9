#pragma once

// Uniform rank tests "rank(N0 - lambda*N1) = target for all lambda in region"
// with witness extraction. Rank-drop points of a singular pencil are found by
// compressing to a square regular pencil with random orthonormal factors and
// solving the generalized eigenvalue problem of the compressed pair; every
// candidate is verified by a direct rank evaluation on the original pencil.

#include <algorithm>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "dinf/linalg.hpp"

namespace dinf {

struct Pencil {
  Matrix N0;
  Matrix N1;

  Pencil(Matrix n0, Matrix n1) : N0(std::move(n0)), N1(std::move(n1)) {
    if (N0.rows() != N1.rows() || N0.cols() != N1.cols())
      throw std::invalid_argument("Pencil: N0 and N1 must have equal shapes");
  }

  ComplexMatrix eval(std::complex<double> lambda) const {
    return N0.cast<std::complex<double>>() -
           lambda * N1.cast<std::complex<double>>();
  }
};

enum class Region { AllComplex, ClosedUnitExterior };

enum class Tristate { False, True, Marginal };

struct RankWitness {
  std::complex<double> lambda;
  Index rank_at;
};

struct RankVerdict {
  Tristate holds = Tristate::True;
  Index normal_rank = 0;
  Index target_rank = 0;
  std::vector<RankWitness> witnesses;
  std::vector<RankWitness> marginal_witnesses;
};

struct numerical_instability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 0x5eed0001u;

inline Index rank_at(const Pencil& p, std::complex<double> lambda,
                     const Tolerances& tol) {
  // Reference scale of the evaluation inputs: at a drop point the evaluated
  // matrix can cancel to pure roundoff, and its own sigma_max must not be
  // mistaken for signal.
  const double ref = p.N0.norm() + std::abs(lambda) * p.N1.norm();
  return numerical_rank(p.eval(lambda), tol, ref);
}

namespace detail {

inline std::complex<double> random_sample_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  const double r = radius(rng);
  const double a = angle(rng);
  return {r * std::cos(a), r * std::sin(a)};
}

inline Matrix random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix G(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) G(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
  return Q;
}

}  // namespace detail

// Maximal rank of N0 - lambda*N1 over lambda, computed as the common rank at
// three independent random sample points; resampled on disagreement.
inline Index normal_rank(const Pencil& p, const Tolerances& tol,
                         std::uint64_t seed = kDefaultSeed) {
  if (p.N0.rows() == 0 || p.N0.cols() == 0) return 0;
  std::mt19937_64 rng(seed);
  for (int round = 0; round < 3; ++round) {
    Index ranks[3];
    for (int k = 0; k < 3; ++k)
      ranks[k] = rank_at(p, detail::random_sample_point(rng), tol);
    if (ranks[0] == ranks[1] && ranks[1] == ranks[2]) return ranks[0];
  }
  throw numerical_instability_error(
      "normal_rank: persistent rank disagreement at random sample points; "
      "consider a larger rank tolerance");
}

// All finite lambda where rank(N0 - lambda*N1) falls below the normal rank.
// Every returned point re-verifies by direct rank evaluation.
inline std::vector<std::complex<double>> rank_drop_points(
    const Pencil& p, const Tolerances& tol,
    std::uint64_t seed = kDefaultSeed) {
  std::vector<std::complex<double>> verified;
  const Index rho = normal_rank(p, tol, seed);
  if (rho == 0) return verified;

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  for (int trial = 0; trial < 2; ++trial) {
    const Matrix WL = detail::random_orthonormal(p.N0.rows(), rho, rng);
    const Matrix WR = detail::random_orthonormal(p.N0.cols(), rho, rng);
    const Matrix C0 = WL.transpose() * p.N0 * WR;
    const Matrix C1 = WL.transpose() * p.N1 * WR;
    Eigen::GeneralizedEigenSolver<Matrix> ges;
    ges.compute(C0, C1, /*computeEigenvectors=*/false);
    if (ges.info() != Eigen::Success) continue;
    for (Index i = 0; i < rho; ++i) {
      const std::complex<double> alpha = ges.alphas()(i);
      const double beta = ges.betas()(i);
      // Infinite or ill-conditioned eigenvalues never affect finite lambda.
      if (std::abs(beta) <= 1e-10 * (std::abs(alpha) + std::abs(beta)))
        continue;
      const std::complex<double> lambda = alpha / beta;
      if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
        continue;
      if (std::abs(lambda) > 1e8) continue;
      if (rank_at(p, lambda, tol) >= rho) continue;
      // Defective infinite eigenvalues scatter into rings of large finite
      // candidates where the relative rank threshold is no longer reliable;
      // a genuine isolated drop point recovers full rank away from itself.
      if (std::abs(lambda) > 100.0 && rank_at(p, 2.0 * lambda, tol) < rho)
        continue;
      verified.push_back(lambda);
    }
  }

  // A defective finite eigenvalue likewise scatters into a blob of verified
  // points (radius ~ rank_rtol^{1/k}); cluster and report the centroid.
  std::sort(verified.begin(), verified.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              if (a.real() != b.real()) return a.real() < b.real();
              return a.imag() < b.imag();
            });
  std::vector<std::vector<std::complex<double>>> clusters;
  for (const auto& z : verified) {
    bool placed = false;
    for (auto& cluster : clusters) {
      std::complex<double> centroid{0.0, 0.0};
      for (const auto& u : cluster) centroid += u;
      centroid /= static_cast<double>(cluster.size());
      if (std::abs(z - centroid) <= 2e-4 * (1.0 + std::abs(z))) {
        cluster.push_back(z);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({z});
  }
  std::vector<std::complex<double>> out;
  for (const auto& cluster : clusters) {
    std::complex<double> centroid{0.0, 0.0};
    for (const auto& u : cluster) centroid += u;
    centroid /= static_cast<double>(cluster.size());
    if (cluster.size() == 1 || rank_at(p, centroid, tol) < rho)
      out.push_back(centroid);
    else
      out.insert(out.end(), cluster.begin(), cluster.end());
  }
  return out;
}

// Decide whether rank(N0 - lambda*N1) >= target for all lambda in the region.
// Drop points numerically on the unit circle under ClosedUnitExterior yield a
// marginal verdict instead of a boolean.
inline RankVerdict uniform_rank_test(const Pencil& p, Index target,
                                     Region region, const Tolerances& tol,
                                     std::uint64_t seed = kDefaultSeed) {
  RankVerdict v;
  v.target_rank = target;
  if (target == 0) {
    v.normal_rank = (p.N0.rows() == 0 || p.N0.cols() == 0)
                        ? 0
                        : normal_rank(p, tol, seed);
    v.holds = Tristate::True;
    return v;
  }
  if (p.N0.rows() == 0 || p.N0.cols() == 0) {
    v.normal_rank = 0;
    v.holds = Tristate::False;
    v.witnesses.push_back({std::complex<double>(2.0, 0.0), 0});
    return v;
  }
  v.normal_rank = normal_rank(p, tol, seed);

  if (v.normal_rank < target) {
    // Rank is below target generically; any region point works as a witness.
    std::mt19937_64 rng(seed ^ 0x7acc5eedull);
    for (int attempt = 0; attempt < 16; ++attempt) {
      std::complex<double> lambda = detail::random_sample_point(rng);
      if (region == Region::ClosedUnitExterior)
        lambda *= 2.0 / std::max(0.25, std::abs(lambda));
      const Index r = rank_at(p, lambda, tol);
      if (r < target) {
        v.witnesses.push_back({lambda, r});
        break;
      }
    }
    v.holds = Tristate::False;
    return v;
  }

  for (const auto& lambda : rank_drop_points(p, tol, seed)) {
    const Index r = rank_at(p, lambda, tol);
    if (r >= target) continue;
    if (region == Region::AllComplex) {
      v.witnesses.push_back({lambda, r});
      continue;
    }
    const double dist = std::abs(std::abs(lambda) - 1.0);
    if (dist <= tol.boundary_delta)
      v.marginal_witnesses.push_back({lambda, r});
    else if (std::abs(lambda) > 1.0)
      v.witnesses.push_back({lambda, r});
  }

  if (!v.witnesses.empty())
    v.holds = Tristate::False;
  else if (!v.marginal_witnesses.empty())
    v.holds = Tristate::Marginal;
  else
    v.holds = Tristate::True;
  return v;
}

}  // namespace dinf
