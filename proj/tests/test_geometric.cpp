#include <cstdlib>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "dinf/geometric.hpp"
#include "dinf/io.hpp"

namespace {

using dinf::Index;
using dinf::Matrix;
using dinf::Outcome;
using dinf::Property;
using dinf::Subspace;
using dinf::Tolerances;

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Matrix M(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) M(i, j++) = v;
    ++i;
  }
  return M;
}

std::string data_path(const std::string& name) {
  const char* dir = std::getenv("DINF_DATA_DIR");
  EXPECT_NE(dir, nullptr);
  return std::string(dir) + "/" + name;
}

dinf::Problem load(const std::string& name) {
  return dinf::load_problem(data_path(name));
}

Matrix shift_matrix(Index n) {
  Matrix A = Matrix::Zero(n, n);
  A.topRightCorner(n - 1, n - 1).setIdentity();
  return A;
}

TEST(WeaklyUnobservable, ObservablePairIsTrivial) {
  // Shift register observed at the top is observable: V = {0}.
  const Matrix A = shift_matrix(4);
  const Matrix C = from_rows({{1, 0, 0, 0}});
  const Subspace V = dinf::unobservable_subspace(A, C, Tolerances{});
  EXPECT_EQ(V.dim(), 0);
}

TEST(WeaklyUnobservable, UnobservableModeSpansKernel) {
  // Diagonal system, only the second state is measured: the unobservable
  // subspace is span{e1}.
  const Matrix A = from_rows({{0.5, 0}, {0, 3}});
  const Matrix C = from_rows({{0, 1}});
  const Subspace V = dinf::unobservable_subspace(A, C, Tolerances{});
  ASSERT_EQ(V.dim(), 1);
  EXPECT_NEAR(std::abs(V.basis()(0, 0)), 1.0, 1e-12);
}

TEST(WeaklyUnobservable, InputChannelEnlargesV) {
  // With B = e1 and D = 0 every output-nulling trajectory can hide in the
  // direction fed by the input: V(A,B,C,D) grows accordingly.
  const Matrix A = shift_matrix(3);
  const Matrix B = from_rows({{1}, {0}, {0}});
  const Matrix C = from_rows({{1, 0, 0}});
  const Matrix D = Matrix::Zero(1, 1);
  const Subspace V = dinf::weakly_unobservable(A, B, C, D, Tolerances{});
  // States with x1 = 0 can be kept output-nulling by feeding the chain.
  EXPECT_EQ(V.dim(), 2);
  const Subspace kerC = dinf::kernel_basis(C, Tolerances{});
  EXPECT_TRUE(dinf::subspace_contains(kerC, V));
}

TEST(WeaklyUnobservable, InvariantProperties) {
  // V is A-invariant modulo im B and contained in ker C modulo im D.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> entry(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4, m = 1, p = 2;
    Matrix A(n, n), B(n, m), C(p, n), D(p, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) A(i, j) = entry(rng);
    for (Index i = 0; i < n; ++i) B(i, 0) = entry(rng);
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < n; ++j) C(i, j) = entry(rng);
    for (Index i = 0; i < p; ++i) D(i, 0) = entry(rng);
    const Tolerances tol{};
    const Subspace V = dinf::weakly_unobservable(A, B, C, D, tol);
    // [A; C] V <= V x {0} + im [B; D].
    const Matrix big = dinf::vstack(A, C) * V.basis();
    Matrix lift(n + p, V.dim());
    lift << V.basis(), Matrix::Zero(p, V.dim());
    const Subspace rhs = dinf::image_basis(
        dinf::hstack(lift, dinf::vstack(B, D)), tol);
    EXPECT_TRUE(dinf::subspace_contains(rhs, dinf::image_basis(big, tol)))
        << "trial " << trial;
  }
}

TEST(Jstar, ShiftRegisterDataIsFullSpace) {
  // For the four-state shift data with B = e1, every data direction can be
  // cancelled through the input channel: J* = R^3.
  const auto prob = load("sec5.json");
  const auto red = dinf::build_reduction(prob.sys, prob.data, prob.tol);
  const auto [J, trace] = dinf::jstar(red, prob.sys, prob.tol);
  EXPECT_EQ(J.dim(), 3);
  EXPECT_TRUE(trace.converged);
}

TEST(Jstar, DecouplesWhenInputMissesAnnihilator) {
  // With B = e4 the input lives in ker M, so J* collapses to {0}.
  const auto prob = load("sec5_b4.json");
  const auto red = dinf::build_reduction(prob.sys, prob.data, prob.tol);
  const auto [J, trace] = dinf::jstar(red, prob.sys, prob.tol);
  EXPECT_EQ(J.dim(), 0);
}

TEST(Lstar, ShiftRegisterDataIsZero) {
  // Without input channels the iteration shrinks R^3 to {0} in three steps.
  const auto prob = load("sec5.json");
  const auto red = dinf::build_reduction(prob.sys, prob.data, prob.tol);
  const auto [L, trace] = dinf::lstar(red, prob.sys, prob.tol);
  EXPECT_EQ(L.dim(), 0);
  EXPECT_TRUE(trace.converged);
  // Strictly decreasing chain 3 -> 2 -> 1 -> 0.
  ASSERT_GE(trace.dims.size(), 4u);
  EXPECT_EQ(trace.dims[0], 3);
  EXPECT_EQ(trace.dims[1], 2);
  EXPECT_EQ(trace.dims[2], 1);
  EXPECT_EQ(trace.dims[3], 0);
}

TEST(Lstar, EqualsJstarWithZeroedInput) {
  const auto prob = load("example3.json");
  const auto red = dinf::build_reduction(prob.sys, prob.data, prob.tol);
  dinf::ReducedTriple t = dinf::triple_of(red);
  dinf::SystemStructure sys0 = prob.sys;
  sys0.B = Matrix::Zero(sys0.n(), 0);
  sys0.D = Matrix::Zero(sys0.p(), 0);
  const auto [L, lt] = dinf::lstar(t, prob.sys, prob.tol);
  const auto [J0, jt] = dinf::jstar(t, sys0, prob.tol);
  EXPECT_TRUE(dinf::subspace_equal(L, J0));
}

TEST(Iteration, ConvergesWithinAmbientDimensionSteps) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> entry(-2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix F(5, 4), G(3, 4), H(5, 1);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 4; ++j) F(i, j) = entry(rng);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 4; ++j) G(i, j) = entry(rng);
    for (Index i = 0; i < 5; ++i) H(i, 0) = entry(rng);
    const auto [J, trace] =
        dinf::detail::largest_inclusion_subspace(F, G, H, 2, Tolerances{});
    EXPECT_TRUE(trace.converged);
    EXPECT_LE(trace.steps, 5);
    // Fixed point: F J <= G J x {0} + im H.
    const Matrix img = F * J.basis();
    Matrix lift(5, J.dim());
    lift << G * J.basis(), Matrix::Zero(2, J.dim());
    const Subspace rhs =
        dinf::image_basis(dinf::hstack(lift, H), Tolerances{});
    EXPECT_TRUE(dinf::subspace_contains(
        rhs, dinf::image_basis(img, Tolerances{})));
  }
}

TEST(GeometricTest, ShiftRegisterStrongObservability) {
  // B = e1 aligns with the measured end of the chain: J* = R^3 is not inside
  // ker X_- so the data are not informative; with B = e4 they are.
  const auto p1 = load("sec5.json");
  const auto v1 = dinf::geometric_test(p1.sys, p1.data,
                                       Property::StrongObservability, p1.tol);
  EXPECT_EQ(v1.informative, Outcome::NotInformative);
  const auto p4 = load("sec5_b4.json");
  const auto v4 = dinf::geometric_test(p4.sys, p4.data,
                                       Property::StrongObservability, p4.tol);
  EXPECT_EQ(v4.informative, Outcome::Informative);
}

TEST(GeometricTest, ShiftRegisterObservability) {
  // L* ignores the input channel, so observability is informative even for
  // B = e1.
  const auto prob = load("sec5.json");
  const auto v = dinf::geometric_test(prob.sys, prob.data,
                                      Property::Observability, prob.tol);
  EXPECT_EQ(v.informative, Outcome::Informative);
}

TEST(GeometricTest, ShiftRegisterLeftInvertibility) {
  // X_- J* = span{e2,e3,e4} meets im B = span{e1} trivially.
  const auto prob = load("sec5.json");
  const auto v = dinf::geometric_test(prob.sys, prob.data,
                                      Property::LeftInvertibility, prob.tol);
  EXPECT_EQ(v.informative, Outcome::Informative);
}

TEST(GeometricTest, LeftInvertibilityInconclusiveWithoutPrecondition) {
  // D = I makes C^{-1} im D the whole space, which X_- = [0 e2] cannot
  // cover; the geometric test must refuse to decide.
  auto prob = load("example3.json");
  prob.sys.D = Matrix::Identity(1, 1);
  prob.data.Y_minus = prob.sys.C * prob.data.X_minus() +
                      prob.sys.D * prob.data.U_minus;
  const auto v = dinf::geometric_test(prob.sys, prob.data,
                                      Property::LeftInvertibility, prob.tol);
  EXPECT_EQ(v.informative, Outcome::Inconclusive);
}

TEST(GeometricTest, ColumnRankDeficientInputNeverLeftInvertible) {
  auto prob = load("example3.json");
  // Duplicate the input channel: [B; D] loses column rank.
  prob.sys.B = dinf::hstack(prob.sys.B, prob.sys.B);
  prob.sys.D = Matrix::Zero(1, 2);
  prob.data.U_minus = dinf::vstack(prob.data.U_minus, Matrix::Zero(1, 2));
  const auto v = dinf::geometric_test(prob.sys, prob.data,
                                      Property::LeftInvertibility, prob.tol);
  EXPECT_EQ(v.informative, Outcome::NotInformative);
}

TEST(GeometricTest, RejectsInconsistentData) {
  const auto prob = load("example3_inconsistent.json");
  EXPECT_THROW(dinf::geometric_test(prob.sys, prob.data,
                                    Property::StrongObservability, prob.tol),
               dinf::inconsistent_data_error);
}

TEST(GeometricTest, UnsupportedPropertyThrows) {
  const auto prob = load("example3.json");
  EXPECT_THROW(dinf::geometric_test(prob.sys, prob.data,
                                    Property::Controllability, prob.tol),
               std::invalid_argument);
}

}  // namespace
