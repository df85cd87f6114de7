#include "fracfv/error.hpp"
#include "fracfv/linsolve.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace fracfv {
namespace {

TEST(Assemble, SumsDuplicatesAndSortsColumns) {
  const SparseMatrix a = assemble(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 1, -1.0}});
  EXPECT_EQ(a.nonZeros(), 3);
  EXPECT_DOUBLE_EQ(a.coeff(0, 2), 1.5);
  EXPECT_DOUBLE_EQ(a.coeff(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(a.coeff(1, 1), -1.0);
}

TEST(DirectSolve, Identity) {
  SparseMatrix id(4, 4);
  id.setIdentity();
  const Vector b{{1.0, -2.0, 3.0, 0.5}};
  EXPECT_EQ(direct_solve(id, b), b);
}

TEST(DirectSolve, TwoByTwo) {
  const SparseMatrix a = assemble(2, 2, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}});
  SolveReport rep;
  const Vector x = direct_solve(a, Vector{{1.0, 0.0}}, &rep);
  EXPECT_NEAR(x[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0 / 3.0, 1e-15);
  EXPECT_LE(rep.residual, 1e-15);
}

TEST(DirectSolve, RandomSpdMatchesDenseLu) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 50;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = u(rng);
  }
  const Eigen::MatrixXd a = g * g.transpose() + Eigen::MatrixXd::Identity(n, n);
  Vector b(n);
  for (int i = 0; i < n; ++i) b[i] = u(rng);
  const SparseMatrix s = a.sparseView();
  const Vector oracle = a.partialPivLu().solve(b);
  const Vector x = direct_solve(s, b);
  EXPECT_LE((x - oracle).norm(), 1e-10 * oracle.norm());
  EXPECT_LE((s * x - b).norm(), 1e-10 * b.norm());
}

TEST(DirectSolve, NonsymmetricUsesLu) {
  const SparseMatrix a = assemble(3, 3, {{0, 0, 4}, {0, 1, 1}, {1, 0, -2}, {1, 1, 3}, {1, 2, 1}, {2, 1, 0.5}, {2, 2, 2}});
  const SparseFactorization f(a);
  EXPECT_FALSE(f.uses_ldlt());
  const Vector b{{1.0, 2.0, 3.0}};
  EXPECT_LE((a * f.solve(b) - b).norm(), 1e-14);
}

TEST(DirectSolve, SingularMatrixThrows) {
  const SparseMatrix a = assemble(2, 2, {{0, 0, 1}, {0, 1, -1}, {1, 0, -1}, {1, 1, 1}});
  EXPECT_THROW(direct_solve(a, Vector{{1.0, -1.0}}), SolverError);
}

TEST(DirectSolve, DeterministicFactors) {
  const SparseMatrix a = assemble(3, 3, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}, {1, 2, -1}, {2, 1, -1}, {2, 2, 2}});
  const Vector b{{1.0, 0.0, 1.0}};
  const Vector x1 = direct_solve(a, b);
  const Vector x2 = direct_solve(a, b);
  EXPECT_EQ(x1, x2);
}

TEST(ConditionNumber, Examples) {
  SparseMatrix id(5, 5);
  id.setIdentity();
  EXPECT_NEAR(condition_number(id), 1.0, 1e-14);
  const SparseMatrix d = assemble(2, 2, {{0, 0, 10.0}, {1, 1, 1.0}});
  EXPECT_NEAR(condition_number(d), 10.0, 1e-12);
  EXPECT_NEAR(condition_number(d, ConditionMode::Estimate), 10.0, 1e-6);
}

TEST(ConditionNumber, ScaleInvariantAndAtLeastOne) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<Triplet> t;
  const int n = 30;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 + u(rng));
    if (i + 1 < n) {
      const double v = -u(rng);
      t.emplace_back(i, i + 1, v);
      t.emplace_back(i + 1, i, v);
    }
  }
  const SparseMatrix a = assemble(n, n, t);
  const double c = condition_number(a);
  EXPECT_GE(c, 1.0);
  EXPECT_NEAR(condition_number(SparseMatrix(-3.7 * a)) / c, 1.0, 1e-8);
  EXPECT_NEAR(condition_number(a, ConditionMode::Estimate) / c, 1.0, 1e-3);
}

TEST(ConditionNumber, DenseModeRejectsLargeMatrices) {
  SparseMatrix big(kDenseConditionLimit + 1, kDenseConditionLimit + 1);
  big.setIdentity();
  EXPECT_THROW(condition_number(big, ConditionMode::Dense), SolverError);
  EXPECT_NEAR(condition_number(big, ConditionMode::Estimate), 1.0, 1e-8);
}

TEST(CoordinateExport, Format) {
  const SparseMatrix a = assemble(2, 2, {{0, 0, 1.5}, {1, 0, -2.0}});
  std::ostringstream os;
  write_coordinate(a, os);
  EXPECT_EQ(os.str(), "2 2 2\n0 0 1.5\n1 0 -2\n");
}

TEST(Submatrix, SelectsRowsAndColumns) {
  const SparseMatrix a = assemble(3, 3, {{0, 0, 1}, {0, 2, 2}, {2, 0, 3}, {2, 2, 4}, {1, 1, 5}});
  const SparseMatrix s = submatrix(a, {0, 2}, {2, 0});
  EXPECT_DOUBLE_EQ(s.coeff(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(s.coeff(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.coeff(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(s.coeff(1, 1), 3.0);
}

}  // namespace
}  // namespace fracfv
