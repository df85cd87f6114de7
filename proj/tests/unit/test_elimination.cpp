#include "fracfv/cartesian.hpp"
#include "fracfv/elimination.hpp"
#include "fracfv/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace fracfv {
namespace {

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

TEST(SchurReduce, TwoByTwo) {
  Eigen::MatrixXd a{{2, -1}, {-1, 2}};
  const auto r = schur_reduce(dense_to_sparse(a), Vector{{1.0, 0.0}}, {1});
  ASSERT_EQ(r.a_r.rows(), 1);
  EXPECT_DOUBLE_EQ(r.a_r.coeff(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(r.b_r[0], 1.0);
  const Vector pk = solve_reduced(r);
  EXPECT_NEAR(pk[0], 2.0 / 3.0, 1e-15);
  const Vector full = back_substitute(r, pk);
  EXPECT_NEAR(full[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(full[1], 1.0 / 3.0, 1e-15);
}

TEST(SchurReduce, ThreeByThree) {
  Eigen::MatrixXd a{{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}};
  const auto r = schur_reduce(dense_to_sparse(a), Vector::Zero(3), {1});
  const Eigen::MatrixXd ar(r.a_r);
  EXPECT_DOUBLE_EQ(ar(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(ar(0, 1), -0.5);
  EXPECT_DOUBLE_EQ(ar(1, 0), -0.5);
  EXPECT_DOUBLE_EQ(ar(1, 1), 1.5);
  EXPECT_EQ(back_substitute(r, Vector::Zero(2)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SchurReduce, RandomSpdMatchesDenseBlockElimination) {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 50;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = u(rng);
    }
    const Eigen::MatrixXd a = g * g.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = u(rng);
    std::vector<int> elim, kept;
    for (int i = 0; i < n; ++i) (i % 3 == trial % 3 ? elim : kept).push_back(i);

    const auto r = schur_reduce(dense_to_sparse(a), b, elim);
    const int ne = static_cast<int>(elim.size());
    const int nk = static_cast<int>(kept.size());
    Eigen::MatrixXd akk(nk, nk), ake(nk, ne), aek(ne, nk), aee(ne, ne);
    Vector bk(nk), be(ne);
    for (int i = 0; i < nk; ++i) {
      bk[i] = b[kept[i]];
      for (int j = 0; j < nk; ++j) akk(i, j) = a(kept[i], kept[j]);
      for (int j = 0; j < ne; ++j) ake(i, j) = a(kept[i], elim[j]);
    }
    for (int i = 0; i < ne; ++i) {
      be[i] = b[elim[i]];
      for (int j = 0; j < nk; ++j) aek(i, j) = a(elim[i], kept[j]);
      for (int j = 0; j < ne; ++j) aee(i, j) = a(elim[i], elim[j]);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(aee);
    const Eigen::MatrixXd oracle = akk - ake * lu.solve(aek);
    const Vector oracle_b = bk - ake * lu.solve(be);
    ASSERT_EQ(r.kept, kept);
    const Eigen::MatrixXd ar(r.a_r);
    EXPECT_LE((ar - oracle).cwiseAbs().maxCoeff(), 1e-10 * oracle.cwiseAbs().maxCoeff());
    EXPECT_LE((r.b_r - oracle_b).cwiseAbs().maxCoeff(), 1e-10 * oracle_b.cwiseAbs().maxCoeff());

    const Vector x = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
    const Vector full = back_substitute(r, solve_reduced(r));
    EXPECT_LE((full - x).norm(), 1e-12 * x.norm());
  }
}

TEST(StarDelta, MatrixEntries) {
  const auto two = star_delta_matrix(Vector{{2.0, 2.0}});
  EXPECT_DOUBLE_EQ(-two(0, 1), 1.0);
  const auto four = star_delta_matrix(Vector::Constant(4, 2.0));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) {
        EXPECT_DOUBLE_EQ(-four(i, j), 0.5);
      }
    }
    EXPECT_NEAR(four.row(i).sum(), 0.0, 1e-15);
  }
  const auto three = star_delta_matrix(Vector{{1.0, 2.0, 3.0}});
  EXPECT_DOUBLE_EQ(-three(0, 1), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(-three(0, 2), 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(-three(1, 2), 6.0 / 6.0);
}

Problem crossing_problem(int n, double k_i) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  FracturePatch v, h;
  v.normal_axis = 0;
  h.normal_axis = 1;
  v.permeability = PermeabilityTensor::isotropic(2, 1e2);
  h.permeability = PermeabilityTensor::isotropic(2, 1e-1);
  spec.fractures = {v, h};
  spec.intersection_rule.kind = IntersectionRule::Kind::Explicit;
  spec.intersection_rule.tensor = PermeabilityTensor::isotropic(2, k_i);
  auto mesh = build_cartesian_with_fractures(spec, {n, n, 1});
  auto perm = assign_permeability(mesh, spec, [](const Vec3&) { return PermeabilityTensor::isotropic(2, 1.0); });
  Problem p = make_problem(std::move(mesh), std::move(perm), FluxMethod::Tpfa);
  set_boundary(p, [](const Vec3& x) { return x.x() < 1e-12 || x.x() > 1 - 1e-12; },
               [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, 1.0 - x.x()}; });
  return p;
}

TEST(StarDelta, ReducedSystemUsesPairwiseTransmissibilities) {
  const Problem p = crossing_problem(2, 1.0);
  const GlobalSystem sys = assemble_problem(p);
  const auto elim = default_eliminated_set(sys);
  ASSERT_EQ(elim.size(), 1u);
  const auto r = star_delta_reduce(sys, elim);
  ASSERT_EQ(r.branches.size(), 4u);
  double sum = 0.0;
  for (const auto& b : r.branches) sum += b.alpha;
  for (const auto& bi : r.branches) {
    for (const auto& bj : r.branches) {
      if (bi.kept_dof == bj.kept_dof) continue;
      const int i = r.kept_index[bi.kept_dof];
      const int j = r.kept_index[bj.kept_dof];
      const double original = sys.a.coeff(bi.kept_dof, bj.kept_dof);
      EXPECT_NEAR(r.a_r.coeff(i, j) - original, -bi.alpha * bj.alpha / sum, 1e-12);
    }
  }
  const auto sd = solve_reduced(r);
  const Vector full = back_substitute(r, sd);
  double weighted = 0.0;
  for (const auto& b : r.branches) weighted += b.alpha * sd[r.kept_index[b.kept_dof]];
  EXPECT_NEAR(full[elim[0]], weighted / sum, 1e-12);
}

TEST(StarDelta, TwoBranchesMatchHarmonicAverage) {
  const auto m = star_delta_matrix(Vector{{3.0, 2.0}});
  EXPECT_DOUBLE_EQ(-m(0, 1), tpfa_face_transmissibility(3.0, 2.0));
  EXPECT_DOUBLE_EQ(-star_delta_matrix(Vector{{2.0, 2.0}})(0, 1), tpfa_face_transmissibility(2.0, 2.0));
  // A source-free intermediate cell between two branches condenses to the same link.
  Eigen::MatrixXd a{{4, -3, 0}, {-3, 5, -2}, {0, -2, 3}};
  const auto r = schur_reduce(dense_to_sparse(a), Vector::Zero(3), {1});
  EXPECT_NEAR(-r.a_r.coeff(0, 1), 6.0 / 5.0, 1e-15);
}

TEST(LimitEquivalence, DeviationDecreasesWithBoost) {
  auto build = [](double boost) { return assemble_problem(crossing_problem(4, boost)); };
  const auto elim = default_eliminated_set(build(1.0));
  double prev = INFINITY;
  for (double boost : {1e2, 1e6, 1e10}) {
    const auto rep = limit_equivalence_check(build, elim, boost);
    EXPECT_LT(rep.relative_deviation, prev);
    prev = rep.relative_deviation;
  }
  EXPECT_LT(limit_equivalence_check(build, elim, 1e10).pressure_difference, 1e-6);
}

TEST(LimitEquivalence, BaselineEqualsSchurStarDeltaGap) {
  const Problem p = crossing_problem(4, 1.0);
  auto build = [](double boost) { return assemble_problem(crossing_problem(4, boost)); };
  const auto sys = assemble_problem(p);
  const auto elim = default_eliminated_set(sys);
  const auto rep = limit_equivalence_check(build, elim, 1.0);
  const Vector ps = solve_reduced(schur_reduce(sys, elim));
  const Vector pd = solve_reduced(star_delta_reduce(sys, elim));
  EXPECT_NEAR(rep.pressure_difference, (ps - pd).norm() / pd.norm(), 1e-14);
  EXPECT_GT(rep.pressure_difference, 1e-6);
}

TEST(ReducedFluxes, TwoBranchStarDeltaIsTwoPointFlux) {
  const Problem p = crossing_problem(2, 1.0);
  const GlobalSystem sys = assemble_problem(p);
  const auto r = star_delta_reduce(sys, default_eliminated_set(sys));
  const Vector pk = solve_reduced(r);
  const auto flows = reduced_fluxes(r, pk);
  double sum = 0.0;
  for (const auto& b : r.branches) sum += b.alpha;
  for (const auto& f : flows.pairwise) {
    double ti = 0.0, tj = 0.0;
    for (const auto& b : r.branches) {
      if (b.kept_dof == f.from_dof) ti = b.alpha;
      if (b.kept_dof == f.to_dof) tj = b.alpha;
    }
    const double expected = ti * tj / sum * (pk[r.kept_index[f.from_dof]] - pk[r.kept_index[f.to_dof]]);
    EXPECT_NEAR(f.flux, expected, 1e-12);
  }
  double scale = 0.0;
  for (const auto& f : flows.pairwise) scale = std::max(scale, std::abs(f.flux));
  for (const auto& e : flows.external) EXPECT_LE(std::abs(e.outflow), 1e-12 * scale);
}

TEST(ReducedFluxes, SchurBranchFluxesMatchFullSolve) {
  const Problem p = crossing_problem(6, 1e-3);
  const FlowSolution full = solve_flow(p, EliminationMode::None);
  const FlowSolution schur = solve_flow(p, EliminationMode::Schur);
  const Vector lambda = interface_fluxes(full.system, full.pressure);
  const auto flows = reduced_fluxes(*schur.reduced, schur.kept_pressure);
  for (std::size_t b = 0; b < schur.reduced->branches.size(); ++b) {
    const int pair = schur.reduced->branches[b].pair;
    EXPECT_NEAR(flows.branch_flux[static_cast<int>(b)], lambda[pair], 1e-12 * lambda.cwiseAbs().maxCoeff());
  }
  double net = 0.0;
  for (const auto& e : flows.external) net += std::abs(e.outflow);
  EXPECT_LE(net, 1e-12 * lambda.cwiseAbs().maxCoeff());
}

TEST(Elimination, ModeParsing) {
  EXPECT_EQ(parse_elimination_mode("none"), EliminationMode::None);
  EXPECT_EQ(parse_elimination_mode("schur"), EliminationMode::Schur);
  EXPECT_EQ(parse_elimination_mode("star_delta"), EliminationMode::StarDelta);
  EXPECT_ANY_THROW(parse_elimination_mode("delta"));
}

}  // namespace
}  // namespace fracfv
