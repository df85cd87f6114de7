#include "fracfv/cartesian.hpp"
#include "fracfv/coupling.hpp"
#include "fracfv/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace fracfv {
namespace {

const PermeabilityTensor kUnit2 = PermeabilityTensor::isotropic(2, 1.0);

TEST(CouplingTransmissibility, DirectFormula) {
  const auto ct = coupling_transmissibility(1.0, Vec3(1, 0, 0), Vec3(0.5, 0, 0), kUnit2, 1e-2, 1.0, false);
  EXPECT_DOUBLE_EQ(ct.alpha_higher, 2.0);
  EXPECT_NEAR(ct.alpha_lower, 200.0, 1e-12);
  EXPECT_NEAR(ct.t, 400.0 / 202.0, 1e-13);
}

TEST(CouplingTransmissibility, DistanceCorrection) {
  const auto plain = coupling_transmissibility(1.0, Vec3(1, 0, 0), Vec3(0.5, 0, 0), kUnit2, 1e-2, 1.0, false);
  const auto corr = coupling_transmissibility(1.0, Vec3(1, 0, 0), Vec3(0.5, 0, 0), kUnit2, 1e-2, 1.0, true);
  EXPECT_NEAR(corr.alpha_higher, plain.alpha_higher / 0.99, 1e-13);
  EXPECT_DOUBLE_EQ(corr.alpha_lower, plain.alpha_lower);
  EXPECT_ANY_THROW(coupling_transmissibility(1.0, Vec3(1, 0, 0), Vec3(0.5, 0, 0), kUnit2, 1.0, 1.0, true));
}

TEST(CouplingTransmissibility, VanishingApertureLimit) {
  double prev_alpha = 0.0;
  double prev_gap = INFINITY;
  for (double a : {1e-2, 1e-4, 1e-6}) {
    const auto ct = coupling_transmissibility(1.0, Vec3(1, 0, 0), Vec3(0.5, 0, 0), kUnit2, a, 1.0, false);
    EXPECT_GT(ct.alpha_lower, prev_alpha);
    const double gap = ct.alpha_higher - ct.t;
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap, prev_gap);
    prev_alpha = ct.alpha_lower;
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap / 2.0, 1e-5);
}

Problem single_fracture_problem() {
  FractureNetworkSpec spec;
  spec.dim = 2;
  FracturePatch f;
  f.normal_axis = 0;
  f.aperture = 1e-2;
  f.permeability = PermeabilityTensor::isotropic(2, 1.0);
  spec.fractures = {f};
  auto mesh = build_cartesian_with_fractures(spec, {2, 1, 1});
  auto perm = assign_permeability(mesh, spec, [](const Vec3&) { return kUnit2; });
  return make_problem(std::move(mesh), std::move(perm), FluxMethod::Tpfa);
}

TEST(AssembleGlobal, NoFracturesEqualsSubdomainMatrix) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  auto mesh = build_cartesian_with_fractures(spec, {3, 3, 1});
  auto perm = assign_permeability(mesh, spec, [](const Vec3&) { return kUnit2; });
  Problem problem = make_problem(std::move(mesh), std::move(perm), FluxMethod::Tpfa);
  set_boundary(problem, [](const Vec3& x) { return x.x() < 1e-12; }, [](const Vec3&) { return BoundaryCondition{BcKind::Dirichlet, 1.0}; });
  const GlobalSystem sys = assemble_problem(problem);
  EXPECT_TRUE(sys.pairs.empty());
  EXPECT_EQ(SparseMatrix(sys.a - sys.discretizations[0].matrix()).norm(), 0.0);
}

TEST(AssembleGlobal, RowSumsVanishWithoutDirichletData) {
  const GlobalSystem sys = assemble_problem(single_fracture_problem());
  ASSERT_EQ(sys.num_dofs(), 3);
  ASSERT_EQ(sys.pairs.size(), 2u);
  const Vector sums = sys.a * Vector::Ones(3);
  EXPECT_LE(sums.cwiseAbs().maxCoeff(), 1e-12 * sys.a.norm());
  EXPECT_TRUE(is_symmetric(sys.a, 1e-12 * sys.a.norm()));
  EXPECT_EQ(interface_fluxes(sys, Vector::Constant(3, 4.0)).cwiseAbs().maxCoeff(), 0.0);
}

CaseSpec case11(bool correction) {
  CaseSpec spec;
  spec.id = "1.1";
  spec.overrides = {{"distance_correction", correction ? 1.0 : 0.0}};
  return spec;
}

TEST(AssembleGlobal, UniformCrossingFracturesAreLinear) {
  const auto spec = case11(true);
  const Problem problem = build_case_problem("1.1", resolve_parameters(spec), 20, DiscChoice::Tpfa);
  const FlowSolution sol = solve_flow(problem, EliminationMode::None);
  const auto centres = dof_centres(problem.mesh);
  double err = 0.0;
  for (int d = 0; d < problem.mesh.num_dofs(); ++d) err = std::max(err, std::abs(sol.pressure[d] - (1.0 - centres[d].x())));
  EXPECT_LE(err, 1e-10);
  EXPECT_LE(residual(sol.system, sol.pressure).norm(), 1e-12 * sol.system.b.norm());

  // Coupling fluxes through the vertical fracture carry the linear-field flux.
  const Vector lambda = interface_fluxes(sol.system, sol.pressure);
  int checked = 0;
  for (std::size_t i = 0; i < sol.system.pairs.size(); ++i) {
    const auto& pr = sol.system.pairs[i];
    if (pr.higher_subdomain != 0 || pr.lower_subdomain != 1) continue;
    const auto& g = problem.mesh.subdomains[0];
    const double area = g.face_areas[pr.higher_face];
    const double expected = g.face_normals[pr.higher_face].x() * area;
    EXPECT_NEAR(lambda[static_cast<int>(i)], expected, 1e-10);
    ++checked;
  }
  EXPECT_EQ(checked, 2 * 20);
}

TEST(AssembleGlobal, FractureCellBalance) {
  const auto spec = case11(false);
  Problem problem = build_case_problem("1.1", resolve_parameters(spec), 10, DiscChoice::Tpfa);
  const FlowSolution sol = solve_flow(problem, EliminationMode::None);
  const Vector lambda = interface_fluxes(sol.system, sol.pressure);
  const auto faces = subdomain_face_fluxes(sol.system, sol.pressure, lambda);
  for (int s = 1; s < static_cast<int>(problem.mesh.subdomains.size()); ++s) {
    const auto& disc = sol.system.discretizations[s];
    Vector balance = disc.div * faces[s];
    for (std::size_t i = 0; i < sol.system.pairs.size(); ++i) {
      const auto& pr = sol.system.pairs[i];
      if (pr.lower_subdomain == s) balance[pr.lower_cell] -= lambda[static_cast<int>(i)];
    }
    EXPECT_LE(balance.cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff())) << "subdomain " << s;
  }
  EXPECT_LE(flow_balance_error(sol.system, sol.pressure), 1e-12);
}

}  // namespace
}  // namespace fracfv
