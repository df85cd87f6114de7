#include "fracfv/boundary.hpp"
#include "fracfv/cartesian.hpp"
#include "fracfv/discretization.hpp"
#include "fracfv/error.hpp"
#include "fracfv/linsolve.hpp"
#include "mesh_text.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace fracfv {
namespace {

double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) v = std::max(v, std::abs(it.value()));
  }
  return v;
}

Vector solve(const SubdomainDiscretization& disc) { return direct_solve(disc.matrix(), disc.boundary_rhs()); }

SubdomainGrid square_grid(int nx, int ny) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  return build_cartesian_with_fractures(spec, {nx, ny, 1}).subdomains[0];
}

PermeabilityField uniform(const SubdomainGrid& g, const PermeabilityTensor& k) {
  return PermeabilityField(static_cast<std::size_t>(g.num_cells()), k);
}

TEST(HalfTransmissibility, Examples) {
  const Vec3 n(1, 0, 0);
  const double ones[2] = {1.0, 1.0};
  const double aniso[2] = {4.0, 1.0};
  EXPECT_DOUBLE_EQ(tpfa_half_transmissibility(1.0, n, PermeabilityTensor::diagonal(ones), Vec3(0.5, 0, 0)), 2.0);
  EXPECT_DOUBLE_EQ(tpfa_half_transmissibility(1.0, n, PermeabilityTensor::diagonal(aniso), Vec3(0.5, 0, 0)), 8.0);
  EXPECT_DOUBLE_EQ(tpfa_half_transmissibility(1.0, n, PermeabilityTensor::diagonal(ones), Vec3(0.5, 0.5, 0)), 1.0);
  EXPECT_THROW(tpfa_half_transmissibility(1.0, n, PermeabilityTensor::diagonal(ones), Vec3::Zero()), AssemblyError);
}

TEST(FaceTransmissibility, HarmonicAverage) {
  EXPECT_DOUBLE_EQ(tpfa_face_transmissibility(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(tpfa_face_transmissibility(3, 6), 2.0);
  EXPECT_DOUBLE_EQ(tpfa_face_transmissibility(0, 5), 0.0);
  EXPECT_DOUBLE_EQ(tpfa_face_transmissibility(0, 0), 0.0);
}

TEST(Tpfa, ThreeCellSeriesChain) {
  const auto mesh = test::parse(test::chain(3));
  const auto& g = mesh.subdomains[0];
  PermeabilityField k{PermeabilityTensor::isotropic(1, 1.0), PermeabilityTensor::isotropic(1, 2.0),
                      PermeabilityTensor::isotropic(1, 4.0)};
  BoundaryConditionSet bc(g);
  bc.assign([](const Vec3&) { return true; }, [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, x.x() < 1.5 ? 1.0 : 0.0}; });
  const auto disc = assemble_tpfa(g, k, bc);
  const Vector p = solve(disc);
  // Series resistances 1/1 + 1/2 + 1/4 between the Dirichlet ends.
  const double q = 1.0 / 1.75;
  EXPECT_NEAR(p[0], 1.0 - q * 0.5, 1e-14);
  EXPECT_NEAR(p[1], 1.0 - q * (1.0 + 0.25), 1e-14);
  EXPECT_NEAR(p[2], q * 0.125, 1e-14);
  const Vector u = reconstruct_fluxes(disc, p);
  for (int f = 0; f < g.num_faces(); ++f) {
    const double along_x = g.face_normals[f].x() * u[f];
    EXPECT_NEAR(along_x, q, 1e-14) << "face " << f;
  }
}

TEST(Tpfa, LinearFieldExactOnCartesianGrid) {
  const auto g = square_grid(5, 3);
  BoundaryConditionSet bc(g);
  bc.assign([](const Vec3&) { return true; }, [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, 1.0 - x.x()}; });
  const Vector p = solve(assemble_tpfa(g, uniform(g, PermeabilityTensor::isotropic(2, 1.0)), bc));
  for (int c = 0; c < g.num_cells(); ++c) EXPECT_NEAR(p[c], 1.0 - g.cell_centres[c].x(), 1e-13);
}

TEST(Tpfa, PureNeumannHasConstantNullspace) {
  const auto g = square_grid(3, 3);
  const BoundaryConditionSet bc(g);
  const auto disc = assemble_tpfa(g, uniform(g, PermeabilityTensor::isotropic(2, 1.0)), bc);
  const Vector ones = Vector::Ones(g.num_cells());
  EXPECT_LT((disc.matrix() * ones).norm(), 1e-13);
  EXPECT_THROW(direct_solve(disc.matrix(), Vector::Zero(g.num_cells())), SolverError);
}

TEST(Tpfa, ConstantPressureGivesZeroFluxes) {
  const auto g = square_grid(4, 4);
  const BoundaryConditionSet bc(g);
  const auto disc = assemble_tpfa(g, uniform(g, PermeabilityTensor::isotropic(2, 3.0)), bc);
  const Vector u = reconstruct_fluxes(disc, Vector::Constant(g.num_cells(), 2.5));
  EXPECT_LE(u.cwiseAbs().maxCoeff(), 1e-12 * max_abs(disc.flux));
}

TEST(Tpfa, TwoCellFlux) {
  const auto mesh = test::parse(test::chain(2));
  const auto& g = mesh.subdomains[0];
  const BoundaryConditionSet bc(g);
  const auto disc = assemble_tpfa(g, uniform(g, PermeabilityTensor::isotropic(1, 1.0)), bc);
  const Vector u = reconstruct_fluxes(disc, Vector{{1.0, 0.0}});
  for (int f = 0; f < g.num_faces(); ++f) {
    if (g.face_kinds[f] == FaceKind::Interior) {
      EXPECT_NEAR(u[f] * g.face_sign(f, 0), 1.0, 1e-15);
    } else {
      EXPECT_EQ(u[f], 0.0);
    }
  }
}

TEST(Mpfa, EqualsTpfaOnAlignedCartesianGrid) {
  const auto g = square_grid(4, 3);
  PermeabilityField k;
  for (int c = 0; c < g.num_cells(); ++c) {
    const double d[2] = {1.0 + c, 1.0 / (1.0 + 0.5 * c)};
    k.push_back(PermeabilityTensor::diagonal(d));
  }
  BoundaryConditionSet bc(g);
  bc.assign([](const Vec3& x) { return x.x() < 1e-12; }, [](const Vec3&) { return BoundaryCondition{BcKind::Dirichlet, 1.0}; });
  bc.assign([](const Vec3& x) { return x.y() > 1 - 1e-12; }, [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, x.x()}; });
  bc.assign([](const Vec3& x) { return x.y() < 1e-12; }, [](const Vec3&) { return BoundaryCondition{BcKind::Neumann, 0.3}; });
  const auto t = assemble_tpfa(g, k, bc);
  const auto m = assemble_mpfa(g, k, bc, 0.0);
  EXPECT_LE(max_abs(SparseMatrix(t.matrix() - m.matrix())), 1e-12);
  EXPECT_LE(max_abs(SparseMatrix(t.flux - m.flux)), 1e-12);
  EXPECT_LE(max_abs(SparseMatrix(t.bound_flux - m.bound_flux)), 1e-12);
  EXPECT_LE((t.boundary_rhs() - m.boundary_rhs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mpfa, EqualsTpfaOnAlignedCartesianCube) {
  FractureNetworkSpec spec;
  spec.dim = 3;
  const auto g = build_cartesian_with_fractures(spec, {3, 2, 2}).subdomains[0];
  const double d[3] = {2.0, 0.5, 7.0};
  const auto k = uniform(g, PermeabilityTensor::diagonal(d));
  BoundaryConditionSet bc(g);
  bc.assign([](const Vec3& x) { return x.z() < 1e-12 || x.x() > 1 - 1e-12; },
            [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, x.y() + 2 * x.z()}; });
  const auto t = assemble_tpfa(g, k, bc);
  const auto m = assemble_mpfa(g, k, bc, 0.0, 2);
  EXPECT_LE(max_abs(SparseMatrix(t.matrix() - m.matrix())), 1e-12);
}

Mat3 full_tensor_3d() {
  Mat3 k;
  k << 3.0, 0.6, -0.4, 0.6, 2.0, 0.3, -0.4, 0.3, 1.5;
  return k;
}

void expect_linear_reproduction(const SubdomainGrid& g, const PermeabilityTensor& k, const Vec3& grad, double eta, double tol) {
  BoundaryConditionSet bc(g);
  bc.assign([](const Vec3&) { return true; },
            [&](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, 0.25 + grad.dot(x)}; });
  const auto disc = assemble_mpfa(g, uniform(g, k), bc);
  EXPECT_DOUBLE_EQ(disc.eta, eta);
  const Vector p = solve(disc);
  double err = 0.0;
  for (int c = 0; c < g.num_cells(); ++c) err = std::max(err, std::abs(p[c] - 0.25 - grad.dot(g.cell_centres[c])));
  EXPECT_LE(err, tol);
  // Exact fluxes: -K grad . n A on every face.
  const Vector u = reconstruct_fluxes(disc, p);
  double ferr = 0.0;
  for (int f = 0; f < g.num_faces(); ++f) {
    const double exact = -g.face_normals[f].dot(k.matrix() * grad) * g.face_areas[f];
    ferr = std::max(ferr, std::abs(u[f] - exact));
  }
  EXPECT_LE(ferr, tol);
}

TEST(Mpfa, LinearReproductionOnTriangles) {
  const auto mesh = test::parse(test::triangulated_square(6));
  const double theta = std::numbers::pi / 6.0;
  const double principal[2] = {5.0, 0.5};
  expect_linear_reproduction(mesh.subdomains[0], PermeabilityTensor::rotated(principal, theta), Vec3(1.0, -2.0, 0.0), 1.0 / 3.0, 1e-10);
}

TEST(Mpfa, LinearReproductionOnTetrahedra) {
  const auto mesh = test::parse(test::tetrahedral_cube(3));
  expect_linear_reproduction(mesh.subdomains[0], PermeabilityTensor::from_matrix(3, full_tensor_3d()), Vec3(0.5, -1.0, 2.0),
                             1.0 / 3.0, 1e-10);
}

TEST(Mpfa, ConsistentOnCartesianWithFullTensor) {
  const auto g = square_grid(4, 4);
  Mat3 m = Mat3::Zero();
  m << 2.0, 0.7, 0.0, 0.7, 1.0, 0.0, 0.0, 0.0, 0.0;
  expect_linear_reproduction(g, PermeabilityTensor::from_matrix(2, m), Vec3(-1.0, 0.5, 0.0), 0.0, 1e-10);
}

TEST(Mpfa, InteractionRegionRotationSymmetry) {
  const auto g = square_grid(2, 2);
  const BoundaryConditionSet bc(g);
  int centre = -1;
  for (int n = 0; n < g.num_nodes(); ++n) {
    if ((g.nodes[n] - Vec3(0.5, 0.5, 0)).norm() < 1e-12) centre = n;
  }
  ASSERT_GE(centre, 0);
  const auto ir = mpfa_interaction_region(g, uniform(g, PermeabilityTensor::isotropic(2, 1.0)), bc, centre, 0.0);
  ASSERT_EQ(ir.cells.size(), 4u);
  ASSERT_EQ(ir.faces.size(), 4u);
  std::vector<double> first;
  for (int r = 0; r < 4; ++r) {
    EXPECT_NEAR(ir.cell_coefficients.row(r).sum(), 0.0, 1e-14);
    std::vector<double> row;
    for (int c = 0; c < 4; ++c) row.push_back(std::abs(ir.cell_coefficients(r, c)));
    std::sort(row.begin(), row.end());
    if (r == 0) {
      first = row;
    } else {
      for (int c = 0; c < 4; ++c) EXPECT_NEAR(row[c], first[c], 1e-14);
    }
  }
}

TEST(Mpfa, ConservationOfReconstructedFluxes) {
  const auto mesh = test::parse(test::triangulated_square(5));
  const auto& g = mesh.subdomains[0];
  const double principal[2] = {1.0, 1e-2};
  const auto k = uniform(g, PermeabilityTensor::rotated(principal, 0.4));
  BoundaryConditionSet bc(g);
  bc.assign([](const Vec3& x) { return x.x() < 1e-12; }, [](const Vec3&) { return BoundaryCondition{BcKind::Dirichlet, 1.0}; });
  bc.assign([](const Vec3& x) { return x.x() > 1 - 1e-12; }, [](const Vec3&) { return BoundaryCondition{BcKind::Dirichlet, 0.0}; });
  const auto disc = assemble_mpfa(g, k, bc);
  const Vector p = solve(disc);
  const Vector div_u = disc.div * reconstruct_fluxes(disc, p);
  EXPECT_LE(div_u.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mpfa, ThreadCountDoesNotChangeResult) {
  const auto mesh = test::parse(test::tetrahedral_cube(2));
  const auto& g = mesh.subdomains[0];
  const auto k = uniform(g, PermeabilityTensor::from_matrix(3, full_tensor_3d()));
  const BoundaryConditionSet bc(g);
  const auto a = assemble_mpfa(g, k, bc, std::nullopt, 1);
  const auto b = assemble_mpfa(g, k, bc, std::nullopt, 4);
  EXPECT_EQ(max_abs(SparseMatrix(a.flux - b.flux)), 0.0);
}

TEST(Permeability, TensorChecks) {
  Mat3 bad = Mat3::Zero();
  bad << 1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0;
  EXPECT_ANY_THROW(PermeabilityTensor::from_matrix(2, bad));
  const double principal[2] = {4.0, 1.0};
  const auto r = PermeabilityTensor::rotated(principal, std::numbers::pi / 2);
  EXPECT_NEAR(r.matrix()(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(r.matrix()(1, 1), 4.0, 1e-14);
  EXPECT_NEAR(r.eigen_mean(), 2.5, 1e-14);
}

TEST(Boundary, InterfaceFacesAreNotAssignable) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  FracturePatch f;
  f.normal_axis = 0;
  spec.fractures = {f};
  const auto mesh = build_cartesian_with_fractures(spec, {2, 1, 1});
  const auto& g = mesh.subdomains[0];
  BoundaryConditionSet bc(g);
  for (int face = 0; face < g.num_faces(); ++face) {
    if (g.face_kinds[face] == FaceKind::Interface) {
      EXPECT_FALSE(bc.is_assignable(face));
      EXPECT_ANY_THROW(bc.set_dirichlet(face, 1.0));
    }
  }
}

}  // namespace
}  // namespace fracfv
