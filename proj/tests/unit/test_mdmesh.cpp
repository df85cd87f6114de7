#include "fracfv/cartesian.hpp"
#include "fracfv/error.hpp"
#include "fracfv/mesh.hpp"
#include "fracfv/mesh_io.hpp"
#include "mesh_text.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

namespace fracfv {
namespace {

struct Counts {
  std::map<int, int> cells;  // by dimension
  std::map<std::pair<int, int>, int> pairs;  // (higher dim, lower dim)
};

Counts count(const MixedDimensionalMesh& mesh) {
  Counts c;
  for (const auto& g : mesh.subdomains) c.cells[g.dim] += g.num_cells();
  for (const auto& im : mesh.interfaces) {
    c.pairs[{mesh.subdomains[im.higher].dim, mesh.subdomains[im.lower].dim}] += static_cast<int>(im.pairs.size());
  }
  return c;
}

FracturePatch plane(int axis, double position) {
  FracturePatch p;
  p.normal_axis = axis;
  p.position = position;
  p.name = "f" + std::to_string(axis);
  return p;
}

TEST(Cartesian, SingleFractureTwoByOne) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  spec.fractures = {plane(0, 0.5)};
  const auto mesh = build_cartesian_with_fractures(spec, {2, 1, 1});
  Counts c = count(mesh);
  EXPECT_EQ(c.cells[2], 2);
  EXPECT_EQ(c.cells[1], 1);
  EXPECT_EQ(c.cells.count(0), 0u);
  ASSERT_EQ(mesh.interfaces.size(), 1u);
  EXPECT_EQ(mesh.interfaces[0].pairs.size(), 2u);
  EXPECT_NO_THROW(validate(mesh));
}

TEST(Cartesian, CrossingFracturesTwoByTwo) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  spec.fractures = {plane(0, 0.5), plane(1, 0.5)};
  const auto mesh = build_cartesian_with_fractures(spec, {2, 2, 1});
  Counts c = count(mesh);
  EXPECT_EQ(c.cells[2], 4);
  EXPECT_EQ(c.cells[1], 4);
  EXPECT_EQ(c.cells[0], 1);
  EXPECT_EQ((c.pairs[{2, 1}]), 8);
  EXPECT_EQ((c.pairs[{1, 0}]), 4);
  for (const auto& im : mesh.interfaces) {
    if (mesh.subdomains[im.higher].dim == 2) {
      EXPECT_EQ(im.pairs.size(), 4u);
    }
  }
}

TEST(Cartesian, OrthogonalPlanesInCube) {
  FractureNetworkSpec spec;
  spec.dim = 3;
  spec.fractures = {plane(2, 0.5), plane(0, 0.5)};
  const auto mesh = build_cartesian_with_fractures(spec, {2, 2, 2});
  Counts c = count(mesh);
  EXPECT_EQ(c.cells[3], 8);
  EXPECT_EQ(c.cells[2], 8);
  EXPECT_EQ(c.cells[1], 2);
  EXPECT_EQ(c.cells.count(0), 0u);
  EXPECT_EQ((c.pairs[{3, 2}]), 16);
  EXPECT_EQ((c.pairs[{2, 1}]), 8);
}

TEST(Cartesian, InterfacePairsAreMatched) {
  FractureNetworkSpec spec;
  spec.dim = 3;
  spec.fractures = {plane(2, 0.5), plane(0, 0.5), plane(1, 0.5)};
  const auto mesh = build_cartesian_with_fractures(spec, {4, 4, 4});
  const double tol = 1e-10 * mesh.domain_diameter();
  for (const auto& im : mesh.interfaces) {
    const auto& hi = mesh.subdomains[im.higher];
    const auto& lo = mesh.subdomains[im.lower];
    for (const auto& [f, c] : im.pairs) {
      EXPECT_LT((hi.face_centres[f] - lo.cell_centres[c]).norm(), tol);
      EXPECT_EQ(hi.face_kinds[f], FaceKind::Interface);
    }
  }
  EXPECT_EQ(count(mesh).cells[0], 1);
}

TEST(Cartesian, AperturesWeightMeasures) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  auto f = plane(0, 0.5);
  f.aperture = 1e-2;
  spec.fractures = {f};
  const auto mesh = build_cartesian_with_fractures(spec, {2, 4, 1});
  const auto& frac = mesh.subdomains[1];
  ASSERT_EQ(frac.dim, 1);
  for (int c = 0; c < frac.num_cells(); ++c) EXPECT_NEAR(frac.cell_volumes[c], 0.25 * 1e-2, 1e-15);
}

TEST(MinCellDiameter, CartesianSquareAndCube) {
  FractureNetworkSpec sq;
  sq.dim = 2;
  EXPECT_NEAR(min_cell_diameter(build_cartesian_with_fractures(sq, {4, 4, 1})), 0.25 * std::sqrt(2.0), 1e-14);
  FractureNetworkSpec cube;
  cube.dim = 3;
  EXPECT_NEAR(min_cell_diameter(build_cartesian_with_fractures(cube, {2, 2, 2})), 0.5 * std::sqrt(3.0), 1e-14);
}

TEST(MinCellDiameter, SimplexMeshByHand) {
  const auto mesh = test::parse(test::triangulated_square(1));
  // Both triangles contain the unit diagonal as their longest edge.
  EXPECT_NEAR(min_cell_diameter(mesh), std::sqrt(2.0), 1e-14);
  const auto& g = mesh.subdomains[0];
  const auto& n = g.cell_nodes[0];
  double longest = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) longest = std::max(longest, (g.nodes[n[a]] - g.nodes[n[b]]).norm());
  }
  EXPECT_DOUBLE_EQ(longest, std::sqrt(2.0));
}

const char* kTrianglePair = R"(fracfv-mesh 1
ambient_dim 2
subdomains 1
subdomain 2 matrix
nodes 4
0 0 0
1 0 0
1 1 0
0 1 0
cells 2
1 3 0 1 2
1 3 0 2 3
faces derived
interfaces 0
)";

TEST(Import, TrianglePair) {
  const auto mesh = test::parse(kTrianglePair);
  ASSERT_EQ(mesh.subdomains.size(), 1u);
  const auto& g = mesh.subdomains[0];
  EXPECT_EQ(g.num_cells(), 2);
  EXPECT_EQ(g.num_faces(), 5);
  int boundary = 0;
  for (auto k : g.face_kinds) boundary += k == FaceKind::DomainBoundary;
  EXPECT_EQ(boundary, 4);
  EXPECT_NEAR(g.cell_measures[0] + g.cell_measures[1], 1.0, 1e-15);
}

std::string diagonal_fracture(double shift) {
  std::ostringstream os;
  os.precision(17);
  os << "fracfv-mesh 1\nambient_dim 2\nsubdomains 2\n"
     << "subdomain 2 matrix\nnodes 4\n0 0 0\n1 0 0\n1 1 0\n0 1 0\ncells 2\n1 3 0 1 2\n1 3 0 2 3\nfaces derived\n"
     << "subdomain 1 fracture\nnodes 2\n" << shift << " 0 0\n" << 1.0 + shift << " 1 0\ncells 1\n0.01 2 0 1\nfaces derived\n"
     << "interfaces 1\ninterface 0 1 1\n1 0\n";
  return os.str();
}

TEST(Import, FractureOnSharedEdgeSplitsFace) {
  const auto mesh = test::parse(diagonal_fracture(0.0));
  const auto& g = mesh.subdomains[0];
  EXPECT_EQ(g.num_faces(), 6);
  ASSERT_EQ(mesh.interfaces.size(), 1u);
  EXPECT_EQ(mesh.interfaces[0].pairs.size(), 2u);
  EXPECT_EQ(mesh.subdomains[1].face_kinds[0], FaceKind::DomainBoundary);
}

TEST(Import, MismatchedPairIsRejected) {
  const double tol = 1e-10 * std::sqrt(2.0);
  try {
    test::parse(diagonal_fracture(10.0 * tol));
    FAIL() << "expected a conformity error";
  } catch (const MeshError& e) {
    EXPECT_NE(std::string(e.what()).find("pair"), std::string::npos) << e.what();
  }
}

TEST(Import, MalformedDocuments) {
  EXPECT_THROW(test::parse("fracfv-mesh 2\n"), FormatError);
  EXPECT_THROW(test::parse("fracfv-mesh 1\nambient_dim 2\nsubdomains 1\nsubdomain 2 m\nnodes 1\n0 0\n"), FormatError);
  EXPECT_THROW(test::parse("fracfv-mesh 1\nambient_dim 2\nsubdomains 1\nsubdomain 2 m\nnodes 3\n0 0 0\n1 0 0\n2 0 0\n"
                           "cells 1\n1 3 0 1 2\nfaces derived\ninterfaces 0\n"),
               FormatError);
  EXPECT_THROW(import_conforming_mesh("/nonexistent/mesh.txt"), IoError);
}

TEST(Import, RoundTripOfCartesianHierarchy) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  spec.fractures = {plane(0, 0.5)};
  const auto mesh = build_cartesian_with_fractures(spec, {2, 1, 1});
  std::stringstream ss;
  write_mesh(mesh, ss);
  const auto back = read_mesh(ss);
  ASSERT_EQ(back.subdomains.size(), mesh.subdomains.size());
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    const auto& a = mesh.subdomains[s];
    const auto& b = back.subdomains[s];
    EXPECT_EQ(a.dim, b.dim);
    ASSERT_EQ(a.num_cells(), b.num_cells());
    ASSERT_EQ(a.num_faces(), b.num_faces());
    for (int c = 0; c < a.num_cells(); ++c) {
      EXPECT_EQ(a.cell_centres[c], b.cell_centres[c]);
      EXPECT_EQ(a.cell_volumes[c], b.cell_volumes[c]);
    }
    for (int f = 0; f < a.num_faces(); ++f) {
      EXPECT_EQ(a.face_kinds[f], b.face_kinds[f]);
      EXPECT_EQ(a.face_areas[f], b.face_areas[f]);
    }
  }
  ASSERT_EQ(back.interfaces.size(), mesh.interfaces.size());
  EXPECT_EQ(back.interfaces[0].pairs, mesh.interfaces[0].pairs);
}

TEST(Import, TetrahedralCubeIsValid) {
  const auto mesh = test::parse(test::tetrahedral_cube(2));
  const auto& g = mesh.subdomains[0];
  EXPECT_EQ(g.num_cells(), 48);
  double volume = 0.0;
  for (double v : g.cell_volumes) volume += v;
  EXPECT_NEAR(volume, 1.0, 1e-14);
}

TEST(Mesh, DofMapAndLocate) {
  FractureNetworkSpec spec;
  spec.dim = 2;
  spec.fractures = {plane(0, 0.5), plane(1, 0.5)};
  const auto mesh = build_cartesian_with_fractures(spec, {4, 4, 1});
  EXPECT_EQ(mesh.num_dofs(), 16 + 4 + 4 + 1);
  for (int d = 0; d < mesh.num_dofs(); ++d) {
    const auto [s, c] = mesh.locate(d);
    EXPECT_EQ(mesh.dof(s, c), d);
  }
  EXPECT_EQ(dofs_with_dim_at_most(mesh, 0).size(), 1u);
  EXPECT_EQ(dofs_with_dim_at_most(mesh, 1).size(), 9u);
}

}  // namespace
}  // namespace fracfv
