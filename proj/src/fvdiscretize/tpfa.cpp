#include "fracfv/discretization.hpp"

#include "fracfv/error.hpp"

#include <cmath>
#include <sstream>

namespace fracfv {

double tpfa_half_transmissibility(double area, const Vec3& normal, const PermeabilityTensor& k, const Vec3& d) {
  const double dd = d.squaredNorm();
  if (!(dd > 0.0)) throw AssemblyError("degenerate geometry: cell centre coincides with face centre");
  return area * k.project(normal, d) / dd;
}

double tpfa_face_transmissibility(double alpha_i, double alpha_j) {
  const double sum = alpha_i + alpha_j;
  if (sum == 0.0) return 0.0;
  return alpha_i * alpha_j / sum;
}

SparseMatrix divergence(const SubdomainGrid& grid) {
  std::vector<Triplet> entries;
  for (int f = 0; f < grid.num_faces(); ++f) {
    const auto& fc = grid.face_cells[f];
    if (fc[0] >= 0) entries.emplace_back(fc[0], f, 1.0);
    if (fc[1] >= 0) entries.emplace_back(fc[1], f, -1.0);
  }
  return assemble(grid.num_cells(), grid.num_faces(), entries);
}

SubdomainDiscretization assemble_tpfa(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc) {
  if (static_cast<int>(k.size()) != grid.num_cells()) {
    throw AssemblyError("permeability field of '" + grid.name + "' does not match its cell count");
  }
  if (bc.num_faces() != grid.num_faces()) {
    throw AssemblyError("boundary conditions of '" + grid.name + "' do not match its face count");
  }
  SubdomainDiscretization disc;
  disc.method = FluxMethod::Tpfa;
  disc.boundary_data = Vector::Zero(grid.num_faces());
  disc.dirichlet.assign(grid.num_faces(), false);
  std::vector<Triplet> flux;
  std::vector<Triplet> bound;
  auto& diag = disc.diagnostics;

  auto half = [&](int f, int c) {
    const Vec3 n = grid.face_sign(f, c) * grid.face_normals[f];
    const Vec3 d = grid.face_centres[f] - grid.cell_centres[c];
    try {
      const double a = tpfa_half_transmissibility(grid.face_areas[f], n, k[c], d);
      if (a < 0.0) ++diag.negative_half_transmissibilities;
      return a;
    } catch (const AssemblyError& e) {
      std::ostringstream os;
      os << e.what() << " (cell " << c << ", face " << f << " of '" << grid.name << "')";
      throw AssemblyError(os.str());
    }
  };

  for (int f = 0; f < grid.num_faces(); ++f) {
    const int i = grid.face_cells[f][0];
    const int j = grid.face_cells[f][1];
    if (j >= 0) {
      const double ai = half(f, i);
      const double aj = half(f, j);
      const double t = tpfa_face_transmissibility(ai, aj);
      if (t == 0.0) ++diag.blocking_faces;
      flux.emplace_back(f, i, t);
      flux.emplace_back(f, j, -t);
      continue;
    }
    if (grid.face_kinds[f] == FaceKind::Interface) {
      bound.emplace_back(f, f, 1.0);
      continue;
    }
    const BoundaryCondition& c = bc.at(f);
    if (c.kind == BcKind::Dirichlet) {
      const double a = half(f, i);
      flux.emplace_back(f, i, a);
      bound.emplace_back(f, f, -a);
      disc.dirichlet[f] = true;
      disc.boundary_data[f] = c.value;
    } else {
      bound.emplace_back(f, f, 1.0);
      disc.boundary_data[f] = c.value * grid.face_areas[f];
    }
  }
  disc.flux = assemble(grid.num_faces(), grid.num_cells(), flux);
  disc.bound_flux = assemble(grid.num_faces(), grid.num_faces(), bound);
  disc.div = divergence(grid);
  return disc;
}

}  // namespace fracfv
