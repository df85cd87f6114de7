#include "fracfv/discretization.hpp"

#include "fracfv/error.hpp"

#include <span>

namespace fracfv {

const char* to_string(FluxMethod method) { return method == FluxMethod::Tpfa ? "tpfa" : "mpfa"; }

SparseMatrix SubdomainDiscretization::matrix() const {
  SparseMatrix a = div * flux;
  a.makeCompressed();
  return a;
}

Vector SubdomainDiscretization::boundary_rhs() const { return -(div * (bound_flux * boundary_data)); }

double default_eta(const SubdomainGrid& grid) {
  for (int c = 0; c < grid.num_cells(); ++c) {
    std::vector<Vec3> pts;
    for (int n : grid.cell_nodes[c]) pts.push_back(grid.nodes[n]);
    if (static_cast<int>(pts.size()) != (1 << grid.dim) || !geometry::is_axis_aligned_box(pts, grid.dim)) return 1.0 / 3.0;
  }
  return 0.0;
}

SubdomainDiscretization discretize(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc,
                                   FluxMethod method, std::optional<double> eta, int threads) {
  if (method == FluxMethod::Tpfa) return assemble_tpfa(grid, k, bc);
  return assemble_mpfa(grid, k, bc, eta, threads);
}

Vector reconstruct_fluxes(const SubdomainDiscretization& disc, const Vector& p) {
  return reconstruct_fluxes(disc, p, disc.boundary_data);
}

Vector reconstruct_fluxes(const SubdomainDiscretization& disc, const Vector& p, const Vector& data) {
  if (p.size() != disc.flux.cols()) throw AssemblyError("pressure field size does not match the discretization");
  if (data.size() != disc.bound_flux.cols()) throw AssemblyError("boundary data size does not match the discretization");
  return disc.flux * p + disc.bound_flux * data;
}

}  // namespace fracfv
