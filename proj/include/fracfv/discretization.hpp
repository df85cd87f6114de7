#pragma once

#include "fracfv/boundary.hpp"
#include "fracfv/linsolve.hpp"
#include "fracfv/mesh.hpp"
#include "fracfv/permeability.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fracfv {

enum class FluxMethod { Tpfa, Mpfa };

const char* to_string(FluxMethod method);

struct DiscretizationDiagnostics {
  int negative_half_transmissibilities = 0;
  int blocking_faces = 0;
  /// Largest pivot ratio max|U_ii| / min|U_ii| over MPFA local systems.
  double max_local_pivot_ratio = 0.0;
  int interaction_regions = 0;
};

/// Internal flow discretization of one subdomain.
///
/// Face fluxes (along the stored face normal) are `flux * p + bound_flux * g`,
/// where g holds per face the Dirichlet pressure, the total Neumann flux
/// (u_N times area), or the coupling flux on interface faces. The cell
/// balance is `div * u = source`.
struct SubdomainDiscretization {
  FluxMethod method = FluxMethod::Tpfa;
  double eta = 0.0;
  SparseMatrix flux;        ///< faces x cells
  SparseMatrix bound_flux;  ///< faces x faces
  SparseMatrix div;         ///< cells x faces, signed incidence
  Vector boundary_data;     ///< g with zero on interior and interface faces
  std::vector<bool> dirichlet;
  DiscretizationDiagnostics diagnostics;

  SparseMatrix matrix() const;
  /// -div * bound_flux * g (boundary-condition part of the right-hand side)
  Vector boundary_rhs() const;
};

/// alpha = A (n . K . d) / (d . d) with d = x_face - x_cell and n the normal
/// pointing out of the cell. Throws AssemblyError for d = 0.
double tpfa_half_transmissibility(double area, const Vec3& normal, const PermeabilityTensor& k, const Vec3& d);

/// Harmonic combination; zero (a fully blocking face) when the sum vanishes.
double tpfa_face_transmissibility(double alpha_i, double alpha_j);

/// Signed cell-face incidence, +1 where the face normal points out of the cell.
SparseMatrix divergence(const SubdomainGrid& grid);

SubdomainDiscretization assemble_tpfa(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc);

/// 0 for grids of axis-aligned boxes, 1/3 otherwise.
double default_eta(const SubdomainGrid& grid);

/// MPFA-O. Grids of dimension <= 1 reduce to TPFA. Local problems run on
/// `threads` workers and are merged in node order.
SubdomainDiscretization assemble_mpfa(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc,
                                      std::optional<double> eta = std::nullopt, int threads = 1);

SubdomainDiscretization discretize(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc,
                                   FluxMethod method, std::optional<double> eta = std::nullopt, int threads = 1);

/// Transmissibilities of one MPFA interaction region: subface fluxes
/// (one row per face around the node) in terms of the cells around the node
/// and of the boundary data of those faces.
struct InteractionRegion {
  int node = -1;
  std::vector<int> cells;
  std::vector<int> faces;
  Eigen::MatrixXd cell_coefficients;      ///< faces x cells
  Eigen::MatrixXd boundary_coefficients;  ///< faces x faces
  double pivot_ratio = 1.0;
};

InteractionRegion mpfa_interaction_region(const SubdomainGrid& grid, const PermeabilityField& k,
                                          const BoundaryConditionSet& bc, int node, double eta);

/// Face fluxes of a pressure field; `data` overrides the stored boundary data
/// (used to insert coupling fluxes on interface faces).
Vector reconstruct_fluxes(const SubdomainDiscretization& disc, const Vector& p);
Vector reconstruct_fluxes(const SubdomainDiscretization& disc, const Vector& p, const Vector& data);

}  // namespace fracfv
