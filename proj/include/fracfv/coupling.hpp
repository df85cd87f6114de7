#pragma once

#include "fracfv/discretization.hpp"
#include "fracfv/linsolve.hpp"
#include "fracfv/mesh.hpp"
#include "fracfv/permeability.hpp"

#include <vector>

namespace fracfv {

struct CouplingTransmissibility {
  double alpha_higher = 0.0;  ///< two-point half transmissibility of the higher cell
  double alpha_lower = 0.0;   ///< normal permeability over half the aperture, times area
  double t = 0.0;
};

/// Coupling transmissibility of one interface pair. `normal` points out of
/// the higher cell, `d` runs from the higher cell centre to the face centre,
/// `lower_normal_k` is n.K.n of the lower cell (or its eigenvalue mean for 0D
/// cells). With `distance_correction`, d is shortened by half the aperture;
/// this requires aperture < 2|d|.
CouplingTransmissibility coupling_transmissibility(double area, const Vec3& normal, const Vec3& d,
                                                   const PermeabilityTensor& k_higher, double aperture,
                                                   double lower_normal_k, bool distance_correction);

struct CouplingOptions {
  bool distance_correction = false;
};

/// One interface pair in global numbering. The coupling flux
/// lambda = t (p_higher - p_lower) flows from the higher cell into the lower one.
struct CouplingPair {
  int interface = -1;
  int higher_subdomain = -1;
  int higher_face = -1;
  int higher_dof = -1;
  int lower_subdomain = -1;
  int lower_cell = -1;
  int lower_dof = -1;
  CouplingTransmissibility trans;
};

/// Global block system A p = b with A = A_int + W * Lambda.
struct GlobalSystem {
  std::vector<int> offsets;                         ///< first dof of each subdomain, plus total
  std::vector<int> dof_subdomain;                   ///< subdomain of each dof
  std::vector<int> subdomain_dims;
  std::vector<SubdomainDiscretization> discretizations;
  std::vector<CouplingPair> pairs;

  SparseMatrix internal;  ///< block diagonal of subdomain matrices
  SparseMatrix w;         ///< dofs x pairs: effect of each coupling flux on the cell balances
  SparseMatrix lambda;    ///< pairs x dofs: coupling flux in terms of pressures
  SparseMatrix a;
  Vector sources;         ///< integrated source per dof
  Vector boundary_rhs;    ///< boundary-condition part of b
  Vector b;

  int num_dofs() const { return static_cast<int>(a.rows()); }
};

/// Assembles the global system. `sources` holds the integrated source rate of
/// every dof (empty means zero).
GlobalSystem assemble_global(const MixedDimensionalMesh& mesh, std::vector<SubdomainDiscretization> discretizations,
                             const std::vector<PermeabilityField>& permeability, const Vector& sources,
                             const CouplingOptions& options = {});

/// Coupling flux of every pair.
Vector interface_fluxes(const GlobalSystem& system, const Vector& p);

/// Face fluxes of every subdomain with the coupling fluxes inserted as
/// interface data.
std::vector<Vector> subdomain_face_fluxes(const GlobalSystem& system, const Vector& p, const Vector& lambda);

/// A p - b per dof.
Vector residual(const GlobalSystem& system, const Vector& p);

/// Local pressure slice of subdomain s.
Vector subdomain_values(const GlobalSystem& system, const Vector& p, int s);

}  // namespace fracfv
