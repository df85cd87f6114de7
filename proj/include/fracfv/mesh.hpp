#pragma once

#include "fracfv/geometry.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fracfv {

/// Role of a face inside its subdomain.
enum class FaceKind : std::uint8_t {
  Interior,        ///< two adjacent cells
  DomainBoundary,  ///< on the outer boundary of the domain
  Interface,       ///< internal boundary paired with a lower-dimensional cell
  Tip,             ///< subdomain boundary strictly inside the domain (fracture tip)
};

const char* to_string(FaceKind kind);

/// One grid of the mixed-dimensional hierarchy.
///
/// Faces are oriented: `face_normals[f]` points out of `face_cells[f][0]` and
/// into `face_cells[f][1]` (or out of the subdomain when the face has a single
/// cell). Measures are geometric; volumes and areas carry the aperture
/// weighting a^(N-d).
struct SubdomainGrid {
  int dim = 0;
  int ambient_dim = 2;
  std::string name;

  std::vector<Vec3> nodes;
  std::vector<std::vector<int>> cell_nodes;
  std::vector<std::vector<int>> face_nodes;
  std::vector<std::array<int, 2>> face_cells;
  std::vector<FaceKind> face_kinds;
  std::vector<double> apertures;  // per cell

  /// Fracture patches a cell descends from (one for fracture cells, several for
  /// intersection cells, empty for matrix cells).
  std::vector<std::vector<int>> cell_parents;

  // Derived by compute_geometry().
  std::vector<Vec3> cell_centres;
  std::vector<double> cell_measures;
  std::vector<double> cell_volumes;
  std::vector<Vec3> face_centres;
  std::vector<Vec3> face_normals;
  std::vector<double> face_measures;
  std::vector<double> face_areas;
  std::vector<std::vector<std::pair<int, int>>> cell_faces;  // (face, sign)
  std::vector<std::vector<int>> node_faces;
  std::vector<std::vector<int>> node_cells;

  int num_cells() const { return static_cast<int>(cell_nodes.size()); }
  int num_faces() const { return static_cast<int>(face_nodes.size()); }
  int num_nodes() const { return static_cast<int>(nodes.size()); }

  bool is_boundary_face(int f) const { return face_cells[f][1] < 0; }

  /// Sign of face `f` seen from cell `c`: +1 if the stored normal points out of c.
  int face_sign(int f, int c) const { return face_cells[f][0] == c ? 1 : -1; }
};

/// Fills centres, measures, normals, aperture-weighted volumes/areas and the
/// incidence tables from nodes, cell/face node lists, face_cells and apertures.
/// Throws MeshError for degenerate entities.
void compute_geometry(SubdomainGrid& grid);

/// Matched interface between a subdomain and one of dimension one lower:
/// each pair is (face of the higher grid, cell of the lower grid).
struct InterfaceMap {
  int higher = -1;
  int lower = -1;
  std::vector<std::pair<int, int>> pairs;
};

/// Hierarchy of subdomain grids plus interfaces. Global degrees of freedom are
/// the cells of all subdomains, numbered subdomain by subdomain.
struct MixedDimensionalMesh {
  int ambient_dim = 2;
  std::vector<SubdomainGrid> subdomains;
  std::vector<InterfaceMap> interfaces;

  /// offsets[s] is the global index of the first cell of subdomain s; the last
  /// entry is the total cell count.
  std::vector<int> offsets;

  void rebuild_dof_map();

  int num_dofs() const { return offsets.empty() ? 0 : offsets.back(); }
  int dof(int subdomain, int cell) const { return offsets[subdomain] + cell; }

  /// (subdomain, cell) of a global index.
  std::pair<int, int> locate(int dof) const;

  /// Dimension of the subdomain owning global index `dof`.
  int dof_dim(int dof) const { return subdomains[locate(dof).first].dim; }

  const SubdomainGrid& highest() const;
  int highest_index() const;

  /// Diameter of the bounding box of the highest-dimensional subdomain.
  double domain_diameter() const;
};

/// Checks all grid and interface invariants; throws MeshError naming the
/// first violation.
void validate(const SubdomainGrid& grid);
void validate(const MixedDimensionalMesh& mesh);

/// Smallest cell diameter (largest node-to-node distance) over the cells of
/// the highest-dimensional subdomain.
double min_cell_diameter(const MixedDimensionalMesh& mesh);

/// Global indices of all cells of subdomains with dimension <= max_dim.
std::vector<int> dofs_with_dim_at_most(const MixedDimensionalMesh& mesh, int max_dim);

}  // namespace fracfv
