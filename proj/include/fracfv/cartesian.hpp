#pragma once

#include "fracfv/mesh.hpp"
#include "fracfv/permeability.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fracfv {

/// Axis-aligned planar fracture patch. `normal_axis` is 0, 1 or 2; the patch
/// covers [lower[a], upper[a]] on the remaining axes a.
struct FracturePatch {
  std::string name;
  int normal_axis = 0;
  double position = 0.5;
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Ones();
  double aperture = 1e-2;
  PermeabilityTensor permeability;
};

/// How intersection cells get their permeability.
struct IntersectionRule {
  enum class Kind { LeastPermeable, HarmonicMean, FromPatch, Explicit };
  Kind kind = Kind::LeastPermeable;
  int patch = -1;                   // FromPatch
  PermeabilityTensor tensor;        // Explicit
};

struct FractureNetworkSpec {
  int dim = 2;
  Vec3 lower = Vec3::Zero();
  Vec3 upper = Vec3::Ones();
  std::vector<FracturePatch> fractures;
  IntersectionRule intersection_rule;
  /// Overrides the minimum-of-parents aperture of intersection cells.
  std::optional<double> intersection_aperture;
};

/// Grid lines per axis for a tensor-product grid.
using AxisCoordinates = std::array<std::vector<double>, 3>;

AxisCoordinates uniform_axes(const FractureNetworkSpec& spec, std::array<int, 3> resolution);

/// Builds the mixed-dimensional hierarchy of a Cartesian grid whose face
/// planes contain every fracture patch. Subdomains are ordered matrix,
/// fracture patches (input order), 1D intersections (3D only), 0D intersections.
MixedDimensionalMesh build_cartesian_with_fractures(const FractureNetworkSpec& spec, std::array<int, 3> resolution);
MixedDimensionalMesh build_cartesian_with_fractures(const FractureNetworkSpec& spec, const AxisCoordinates& axes);

/// Per-subdomain permeability: matrix cells from `matrix_k(centre)`, fracture
/// cells from their patch, intersection cells by the network's intersection rule.
std::vector<PermeabilityField> assign_permeability(const MixedDimensionalMesh& mesh, const FractureNetworkSpec& spec,
                                                   const std::function<PermeabilityTensor(const Vec3&)>& matrix_k);

}  // namespace fracfv
