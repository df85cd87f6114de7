#pragma once

#include "fracfv/geometry.hpp"
#include "fracfv/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fracfv {

enum class BcKind { Dirichlet, Neumann };

/// Dirichlet value is a pressure (or concentration); Neumann value is the
/// outward normal flux per unit (aperture-weighted) area.
struct BoundaryCondition {
  BcKind kind = BcKind::Neumann;
  double value = 0.0;
};

/// One condition per boundary face of a subdomain. DomainBoundary and Tip
/// faces default to homogeneous Neumann; Interface faces are implicitly
/// Neumann with the coupling flux as data and cannot be assigned.
class BoundaryConditionSet {
public:
  BoundaryConditionSet() = default;
  explicit BoundaryConditionSet(const SubdomainGrid& grid);

  int num_faces() const { return static_cast<int>(conditions_.size()); }

  void set(int face, BoundaryCondition bc);
  void set_dirichlet(int face, double pressure) { set(face, {BcKind::Dirichlet, pressure}); }
  void set_neumann(int face, double outward_flux_density) { set(face, {BcKind::Neumann, outward_flux_density}); }

  /// Applies `bc(face centre)` to every assignable face selected by `select`.
  void assign(const std::function<bool(const Vec3&)>& select, const std::function<BoundaryCondition(const Vec3&)>& bc);

  /// Condition of an assignable face; throws for interior and interface faces.
  const BoundaryCondition& at(int face) const;
  bool is_assignable(int face) const;
  bool is_dirichlet(int face) const { return is_assignable(face) && at(face).kind == BcKind::Dirichlet; }

private:
  std::string grid_name_;
  std::vector<FaceKind> kinds_;
  std::vector<Vec3> centres_;
  std::vector<BoundaryCondition> conditions_;
  std::vector<bool> assignable_;
};

}  // namespace fracfv
