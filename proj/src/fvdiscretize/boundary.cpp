#include "fracfv/boundary.hpp"

#include "fracfv/error.hpp"

#include <string>

namespace fracfv {

BoundaryConditionSet::BoundaryConditionSet(const SubdomainGrid& grid)
    : grid_name_(grid.name), kinds_(grid.face_kinds), centres_(grid.face_centres), conditions_(grid.num_faces()), assignable_(grid.num_faces(), false) {
  for (int f = 0; f < grid.num_faces(); ++f) {
    const FaceKind k = grid.face_kinds[f];
    assignable_[f] = k == FaceKind::DomainBoundary || k == FaceKind::Tip;
  }
}

bool BoundaryConditionSet::is_assignable(int face) const {
  return face >= 0 && face < num_faces() && assignable_[face];
}

void BoundaryConditionSet::set(int face, BoundaryCondition bc) {
  if (face < 0 || face >= num_faces()) throw AssemblyError("boundary condition for unknown face " + std::to_string(face));
  if (!assignable_[face]) {
    throw AssemblyError("face " + std::to_string(face) + " of '" + grid_name_ + "' is " +
                        to_string(kinds_[face]) + " and cannot carry a boundary condition");
  }
  conditions_[face] = bc;
}

void BoundaryConditionSet::assign(const std::function<bool(const Vec3&)>& select,
                                  const std::function<BoundaryCondition(const Vec3&)>& bc) {
  for (int f = 0; f < num_faces(); ++f) {
    if (!assignable_[f]) continue;
    const Vec3& x = centres_[f];
    if (select(x)) conditions_[f] = bc(x);
  }
}

const BoundaryCondition& BoundaryConditionSet::at(int face) const {
  if (!is_assignable(face)) throw AssemblyError("face " + std::to_string(face) + " has no boundary condition");
  return conditions_[face];
}

}  // namespace fracfv
