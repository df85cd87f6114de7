#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace fracfv {

// Points and directions always carry three components; in two-dimensional
// problems the z component is zero.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

namespace geometry {

/// Geometric measure of the simplex spanned by `points` (k+1 points span a k-simplex).
double simplex_measure(std::span<const Vec3> points);

/// Measure of an axis-aligned box given by its corner points; the number of
/// non-degenerate extents must equal `dim`.
double box_measure(std::span<const Vec3> points, int dim);

/// True if the points are the corners of an axis-aligned box of dimension `dim`.
bool is_axis_aligned_box(std::span<const Vec3> points, int dim);

Vec3 centroid(std::span<const Vec3> points);

/// Unit vector in the direction of `v` with the components along the
/// tangent space of `face_points` removed. Used for face normals of cells of
/// any dimension embedded in 3D.
Vec3 orthogonal_direction(const Vec3& v, std::span<const Vec3> face_points);

/// Orthonormal basis (columns) of the affine hull of `points` restricted to `dim`
/// directions, together with the largest out-of-hull deviation.
struct LocalFrame {
  Vec3 origin;
  Eigen::Matrix<double, 3, Eigen::Dynamic> basis;
  double deviation = 0.0;
};
LocalFrame fit_frame(std::span<const Vec3> points, int dim);

double max_pairwise_distance(std::span<const Vec3> points);

}  // namespace geometry
}  // namespace fracfv
