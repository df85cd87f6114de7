#include "fracfv/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fracfv::geometry {

double simplex_measure(std::span<const Vec3> points) {
  const int k = static_cast<int>(points.size()) - 1;
  if (k <= 0) return 1.0;
  Eigen::Matrix<double, 3, Eigen::Dynamic> edges(3, k);
  for (int i = 0; i < k; ++i) edges.col(i) = points[i + 1] - points[0];
  // Gram determinant gives the k-volume of the parallelotope.
  const Eigen::MatrixXd gram = edges.transpose() * edges;
  const double det = std::max(0.0, gram.determinant());
  double factorial = 1.0;
  for (int i = 2; i <= k; ++i) factorial *= i;
  return std::sqrt(det) / factorial;
}

namespace {

std::array<double, 3> extents(std::span<const Vec3> points) {
  std::array<double, 3> lo{points[0].x(), points[0].y(), points[0].z()};
  std::array<double, 3> hi = lo;
  for (const auto& p : points) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  return {hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]};
}

}  // namespace

bool is_axis_aligned_box(std::span<const Vec3> points, int dim) {
  if (dim < 1 || static_cast<int>(points.size()) != (1 << dim)) return false;
  const auto ext = extents(points);
  const double scale = std::max({ext[0], ext[1], ext[2]});
  if (scale <= 0.0) return false;
  const double tol = 1e-12 * scale;
  int spread = 0;
  for (double e : ext) spread += e > tol ? 1 : 0;
  if (spread != dim) return false;
  // every coordinate of every corner must sit on one of the two box planes
  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (const auto& p : points) {
    for (int a = 0; a < 3; ++a) {
      if (std::abs(p[a] - lo[a]) > tol && std::abs(p[a] - hi[a]) > tol) return false;
    }
  }
  return true;
}

double box_measure(std::span<const Vec3> points, int dim) {
  const auto ext = extents(points);
  const double scale = std::max({ext[0], ext[1], ext[2]});
  double m = 1.0;
  int used = 0;
  for (double e : ext) {
    if (e > 1e-12 * scale) {
      m *= e;
      ++used;
    }
  }
  return used == dim ? m : 0.0;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

Vec3 orthogonal_direction(const Vec3& v, std::span<const Vec3> face_points) {
  // Gram-Schmidt over the face edge vectors.
  std::vector<Vec3> basis;
  for (std::size_t i = 1; i < face_points.size(); ++i) {
    Vec3 e = face_points[i] - face_points[0];
    for (const auto& b : basis) e -= e.dot(b) * b;
    const double n = e.norm();
    if (n > 1e-12 * (face_points[i] - face_points[0]).norm() && n > 0.0) basis.push_back(e / n);
  }
  Vec3 w = v;
  for (const auto& b : basis) w -= w.dot(b) * b;
  const double n = w.norm();
  return n > 0.0 ? Vec3(w / n) : Vec3::Zero();
}

LocalFrame fit_frame(std::span<const Vec3> points, int dim) {
  LocalFrame frame;
  frame.origin = centroid(points);
  frame.basis.resize(3, dim);
  if (dim == 0) return frame;

  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 spread = hi - lo;
  const double scale = spread.maxCoeff();
  std::vector<int> axes;
  for (int a = 0; a < 3; ++a) {
    if (spread[a] > 1e-13 * scale) axes.push_back(a);
  }
  if (static_cast<int>(axes.size()) == dim) {
    // axis-aligned subdomain: keep canonical directions
    frame.basis.setZero();
    for (int i = 0; i < dim; ++i) frame.basis(axes[i], i) = 1.0;
    frame.deviation = 0.0;
    return frame;
  }

  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) cov += (p - frame.origin) * (p - frame.origin).transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // eigenvalues ascending: take the largest `dim`
  for (int i = 0; i < dim; ++i) frame.basis.col(i) = eig.eigenvectors().col(2 - i);
  double dev = 0.0;
  for (const auto& p : points) {
    const Vec3 r = p - frame.origin;
    const Vec3 in_plane = frame.basis * (frame.basis.transpose() * r);
    dev = std::max(dev, (r - in_plane).norm());
  }
  frame.deviation = dev;
  return frame;
}

double max_pairwise_distance(std::span<const Vec3> points) {
  double d = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) d = std::max(d, (points[i] - points[j]).norm());
  }
  return d;
}

}  // namespace fracfv::geometry
