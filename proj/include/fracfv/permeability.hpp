#pragma once

#include "fracfv/geometry.hpp"

#include <span>
#include <vector>

namespace fracfv {

/// Symmetric positive definite permeability tensor of an N-dimensional problem.
/// Stored as a 3x3 matrix; for N = 2 the third row and column are zero.
class PermeabilityTensor {
public:
  PermeabilityTensor() = default;

  static PermeabilityTensor isotropic(int dim, double k);
  static PermeabilityTensor diagonal(std::span<const double> principal);

  /// R(theta) diag(principal) R(theta)^T with R the rotation by `theta`
  /// (radians) about the z axis, i.e. in the xy-plane.
  static PermeabilityTensor rotated(std::span<const double> principal, double theta);

  /// Full tensor; throws if not symmetric positive definite on the leading
  /// dim x dim block.
  static PermeabilityTensor from_matrix(int dim, const Mat3& k);

  int dim() const { return dim_; }
  const Mat3& matrix() const { return k_; }

  /// n . K . d
  double project(const Vec3& n, const Vec3& d) const { return n.dot(k_ * d); }
  double normal_component(const Vec3& n) const { return project(n, n); }

  /// Arithmetic mean of the eigenvalues of the dim x dim block.
  double eigen_mean() const;
  double min_eigenvalue() const;

  PermeabilityTensor scaled(double factor) const;

  bool operator==(const PermeabilityTensor&) const = default;

private:
  PermeabilityTensor(int dim, const Mat3& k) : dim_(dim), k_(k) {}
  void check() const;

  int dim_ = 0;
  Mat3 k_ = Mat3::Zero();
};

/// One tensor per cell of a subdomain.
using PermeabilityField = std::vector<PermeabilityTensor>;

}  // namespace fracfv
