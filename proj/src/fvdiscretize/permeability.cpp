#include "fracfv/permeability.hpp"

#include "fracfv/error.hpp"

#include <cmath>
#include <sstream>

namespace fracfv {

PermeabilityTensor PermeabilityTensor::isotropic(int dim, double k) {
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < dim; ++i) m(i, i) = k;
  PermeabilityTensor t(dim, m);
  t.check();
  return t;
}

PermeabilityTensor PermeabilityTensor::diagonal(std::span<const double> principal) {
  const int dim = static_cast<int>(principal.size());
  if (dim < 1 || dim > 3) throw AssemblyError("permeability: 1 to 3 principal values required");
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < dim; ++i) m(i, i) = principal[i];
  PermeabilityTensor t(dim, m);
  t.check();
  return t;
}

PermeabilityTensor PermeabilityTensor::rotated(std::span<const double> principal, double theta) {
  const int dim = static_cast<int>(principal.size());
  if (dim < 2 || dim > 3) throw AssemblyError("permeability: rotation needs 2 or 3 principal values");
  Mat3 d = Mat3::Zero();
  for (int i = 0; i < dim; ++i) d(i, i) = principal[i];
  Mat3 r = Mat3::Identity();
  r(0, 0) = std::cos(theta);
  r(0, 1) = -std::sin(theta);
  r(1, 0) = std::sin(theta);
  r(1, 1) = std::cos(theta);
  if (dim == 2) r(2, 2) = 0.0;
  Mat3 k = r * d * r.transpose();
  k = 0.5 * (k + k.transpose());
  PermeabilityTensor t(dim, k);
  t.check();
  return t;
}

PermeabilityTensor PermeabilityTensor::from_matrix(int dim, const Mat3& k) {
  Mat3 m = Mat3::Zero();
  m.topLeftCorner(dim, dim) = k.topLeftCorner(dim, dim);
  PermeabilityTensor t(dim, m);
  t.check();
  return t;
}

void PermeabilityTensor::check() const {
  if (dim_ < 1 || dim_ > 3) throw AssemblyError("permeability: dimension must be 1..3");
  const Eigen::MatrixXd block = k_.topLeftCorner(dim_, dim_);
  const double scale = block.cwiseAbs().maxCoeff();
  if ((block - block.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw AssemblyError("permeability tensor is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(block);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    std::ostringstream os;
    os << "permeability tensor is not positive definite (min eigenvalue " << eig.eigenvalues().minCoeff() << ")";
    throw AssemblyError(os.str());
  }
}

double PermeabilityTensor::eigen_mean() const { return k_.topLeftCorner(dim_, dim_).trace() / dim_; }

double PermeabilityTensor::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(k_.topLeftCorner(dim_, dim_)));
  return eig.eigenvalues().minCoeff();
}

PermeabilityTensor PermeabilityTensor::scaled(double factor) const {
  PermeabilityTensor t(dim_, k_ * factor);
  t.check();
  return t;
}

}  // namespace fracfv
