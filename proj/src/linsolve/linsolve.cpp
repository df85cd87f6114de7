#include "fracfv/linsolve.hpp"

#include "fracfv/error.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fracfv {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

}  // namespace

SparseMatrix assemble(int rows, int cols, const std::vector<Triplet>& entries) {
  SparseMatrix a(rows, cols);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  return a;
}

bool is_symmetric(const SparseMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const SparseMatrix t = a.transpose();
  const SparseMatrix diff = a - t;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

struct SparseFactorization::Impl {
  Eigen::SimplicialLDLT<ColMatrix> ldlt;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
};

SparseFactorization::SparseFactorization(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw SolverError("factorization requires a square matrix");
  n_ = static_cast<int>(a.rows());
  if (n_ == 0) return;
  ColMatrix col = a;
  col.makeCompressed();
  ldlt_ = is_symmetric(a);
  if (ldlt_) {
    impl_->ldlt.compute(col);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization failed: matrix is singular");
    const Vector d = impl_->ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    Eigen::Index worst = 0;
    const double dmin = d.cwiseAbs().minCoeff(&worst);
    if (!(dmin > 1e-14 * dmax)) {
      ldlt_ = false;
    }
  }
  if (!ldlt_) {
    impl_->lu.analyzePattern(col);
    impl_->lu.factorize(col);
    if (impl_->lu.info() != Eigen::Success) {
      throw SolverError("LU factorization failed: " + impl_->lu.lastErrorMessage());
    }
  }
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization&&) noexcept = default;
SparseFactorization& SparseFactorization::operator=(SparseFactorization&&) noexcept = default;

Vector SparseFactorization::solve(const Vector& b) const {
  if (b.size() != n_) throw SolverError("right-hand side size does not match the factorized matrix");
  if (n_ == 0) return Vector();
  Vector x = ldlt_ ? Vector(impl_->ldlt.solve(b)) : Vector(impl_->lu.solve(b));
  if (!x.allFinite()) throw SolverError("solve produced non-finite values");
  return x;
}

Eigen::MatrixXd SparseFactorization::solve(const Eigen::MatrixXd& b) const {
  if (b.rows() != n_) throw SolverError("right-hand side size does not match the factorized matrix");
  if (n_ == 0) return Eigen::MatrixXd(0, b.cols());
  Eigen::MatrixXd x = ldlt_ ? Eigen::MatrixXd(impl_->ldlt.solve(b)) : Eigen::MatrixXd(impl_->lu.solve(b));
  if (!x.allFinite()) throw SolverError("solve produced non-finite values");
  return x;
}

Eigen::MatrixXd SparseFactorization::half_solve(const Eigen::MatrixXd& b) const {
  if (!ldlt_) throw SolverError("half solve requires an LDL^T factorization");
  if (b.rows() != n_) throw SolverError("right-hand side size does not match the factorized matrix");
  if (n_ == 0) return Eigen::MatrixXd(0, b.cols());
  Eigen::MatrixXd pb = impl_->ldlt.permutationP() * b;
  impl_->ldlt.matrixL().solveInPlace(pb);
  return pb;
}

Vector SparseFactorization::pivots() const {
  if (!ldlt_ || n_ == 0) return Vector();
  return impl_->ldlt.vectorD();
}

Vector direct_solve(const SparseMatrix& a, const Vector& b, SolveReport* report) {
  if (a.rows() != b.size()) throw SolverError("matrix and right-hand side sizes differ");
  const SparseFactorization fact(a);
  Vector x = fact.solve(b);
  const double bnorm = b.norm();
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Vector r = b - a * x;
  double rel = r.norm() / scale;
  int steps = 0;
  while (steps < 2 && rel > 1e-15) {
    const Vector x_new = x + fact.solve(r);
    const Vector r_new = b - a * x_new;
    const double rel_new = r_new.norm() / scale;
    if (!(rel_new < rel)) break;
    x = x_new;
    r = r_new;
    rel = rel_new;
    ++steps;
  }
  if (report) {
    report->residual = rel;
    report->refinement_steps = steps;
  }
  return x;
}

double condition_number(const SparseMatrix& a, ConditionMode mode) {
  if (a.rows() != a.cols()) throw SolverError("condition number requires a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n == 0) throw SolverError("condition number of an empty matrix");
  if (mode == ConditionMode::Dense) {
    if (n > kDenseConditionLimit) {
      std::ostringstream os;
      os << "matrix of size " << n << " exceeds the dense condition-number limit " << kDenseConditionLimit
         << "; use estimate mode";
      throw SolverError(os.str());
    }
    const Eigen::MatrixXd dense = Eigen::MatrixXd(a);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const Vector& s = svd.singularValues();
    if (!(s(n - 1) > 0.0)) return std::numeric_limits<double>::infinity();
    return s(0) / s(n - 1);
  }

  // power iteration for sigma_max, inverse iteration for sigma_min
  const SparseMatrix at = a.transpose();
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double smax = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = at * (a * v);
    const double nrm = w.norm();
    if (nrm == 0.0) break;
    const double est = std::sqrt(nrm);
    v = w / nrm;
    if (std::abs(est - smax) <= 1e-10 * est) {
      smax = est;
      break;
    }
    smax = est;
  }
  const SparseFactorization fa(a);
  const SparseFactorization fat(at);
  v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double inv_smin = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = fa.solve(fat.solve(v));
    const double nrm = w.norm();
    const double est = std::sqrt(nrm);
    v = w / nrm;
    if (std::abs(est - inv_smin) <= 1e-10 * est) {
      inv_smin = est;
      break;
    }
    inv_smin = est;
  }
  return smax * inv_smin;
}

void write_coordinate(const SparseMatrix& a, std::ostream& out) {
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }
}

void write_coordinate(const SparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_coordinate(a, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> col_map(a.cols(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (SparseMatrix::InnerIterator it(a, rows[i]); it; ++it) {
      const int j = col_map[it.col()];
      if (j >= 0) entries.emplace_back(static_cast<int>(i), j, it.value());
    }
  }
  return assemble(static_cast<int>(rows.size()), static_cast<int>(cols.size()), entries);
}

}  // namespace fracfv
