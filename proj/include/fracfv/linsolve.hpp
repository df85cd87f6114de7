#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fracfv {

/// Compressed-row sparse matrix with sorted, deduplicated column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double, int>;

/// Builds a compressed matrix, summing duplicate entries in input order.
SparseMatrix assemble(int rows, int cols, const std::vector<Triplet>& entries);

/// True if A equals its transpose entry by entry (bitwise when tol = 0).
bool is_symmetric(const SparseMatrix& a, double tol = 0.0);

/// Reusable factorization: LDL^T for exactly symmetric matrices, LU with a
/// fill-reducing ordering otherwise. Immutable after construction; solves are
/// safe to run concurrently.
class SparseFactorization {
public:
  explicit SparseFactorization(const SparseMatrix& a);
  ~SparseFactorization();
  SparseFactorization(SparseFactorization&&) noexcept;
  SparseFactorization& operator=(SparseFactorization&&) noexcept;

  int size() const { return n_; }
  bool uses_ldlt() const { return ldlt_; }

  Vector solve(const Vector& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  /// For LDL^T factorizations P A P^T = L D L^T: returns L^{-1} P b.
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& b) const;

  /// Diagonal D of an LDL^T factorization (empty for LU).
  Vector pivots() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_ = 0;
  bool ldlt_ = false;
};

struct SolveReport {
  double residual = 0.0;  ///< ||Ax - b|| / ||b|| (absolute when b = 0)
  int refinement_steps = 0;
};

/// Direct sparse solve with up to two steps of iterative refinement.
/// Throws SolverError for singular matrices or non-finite results.
Vector direct_solve(const SparseMatrix& a, const Vector& b, SolveReport* report = nullptr);

enum class ConditionMode { Dense, Estimate };

/// Largest dimension for which the dense singular value computation is used.
inline constexpr int kDenseConditionLimit = 5000;

/// 2-norm condition number sigma_max / sigma_min. Dense mode computes all
/// singular values and throws SolverError above kDenseConditionLimit; estimate
/// mode uses power iteration on A^T A and inverse iteration through a sparse
/// factorization (typically accurate to a few digits).
double condition_number(const SparseMatrix& a, ConditionMode mode = ConditionMode::Dense);

/// Writes "row col value" lines (zero-based, 17 significant digits) after a
/// "rows cols nnz" header.
void write_coordinate(const SparseMatrix& a, std::ostream& out);
void write_coordinate(const SparseMatrix& a, const std::string& path);

/// Sparse copy of the rows/columns listed in `rows` x `cols`.
SparseMatrix submatrix(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace fracfv
