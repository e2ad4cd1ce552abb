#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "igaflow/common.hpp"

namespace igaflow {

/// Row-compressed sparse matrix. Column indices are sorted and unique within
/// each row. The saddle-point systems assembled here are structurally
/// symmetric but numerically unsymmetric.
struct Csr {
  int n = 0;
  std::vector<int> row_ptr;  // size n+1
  std::vector<int> col;      // size nnz
  std::vector<double> val;   // size nnz

  long nnz() const { return static_cast<long>(col.size()); }
  void zero_values() { std::fill(val.begin(), val.end(), 0.0); }
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
};

/// Sparse direct LU (pivoting adequate for indefinite saddle-point systems).
/// Every solve is followed by an explicit residual check against the matrix
/// it was factorized from; a failed check is an error, never a warning.
class SparseLu {
 public:
  SparseLu();
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  /// Symbolic analysis; call once per sparsity pattern.
  void analyze(const Csr& A);
  /// Numeric factorization of the current values (analyze implied if needed).
  void factorize(const Csr& A);
  bool factorized() const;

  /// Solve A x = b for the last factorized A, with the post-solve residual
  /// check ||Ax-b||/||b|| < tol.
  Eigen::VectorXd solve(const Eigen::VectorXd& b, double tol = 1e-12) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience: factorize and solve with the residual check.
Eigen::VectorXd factor_solve(const Csr& A, const Eigen::VectorXd& b,
                             double tol = 1e-12);

}  // namespace igaflow
