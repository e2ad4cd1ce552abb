#include "igaflow/linsolve.hpp"

#include <suitesparse/umfpack.h>

#include <cmath>
#include <sstream>

namespace igaflow {

Eigen::VectorXd Csr::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
  return y;
}

// UMFPACK factors the CSC interpretation of the CSR arrays, which is A^T at
// zero copy; solves then use sys = UMFPACK_At to return A x = b.
struct SparseLu::Impl {
  void* symbolic = nullptr;
  void* numeric = nullptr;
  // snapshot of the factorized values: the caller may re-assemble into the
  // same Csr while this factorization is still in use, and the post-solve
  // residual check must test against what was actually factored
  Csr snapshot;
  const Csr* analyzed_for = nullptr;
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];

  Impl() { umfpack_di_defaults(control); }
  ~Impl() { clear(); }
  void clear() {
    if (numeric) umfpack_di_free_numeric(&numeric);
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    numeric = symbolic = nullptr;
  }
};

SparseLu::SparseLu() : impl_(std::make_unique<Impl>()) {}
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

void SparseLu::analyze(const Csr& A) {
  require(A.n > 0 && static_cast<int>(A.row_ptr.size()) == A.n + 1,
          "SparseLu: malformed CSR");
  impl_->clear();
  const int status =
      umfpack_di_symbolic(A.n, A.n, A.row_ptr.data(), A.col.data(),
                          A.val.data(), &impl_->symbolic, impl_->control,
                          impl_->info);
  if (status != UMFPACK_OK) {
    std::ostringstream os;
    os << "SparseLu: symbolic analysis failed (umfpack status " << status << ")";
    fail(os.str());
  }
  impl_->analyzed_for = &A;
}

void SparseLu::factorize(const Csr& A) {
  if (!impl_->symbolic || impl_->analyzed_for != &A) analyze(A);
  if (impl_->numeric) umfpack_di_free_numeric(&impl_->numeric);
  impl_->numeric = nullptr;
  const int status =
      umfpack_di_numeric(A.row_ptr.data(), A.col.data(), A.val.data(),
                         impl_->symbolic, &impl_->numeric, impl_->control,
                         impl_->info);
  if (status != UMFPACK_OK) {
    std::ostringstream os;
    os << "SparseLu: factorization failed (singular or near-singular pivot); "
       << "umfpack status " << status << ", smallest pivot magnitude "
       << impl_->info[UMFPACK_UMIN];
    fail(os.str());
  }
  impl_->snapshot = A;
}

bool SparseLu::factorized() const { return impl_->numeric != nullptr; }

Eigen::VectorXd SparseLu::solve(const Eigen::VectorXd& b, double tol) const {
  if (!impl_->numeric) fail("SparseLu: solve before factorize");
  const Csr& A = impl_->snapshot;
  Eigen::VectorXd x(A.n);
  const int status =
      umfpack_di_solve(UMFPACK_At, A.row_ptr.data(), A.col.data(),
                       A.val.data(), x.data(), b.data(), impl_->numeric,
                       impl_->control, impl_->info);
  if (status != UMFPACK_OK) {
    std::ostringstream os;
    os << "SparseLu: solve failed (umfpack status " << status << ")";
    fail(os.str());
  }
  const double bn = b.norm();
  const double bscale = bn > 0.0 ? bn : 1.0;
  double rn = 0.0;
  for (int refine = 0; refine <= 2; ++refine) {
    const Eigen::VectorXd r = b - A.multiply(x);
    rn = r.norm();
    if (rn <= tol * bscale) return x;
    // iterative refinement against the factored matrix
    Eigen::VectorXd dx(A.n);
    umfpack_di_solve(UMFPACK_At, A.row_ptr.data(), A.col.data(), A.val.data(),
                     dx.data(), r.data(), impl_->numeric, impl_->control,
                     impl_->info);
    x += dx;
  }
  std::ostringstream os;
  os << "SparseLu: post-solve residual check failed: ||Ax-b||/||b|| = "
     << rn / bscale << " > " << tol << "; smallest pivot magnitude "
     << impl_->info[UMFPACK_UMIN];
  fail(os.str());
}

Eigen::VectorXd factor_solve(const Csr& A, const Eigen::VectorXd& b,
                             double tol) {
  SparseLu lu;
  lu.factorize(A);
  return lu.solve(b, tol);
}

}  // namespace igaflow
