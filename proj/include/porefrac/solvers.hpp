#pragma once

#include <functional>

#include "porefrac/csr.hpp"

namespace porefrac {

/// Outcome of an iterative solve. On non-convergence `x` carries the best
/// iterate so callers can log or abort with context.
struct SolveResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // relative residual at exit
};

/// Applies an approximate inverse; identity if empty.
using Preconditioner = std::function<void(const Vec& r, Vec& z)>;

/// Conjugate gradients with SSOR preconditioning, relaxation omega.
/// A must be symmetric positive definite (caller's responsibility).
SolveResult cg_ssor(const CsrMatrix& a, const Vec& b, double tol,
                    double omega = 1.2, int max_iter = 1000);

/// Restarted GMRES with left preconditioning. Stops when the preconditioned
/// relative residual drops below tol; a lucky Arnoldi breakdown counts as
/// convergence.
SolveResult gmres(const CsrMatrix& a, const Vec& b, const Preconditioner& precond,
                  double tol, int restart = 30, int max_iter = 1000);

/// Block-Jacobi preconditioner over co-located nodal dofs: block_size 1 for
/// scalar fields, 3 for the coupled displacement/phase-field system
/// (dof layout node*block_size + component). Singular blocks fall back to a
/// pseudo-inverse.
Preconditioner make_block_jacobi(const CsrMatrix& a, int block_size);

/// Dense LU fallback for small systems (<= 2000 dofs); used as an oracle in
/// tests and available to callers that prefer a direct solve.
Vec dense_lu_solve(const CsrMatrix& a, const Vec& b);

}  // namespace porefrac
