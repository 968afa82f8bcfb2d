#include "porefrac/solvers.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "porefrac/errors.hpp"

namespace porefrac {

namespace {

// SSOR application  z = M^{-1} r  with
//   M = (omega/(2-omega)) (D/omega + L) D^{-1} (D/omega + U).
// Requires sorted column indices and a stored diagonal.
class SsorPrecond {
 public:
  SsorPrecond(const CsrMatrix& a, double omega) : a_(a), omega_(omega) {
    const int n = a.n();
    diag_.resize(n);
    for (int i = 0; i < n; ++i) {
      diag_[i] = a.at(i, i);
      if (diag_[i] == 0.0) throw SolveError("SSOR: zero diagonal entry");
    }
  }

  void apply(const Vec& r, Vec& z) const {
    const int n = a_.n();
    const auto& rp = a_.row_ptr();
    const auto& cols = a_.cols();
    const auto& vals = a_.vals();
    Vec y(n);
    // (D/omega + L) y = r
    for (int i = 0; i < n; ++i) {
      double s = r[i];
      for (int k = rp[i]; k < rp[i + 1] && cols[k] < i; ++k) s -= vals[k] * y[cols[k]];
      y[i] = s * omega_ / diag_[i];
    }
    // scale by (2-omega)/omega * D
    for (int i = 0; i < n; ++i) y[i] *= (2.0 - omega_) / omega_ * diag_[i];
    // (D/omega + U) z = y
    z.resize(n);
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = rp[i + 1] - 1; k >= rp[i] && cols[k] > i; --k) s -= vals[k] * z[cols[k]];
      z[i] = s * omega_ / diag_[i];
    }
  }

 private:
  const CsrMatrix& a_;
  double omega_;
  std::vector<double> diag_;
};

}  // namespace

SolveResult cg_ssor(const CsrMatrix& a, const Vec& b, double tol, double omega,
                    int max_iter) {
  SolveResult out;
  const int n = a.n();
  out.x = Vec::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  SsorPrecond precond(a, omega);

  Vec r = b;  // x0 = 0
  Vec z(n);
  precond.apply(r, z);
  Vec p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= max_iter; ++it) {
    Vec ap = a.multiply(p);
    const double pap = p.dot(ap);
    if (pap <= 0.0) throw SolveError("cg_ssor: matrix not positive definite");
    const double alpha = rz / pap;
    out.x += alpha * p;
    r -= alpha * ap;
    out.iterations = it;
    out.residual = r.norm() / bnorm;
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    precond.apply(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return out;  // best iterate, converged = false
}

SolveResult gmres(const CsrMatrix& a, const Vec& b, const Preconditioner& precond,
                  double tol, int restart, int max_iter) {
  SolveResult out;
  const int n = a.n();
  out.x = Vec::Zero(n);

  auto apply_precond = [&](const Vec& r, Vec& z) {
    if (precond)
      precond(r, z);
    else
      z = r;
  };

  Vec mb(n);
  apply_precond(b, mb);
  const double mb_norm = mb.norm();
  if (mb_norm == 0.0) {
    out.converged = true;
    return out;
  }

  const int m = std::min(restart, n);
  std::vector<Vec> v(m + 1);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  int total_iters = 0;
  while (total_iters < max_iter) {
    Vec r = b - a.multiply(out.x);
    Vec mr(n);
    apply_precond(r, mr);
    double beta = mr.norm();
    out.residual = beta / mb_norm;
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    v[0] = mr / beta;
    g.setZero();
    g[0] = beta;

    int k = 0;
    for (; k < m && total_iters < max_iter; ++k, ++total_iters) {
      Vec w(n);
      apply_precond(a.multiply(v[k]), w);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        h(i, k) = w.dot(v[i]);
        w -= h(i, k) * v[i];
      }
      h(k + 1, k) = w.norm();
      const bool breakdown = h(k + 1, k) < 1e-14 * beta;
      if (!breakdown) v[k + 1] = w / h(k + 1, k);

      for (int i = 0; i < k; ++i) {  // apply stored Givens rotations
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = h(k, k) / denom;
      sn[k] = h(k + 1, k) / denom;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] *= cs[k];

      out.iterations = total_iters + 1;
      out.residual = std::abs(g[k + 1]) / mb_norm;
      if (out.residual <= tol || breakdown) {
        ++k;
        break;
      }
    }

    // back substitution on the k x k triangular system
    Eigen::VectorXd y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
      y[i] = s / h(i, i);
    }
    for (int i = 0; i < k; ++i) out.x += y[i] * v[i];

    if (out.residual <= tol) {
      // recompute the true preconditioned residual after the update
      Vec rr = b - a.multiply(out.x);
      Vec mrr(n);
      apply_precond(rr, mrr);
      out.residual = mrr.norm() / mb_norm;
      if (out.residual <= 10 * tol) {
        out.converged = true;
        return out;
      }
    }
  }
  return out;
}

Preconditioner make_block_jacobi(const CsrMatrix& a, int block_size) {
  const int n = a.n();
  if (n % block_size != 0) throw SolveError("block size does not divide system size");
  const int nb = n / block_size;

  if (block_size == 1) {
    std::vector<double> inv(n);
    for (int i = 0; i < n; ++i) {
      const double d = a.at(i, i);
      inv[i] = (d != 0.0) ? 1.0 / d : 1.0;
    }
    return [inv = std::move(inv)](const Vec& r, Vec& z) {
      z.resize(r.size());
      for (int i = 0; i < r.size(); ++i) z[i] = inv[i] * r[i];
    };
  }

  using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::vector<Block> inv(nb);
  Block blk(block_size, block_size);
  for (int bidx = 0; bidx < nb; ++bidx) {
    for (int r = 0; r < block_size; ++r)
      for (int c = 0; c < block_size; ++c)
        blk(r, c) = a.at(bidx * block_size + r, bidx * block_size + c);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(blk);
    if (lu.isInvertible())
      inv[bidx] = lu.inverse();
    else
      inv[bidx] = blk.completeOrthogonalDecomposition().pseudoInverse();
  }
  return [inv = std::move(inv), block_size](const Vec& r, Vec& z) {
    z.resize(r.size());
    const int nblocks = static_cast<int>(inv.size());
    for (int b = 0; b < nblocks; ++b)
      z.segment(b * block_size, block_size) =
          inv[b] * r.segment(b * block_size, block_size);
  };
}

Vec dense_lu_solve(const CsrMatrix& a, const Vec& b) {
  if (a.n() > 2000) throw SolveError("dense_lu_solve: system too large");
  Eigen::MatrixXd d = a.to_dense();
  return Eigen::PartialPivLU<Eigen::MatrixXd>(d).solve(b);
}

}  // namespace porefrac
