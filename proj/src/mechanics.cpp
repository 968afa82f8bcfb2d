#include "porefrac/mechanics.hpp"

#include <algorithm>
#include <cmath>

#include "porefrac/errors.hpp"

namespace porefrac {

Vec ElasticParams::lambda_cell() const {
  Vec out(e_cell.size());
  for (int i = 0; i < e_cell.size(); ++i) out[i] = lambda_of(e_cell[i]);
  return out;
}

Vec ElasticParams::g_cell() const {
  Vec out(e_cell.size());
  for (int i = 0; i < e_cell.size(); ++i) out[i] = g_of(e_cell[i]);
  return out;
}

void split_stress(const Matrix2d& strain, double lambda, double g, Matrix2d& sigma_plus,
                  Matrix2d& sigma_minus) {
  const double tr = strain.trace();
  const double tr_pos = std::max(tr, 0.0);
  const double tr_neg = tr - tr_pos;
  const Matrix2d dev = strain - 0.5 * tr * Matrix2d::Identity();
  sigma_plus = (g + lambda) * tr_pos * Matrix2d::Identity() + 2.0 * g * dev;
  sigma_minus = (g + lambda) * tr_neg * Matrix2d::Identity();
}

void split_stress_derivative(const Matrix2d& strain, const Matrix2d& dstrain, double lambda,
                             double g, Matrix2d& dsigma_plus, Matrix2d& dsigma_minus) {
  const double heaviside = strain.trace() >= 0.0 ? 1.0 : 0.0;
  const double dtr = dstrain.trace();
  const Matrix2d ddev = dstrain - 0.5 * dtr * Matrix2d::Identity();
  dsigma_plus = (g + lambda) * heaviside * dtr * Matrix2d::Identity() + 2.0 * g * ddev;
  dsigma_minus = (g + lambda) * (1.0 - heaviside) * dtr * Matrix2d::Identity();
}

Vec extrapolate_phi(const Vec& phi_n, const Vec& phi_nm1, bool have_history) {
  if (!have_history) {
    Vec out = phi_n;
    for (int i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], 0.0, 1.0);
    return out;
  }
  Vec out(phi_n.size());
  for (int i = 0; i < phi_n.size(); ++i)
    out[i] = std::clamp(2.0 * phi_n[i] - phi_nm1[i], 0.0, 1.0);
  return out;
}

namespace {

// Shared quadrature-point evaluation for the residual and Jacobian kernels.
struct QpState {
  Matrix2d strain, sigma_p, sigma_m;
  Vector2d u, grad_p;
  double e_q = 0, g_e = 0, phi_q = 0, p_q = 0, div_u = 0;
  double lam = 0, g_sh = 0;
};

inline void eval_qp(const CellQuad& cq, int q, const MechState& state, const Vec& pressure,
                    const Vec& ephi, const ElasticParams& params, double lam, double g_sh,
                    QpState& s) {
  const Matrix2d grad_u = cq.eval_grad_vec2(state.u, q);
  s.strain = 0.5 * (grad_u + grad_u.transpose());
  split_stress(s.strain, lam, g_sh, s.sigma_p, s.sigma_m);
  s.u = cq.eval_vec2(state.u, q);
  s.grad_p = cq.eval_grad(pressure, q);
  s.e_q = cq.eval(ephi, q);
  s.g_e = degradation(s.e_q, params.kappa);
  s.phi_q = cq.eval(state.phi, q);
  s.p_q = cq.eval(pressure, q);
  s.div_u = grad_u.trace();
  s.lam = lam;
  s.g_sh = g_sh;
}

// Galerkin residual contributions of one quadrature point into the local
// vector (dof layout node*3 + {u_x, u_y, phi}).
inline void residual_qp(const CellQuad& cq, int q, const QpState& s,
                        const ElasticParams& params, const Vec& phi_nodal,
                        Eigen::VectorXd& b_loc) {
  const double w = cq.jxw[q];
  const double am1 = params.alpha - 1.0;
  const double e2 = s.e_q * s.e_q;
  const double drive =
      (1.0 - params.kappa) * (s.sigma_p.array() * s.strain.array()).sum() -
      2.0 * am1 * s.p_q * s.div_u + 2.0 * s.grad_p.dot(s.u);
  Vector2d grad_phi(0, 0);
  for (int i = 0; i < 4; ++i) grad_phi += cq.grad[q][i] * phi_nodal[cq.vids[i]];

  for (int i = 0; i < 4; ++i) {
    const double ni = cq.n[q][i];
    const Vector2d& gi = cq.grad[q][i];
    for (int d = 0; d < 2; ++d) {
      double r = s.g_e * (s.sigma_p.row(d).dot(gi)) + s.sigma_m.row(d).dot(gi);
      r += -am1 * e2 * s.p_q * gi[d] + e2 * s.grad_p[d] * ni;
      b_loc[3 * i + d] += w * r;
    }
    double r_phi = s.phi_q * drive * ni;
    r_phi += -params.g_c / params.eps * (1.0 - s.phi_q) * ni;
    b_loc[3 * i + 2] += w * r_phi;
    b_loc[3 * i + 2] += w * params.g_c * params.eps * grad_phi.dot(gi);
  }
}

}  // namespace

Vec assemble_mech_residual(const QuadMesh& mesh, const DofConstraints& hanging_only,
                           const MechState& state, const Vec& pressure, const Vec& ephi,
                           const ElasticParams& params) {
  const DofMap dofmap(mesh, FieldKind::coupled3);
  const Vec lam = params.lambda_cell();
  const Vec g_sh = params.g_cell();
  Vec r;
  CellKernel kernel = [&](const CellQuad& cq, Eigen::MatrixXd&, Eigen::VectorXd& b_loc) {
    QpState s;
    for (int q = 0; q < cq.nq; ++q) {
      eval_qp(cq, q, state, pressure, ephi, params, lam[cq.cell], g_sh[cq.cell], s);
      residual_qp(cq, q, s, params, state.phi, b_loc);
    }
  };
  assemble_vector(mesh, dofmap, hanging_only, kernel, r);
  return r;
}

MechSystem assemble_mech_system(const QuadMesh& mesh, const DofConstraints& constraints,
                                const DofConstraints& hanging_only, const MechState& state,
                                const Vec& pressure, const Vec& ephi,
                                const ElasticParams& params, bool clamp_phi_curvature) {
  const DofMap dofmap(mesh, FieldKind::coupled3);
  const Vec lam_cell = params.lambda_cell();
  const Vec g_cell = params.g_cell();

  MechSystem sys;
  sys.jacobian = build_sparse_matrix(mesh, dofmap, hanging_only);

  CellKernel kernel = [&](const CellQuad& cq, Eigen::MatrixXd& a_loc, Eigen::VectorXd& b_loc) {
    const double lam = lam_cell[cq.cell];
    const double g_sh = g_cell[cq.cell];
    const double am1 = params.alpha - 1.0;
    QpState s;
    Matrix2d dstrain, dsp, dsm;
    for (int q = 0; q < cq.nq; ++q) {
      eval_qp(cq, q, state, pressure, ephi, params, lam, g_sh, s);
      residual_qp(cq, q, s, params, state.phi, b_loc);

      const double w = cq.jxw[q];
      const double drive = (1.0 - params.kappa) * (s.sigma_p.array() * s.strain.array()).sum() -
                           2.0 * am1 * s.p_q * s.div_u + 2.0 * s.grad_p.dot(s.u);

      for (int j = 0; j < 4; ++j) {
        const double nj = cq.n[q][j];
        const Vector2d& gj = cq.grad[q][j];
        // displacement trial directions
        for (int c = 0; c < 2; ++c) {
          dstrain.setZero();
          dstrain.row(c) += 0.5 * gj.transpose();
          dstrain.col(c) += 0.5 * gj;
          split_stress_derivative(s.strain, dstrain, lam, g_sh, dsp, dsm);
          const double sp_e_trial = (s.sigma_p.array() * dstrain.array()).sum();
          for (int i = 0; i < 4; ++i) {
            const double ni = cq.n[q][i];
            const Vector2d& gi = cq.grad[q][i];
            for (int d = 0; d < 2; ++d)
              a_loc(3 * i + d, 3 * j + c) +=
                  w * (s.g_e * dsp.row(d).dot(gi) + dsm.row(d).dot(gi));
            // phase-field row, displacement column
            double v = (1.0 - params.kappa) * s.phi_q * 2.0 * sp_e_trial;
            v += -2.0 * am1 * s.phi_q * s.p_q * gj[c] + 2.0 * s.phi_q * s.grad_p[c] * nj;
            a_loc(3 * i + 2, 3 * j + c) += w * v * ni;
          }
        }
        // phase-field trial direction; optionally floor the curvature
        // coefficient at zero (tip suction can make it negative)
        double curv = drive + params.g_c / params.eps;
        if (clamp_phi_curvature) curv = std::max(curv, 0.0);
        for (int i = 0; i < 4; ++i) {
          const double ni = cq.n[q][i];
          const Vector2d& gi = cq.grad[q][i];
          a_loc(3 * i + 2, 3 * j + 2) +=
              w * (curv * nj * ni + params.g_c * params.eps * gj.dot(gi));
        }
      }
    }
  };

  Vec rhs;
  assemble(mesh, dofmap, constraints, kernel, sys.jacobian, rhs);
  // raw residual (hanging-condensed only) keeps multiplier information at
  // constrained dofs
  sys.residual = assemble_mech_residual(mesh, hanging_only, state, pressure, ephi, params);
  return sys;
}

namespace {

// Box-constrained primal-dual activation for 0 <= phi <= bound.
// Upper (irreversibility) set: multiplier -R + c (phi - bound) > 0.
// Lower set: multiplier +R + c (0 - phi) > 0 at the floor of the box;
// without it, Newton directions pushing the phase field below zero at the
// propagating tip are nullified by the clamp and the line search stalls.
// Values: 0 free, 1 upper-active, 2 lower-active.
std::vector<char> activation_test(const QuadMesh& mesh, const Vec& residual, const Vec& phi,
                                  const Vec& bound, double c) {
  std::vector<char> active(mesh.n_vertices(), 0);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.constraints().is_constrained(v)) continue;  // hanging nodes follow masters
    const double r = residual[3 * v + 2];
    if (-r + c * (phi[v] - bound[v]) > 0)
      active[v] = 1;
    else if (r - c * phi[v] > 0)
      active[v] = 2;
  }
  return active;
}

}  // namespace

NewtonReport active_set_newton_solve(const QuadMesh& mesh, MechState& state,
                                     const Vec& pressure, const Vec& ephi,
                                     const ElasticParams& params, const Vec& bound,
                                     const NewtonOptions& opts) {
  NewtonReport report;
  const DofMap dofmap(mesh, FieldKind::coupled3);
  const DofConstraints hanging_only(mesh, dofmap);

  const double c =
      opts.complementarity_c > 0 ? opts.complementarity_c : 100.0 * params.g_c / params.eps;

  // admissible start: bound honored, hanging nodes consistent
  for (int v = 0; v < mesh.n_vertices(); ++v)
    state.phi[v] = std::clamp(state.phi[v], 0.0, bound[v]);
  mesh.constraints().distribute(state.u, 2);
  mesh.constraints().distribute(state.phi, 1);

  const std::vector<int> bverts = boundary_vertices(mesh);

  auto free_norm = [&](Vec r, const std::vector<char>& active) {
    hanging_only.set_zero(r);
    for (int v : bverts) {
      r[3 * v] = 0;
      r[3 * v + 1] = 0;
    }
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (active[v]) r[3 * v + 2] = 0;
    return r;
  };

  auto project = [&](const std::vector<char>& act) {
    bool changed = false;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      const double target = act[v] == 1 ? bound[v] : 0.0;
      if (act[v] && state.phi[v] != target) {
        state.phi[v] = target;
        changed = true;
      }
    }
    return changed;
  };

  Vec residual = assemble_mech_residual(mesh, hanging_only, state, pressure, ephi, params);
  std::vector<char> active = activation_test(mesh, residual, state.phi, bound, c);
  std::vector<char> prev_active = active;
  if (project(active)) {
    mesh.constraints().distribute(state.phi, 1);
    residual = assemble_mech_residual(mesh, hanging_only, state, pressure, ephi, params);
  }

  double tol = 0;
  for (int it = 1; it <= opts.max_newton; ++it) {
    report.newton_iterations = it;
    Vec r_free = free_norm(residual, active);
    const double rnorm = r_free.norm();
    if (it == 1) tol = std::max(opts.tol_rel * rnorm, opts.tol_abs_floor);

    NewtonIterLog log;
    log.residual = rnorm;
    log.active_set_size = static_cast<int>(
        std::count_if(active.begin(), active.end(), [](char a) { return a != 0; }));

    if (rnorm <= tol && active == prev_active) {
      report.converged = true;
      report.final_residual = rnorm;
      report.active_set_size = log.active_set_size;
      report.log.push_back(log);
      return report;
    }
    prev_active = active;

    // constrained Jacobian: hanging + boundary displacements + active set
    DofConstraints constraints(mesh, dofmap);
    for (int v : bverts) {
      constraints.add_dirichlet(3 * v, 0.0);
      constraints.add_dirichlet(3 * v + 1, 0.0);
    }
    for (int v = 0; v < mesh.n_vertices(); ++v)
      if (active[v]) constraints.add_dirichlet(3 * v + 2, 0.0);
    constraints.close();

    MechSystem sys = assemble_mech_system(mesh, constraints, hanging_only, state, pressure,
                                          ephi, params, /*clamp_phi_curvature=*/true);
    Vec rhs = -free_norm(sys.residual, active);

    auto precond = make_block_jacobi(sys.jacobian, 3);
    SolveResult lin = gmres(sys.jacobian, rhs, precond, opts.gmres_tol, opts.gmres_restart,
                            opts.gmres_max_iter);
    report.gmres_iterations_total += lin.iterations;
    log.gmres_iterations = lin.iterations;
    Vec delta = lin.x;
    constraints.distribute(delta);

    // backtracking line search on the free residual norm
    MechState best = state;
    Vec best_residual = residual;
    double best_norm = rnorm;
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      MechState trial;
      trial.u.resize(state.u.size());
      for (int v = 0; v < mesh.n_vertices(); ++v) {
        trial.u[2 * v] = state.u[2 * v] + step * delta[3 * v];
        trial.u[2 * v + 1] = state.u[2 * v + 1] + step * delta[3 * v + 1];
      }
      trial.phi = state.phi;
      for (int v = 0; v < mesh.n_vertices(); ++v)
        trial.phi[v] = std::clamp(state.phi[v] + step * delta[3 * v + 2], 0.0, bound[v]);
      mesh.constraints().distribute(trial.u, 2);
      mesh.constraints().distribute(trial.phi, 1);

      Vec r_trial =
          assemble_mech_residual(mesh, hanging_only, trial, pressure, ephi, params);
      const double tn = free_norm(r_trial, active).norm();
      log.line_search_steps = ls;
      if (tn < best_norm) {
        best = std::move(trial);
        best_residual = std::move(r_trial);
        best_norm = tn;
      }
      if (tn < rnorm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    (void)accepted;
    state = std::move(best);
    residual = std::move(best_residual);
    report.log.push_back(log);

    // primal-dual update: new active sets from the fresh residual, then
    // project the phase-field onto the box there
    active = activation_test(mesh, residual, state.phi, bound, c);
    if (project(active)) {
      mesh.constraints().distribute(state.phi, 1);
      residual = assemble_mech_residual(mesh, hanging_only, state, pressure, ephi, params);
    }
    report.final_residual = free_norm(residual, active).norm();
    report.active_set_size = static_cast<int>(
        std::count_if(active.begin(), active.end(), [](char a) { return a != 0; }));
  }
  report.converged = false;
  return report;
}

}  // namespace porefrac
