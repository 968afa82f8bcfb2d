#include "porefrac/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "porefrac/errors.hpp"
#include "porefrac/scenario.hpp"
#include "porefrac/width.hpp"

namespace porefrac {

void build_material_fields(const ScenarioConfig& cfg, const QuadMesh& mesh, Vec& e_cell,
                           Vec& k_r_cell) {
  if (cfg.heterogeneity.enabled) {
    const double eps_for_blocks =
        cfg.epsilon > 0 ? cfg.epsilon : cfg.epsilon_factor * mesh.h_min();
    heterogeneous_fields(cfg.heterogeneity, cfg.domain_lower, eps_for_blocks, mesh, e_cell,
                         k_r_cell);
  } else {
    e_cell = Vec::Constant(mesh.n_cells_total(), cfg.young_modulus);
    k_r_cell = Vec::Constant(mesh.n_cells_total(), cfg.k_r);
  }
}

SimState make_initial_state(const ScenarioConfig& cfg) {
  cfg.validate();
  SimState state(build_rect_mesh(cfg.domain_lower, cfg.domain_upper, cfg.n_uniform,
                                 [&] {
                                   std::vector<std::pair<Eigen::Vector4d, int>> boxes;
                                   for (const auto& b : cfg.refine_boxes)
                                     boxes.emplace_back(b.rect, b.levels);
                                   return boxes;
                                 }()));
  state.eps = cfg.epsilon > 0 ? cfg.epsilon : cfg.epsilon_factor * state.mesh.h_min();
  if (state.eps < 2 * state.mesh.h_min() * (1 - 1e-9))
    throw ConfigError("epsilon must resolve the initial mesh (eps >= 2 h_min)");
  state.kappa = cfg.kappa_factor * state.mesh.h_min();

  const int nv = state.mesh.n_vertices();
  state.fields.p = Vec::Zero(nv);
  state.fields.u = Vec::Zero(2 * nv);
  state.fields.phi = cfg.fractures.empty()
                         ? Vec::Ones(nv)
                         : initial_phasefield(state.mesh, cfg.fractures, state.eps / 2);
  state.mesh.constraints().distribute(state.fields.phi, 1);
  state.phi_prev = state.fields.phi;
  state.fields.phi_ls = levelset_shift(state.fields.phi, cfg.c_ls);
  state.fields.w = Vec::Zero(nv);
  build_material_fields(cfg, state.mesh, state.e_cell, state.k_r_cell);
  return state;
}

FlowParams make_flow_params(const ScenarioConfig& cfg, const SimState& state) {
  FlowParams fp;
  fp.alpha = cfg.alpha;
  fp.biot_modulus = cfg.biot_modulus;
  fp.c_f = cfg.c_f;
  fp.eta_r = cfg.eta_r;
  fp.eta_f = cfg.eta_f;
  fp.rho_r = cfg.rho_r;
  fp.rho_f = cfg.rho_f;
  fp.gravity = cfg.gravity;
  fp.c_x = cfg.c_x;
  fp.k_r_cell = state.k_r_cell;
  fp.stab_denom_override = cfg.stab_denom_override;
  const double radius = cfg.source_radius_factor * state.eps;
  for (const auto& f : cfg.fractures)
    fp.sources_f.push_back(SourceDisc{f.center, radius, cfg.q_f * cfg.source_scale});
  if (cfg.q_r != 0.0) {
    const double big = (cfg.domain_upper - cfg.domain_lower).norm();
    fp.sources_r.push_back(
        SourceDisc{0.5 * (cfg.domain_lower + cfg.domain_upper), big, cfg.q_r});
  }
  return fp;
}

FixedStressResult fixed_stress_step(SimState& state, const ScenarioConfig& cfg, double dt) {
  FixedStressResult out;
  QuadMesh& mesh = state.mesh;
  const int nv = mesh.n_vertices();

  WidthParams wp;
  wp.c_ls = cfg.c_ls;
  wp.theta = cfg.theta;
  wp.beta = cfg.beta;
  wp.f1 = cfg.f1;
  wp.f2 = cfg.f2;
  wp.mode = cfg.levelset_mode;

  ElasticParams ep;
  ep.e_cell = state.e_cell;
  ep.nu = cfg.poisson_ratio;
  ep.g_c = cfg.g_c;
  ep.eps = state.eps;
  ep.kappa = state.kappa;
  ep.alpha = cfg.alpha;
  const Vec lambda_cell = ep.lambda_cell();
  const Vec g_cell = ep.g_cell();

  FlowParams fp = make_flow_params(cfg, state);

  NewtonOptions nopts;
  nopts.tol_rel = cfg.newton_tol_rel;
  nopts.max_newton = cfg.max_newton;

  const Vec& p_n = state.fields.p;
  const Vec& u_n = state.fields.u;
  const Vec bound = state.fields.phi;  // irreversibility bound phi <= phi^n
  const Vec ephi = extrapolate_phi(state.fields.phi, state.phi_prev, state.step >= 2);

  const DofMap scalar_map(mesh, FieldKind::scalar);
  const DofConstraints scalar_constraints(mesh, scalar_map);

  // discrete fracture geometry for the whole step: material ids and the
  // interface come from the time-level phase-field; the level-set and width
  // values are recomputed every iterate on this fixed face set
  assign_material_ids(mesh, state.fields.phi, cfg.c_ls);
  const std::vector<InterfaceFace> interface = build_interface_set(mesh);

  // iterate l = 0 starts from the previous time-step fields
  Vec p_it = p_n;
  Vec u_it = u_n;
  Vec phi_it = state.fields.phi;
  Vec phi_ls = state.fields.phi_ls;
  Vec w_it = state.fields.w;

  double prev_inc = std::numeric_limits<double>::max();
  int grow_count = 0;
  // discrete interface flips at a propagating front can lock the plain
  // iteration into a small limit cycle; once the increments stop contracting
  // the remaining updates are under-relaxed (same fixed point)
  double relax = 1.0;
  std::vector<double> inc_history;

  for (int l = 1; l <= cfg.coupling.max_fs_iters; ++l) {
    out.report.fs_iterations = l;

    // level-set and width from the current iterate
    if (wp.mode == LevelSetMode::poisson && !interface.empty())
      phi_ls = levelset_poisson(mesh, interface, phi_it, wp);
    else
      phi_ls = levelset_shift(phi_it, wp.c_ls);
    Vec w_new;
    if (interface.empty()) {
      w_new = Vec::Zero(nv);
    } else {
      const auto w_d = interface_widths(mesh, interface, u_it, phi_ls);
      w_new = solve_width(mesh, interface, w_d, wp);
    }

    // pressure diffraction with fixed-stress stabilization; a closed crack is
    // floored at the rock permeability so the first iterate (width still
    // zero) does not act as an impermeable seal around the injection
    Vec w_press = w_new;
    const double w_floor = std::sqrt(12.0 * state.k_r_cell.minCoeff());
    for (int v = 0; v < nv; ++v) w_press[v] = std::max(w_press[v], w_floor);
    PressureSystem psys =
        assemble_fixed_stress_pressure(mesh, scalar_constraints, fp, lambda_cell, g_cell,
                                       p_n, u_it, u_n, p_it, phi_it, w_press, dt);
    // the system is symmetric positive definite (storage + diffusion)
    SolveResult pres;
    try {
      pres = cg_ssor(psys.a, psys.b, 1e-10, 1.2, 10000);
    } catch (const SolveError&) {
      pres = gmres(psys.a, psys.b, make_block_jacobi(psys.a, 1), 1e-10, 30, 10000);
    }
    if (!pres.converged) {
      out.converged = false;
      out.report.gmres_iterations_total += pres.iterations;
      return out;
    }
    out.report.gmres_iterations_total += pres.iterations;
    Vec p_new = pres.x;
    scalar_constraints.distribute(p_new);

    // displacement / phase-field solve; on failure damp the pressure update
    // and retry from the previous iterate (violent growth steps)
    NewtonReport nrep;
    MechState mstate;
    while (true) {
      Vec p_try = relax < 1.0 ? (p_it + relax * (p_new - p_it)).eval() : p_new;
      mstate.u = u_it;
      mstate.phi = phi_it;
      nrep = active_set_newton_solve(mesh, mstate, p_try, ephi, ep, bound, nopts);
      out.report.newton_iterations_total += nrep.newton_iterations;
      out.report.gmres_iterations_total += nrep.gmres_iterations_total;
      if (nrep.converged) {
        p_new = std::move(p_try);
        break;
      }
      if (relax <= 1.0 / 16.0) {
        out.converged = false;
        return out;
      }
      relax = std::max(0.5 * relax, 1.0 / 16.0);
    }

    if (relax < 1.0) {
      p_new = p_it + relax * (p_new - p_it);
      mstate.u = u_it + relax * (mstate.u - u_it);
      mstate.phi = phi_it + relax * (mstate.phi - phi_it);  // stays in [0, bound]
      w_new = w_it + relax * (w_new - w_it);
    }

    const double dp = l2_norm(mesh, (p_new - p_it).eval(), 1);
    const double du = l2_norm(mesh, (mstate.u - u_it).eval(), 2);
    const double dphi = l2_norm(mesh, (mstate.phi - phi_it).eval(), 1);

    p_it = std::move(p_new);
    u_it = std::move(mstate.u);
    phi_it = std::move(mstate.phi);
    w_it = std::move(w_new);

    if (dp <= cfg.coupling.tol_fs_pressure && du <= cfg.coupling.tol_fs_displacement &&
        dphi <= cfg.coupling.tol_fs_phasefield) {
      out.converged = true;
      break;
    }

    const double inc = std::max({dp / cfg.coupling.tol_fs_pressure,
                                 du / cfg.coupling.tol_fs_displacement,
                                 dphi / cfg.coupling.tol_fs_phasefield});
    inc_history.push_back(inc);
    if (std::getenv("POREFRAC_TRACE_FS"))
      std::fprintf(stderr, "  fs l=%d relax=%.3g dp=%.4g du=%.4g dphi=%.4g newton=%d\n", l,
                   relax, dp, du, dphi, nrep.newton_iterations);
    // halve the relaxation whenever a 4-iteration window fails to improve on
    // the previous one (marginal propagation cycles between branches)
    const std::size_t n = inc_history.size();
    if (n >= 8 && n % 4 == 0) {
      double recent = std::numeric_limits<double>::max();
      double before = std::numeric_limits<double>::max();
      for (std::size_t k = n - 4; k < n; ++k) recent = std::min(recent, inc_history[k]);
      for (std::size_t k = n - 8; k < n - 4; ++k) before = std::min(before, inc_history[k]);
      if (recent > 0.5 * before) relax = std::max(0.5 * relax, 1.0 / 16.0);
    }

    // divergence guard: increments may not grow for more than 3 consecutive
    // iterations
    grow_count = inc > prev_inc ? grow_count + 1 : 0;
    prev_inc = inc;
    if (grow_count > 3) {
      out.converged = false;
      return out;
    }
  }

  out.fields.p = std::move(p_it);
  out.fields.u = std::move(u_it);
  out.fields.phi = std::move(phi_it);
  out.fields.phi_ls = std::move(phi_ls);
  out.fields.w = std::move(w_it);
  out.report.active_cells = mesh.n_active();
  out.report.max_pressure = out.fields.p.maxCoeff();
  out.report.max_width = out.fields.w.size() ? out.fields.w.maxCoeff() : 0.0;
  return out;
}

RunResult run_time_loop(SimState& state, const ScenarioConfig& cfg, const StepCallback& on_step) {
  RunResult result;
  const double dt = cfg.coupling.dt;
  const int n_steps = static_cast<int>(std::llround(cfg.coupling.t_end / dt));

  for (int step = state.step; step < n_steps; ++step) {
    FixedStressResult fs;
    int rounds = 0;
    while (true) {
      fs = fixed_stress_step(state, cfg, dt);
      if (!fs.converged) {
        result.ok = false;
        result.error = "fixed-stress iteration did not converge at step " +
                       std::to_string(step + 1);
        return result;
      }
      const std::vector<char> flags =
          predictor_corrector_flags(state.mesh, fs.fields.phi, state.eps, cfg.c_ref);
      const bool any = std::any_of(flags.begin(), flags.end(), [](char f) { return f != 0; });
      if (!any || rounds >= cfg.coupling.pc_max_rounds) break;

      // refine and recompute the step from the pre-step history
      SimState next(state.mesh.refined(flags));
      next.eps = state.eps;
      next.kappa = cfg.kappa_factor * next.mesh.h_min();
      next.step = state.step;
      next.time = state.time;
      next.fields.p = state.mesh.interpolate_to(next.mesh, state.fields.p, 1);
      next.fields.u = state.mesh.interpolate_to(next.mesh, state.fields.u, 2);
      next.fields.phi = state.mesh.interpolate_to(next.mesh, state.fields.phi, 1);
      next.fields.phi_ls = state.mesh.interpolate_to(next.mesh, state.fields.phi_ls, 1);
      next.fields.w = state.mesh.interpolate_to(next.mesh, state.fields.w, 1);
      next.phi_prev = state.mesh.interpolate_to(next.mesh, state.phi_prev, 1);
      next.mesh.constraints().distribute(next.fields.p, 1);
      next.mesh.constraints().distribute(next.fields.u, 2);
      next.mesh.constraints().distribute(next.fields.phi, 1);
      next.mesh.constraints().distribute(next.phi_prev, 1);
      build_material_fields(cfg, next.mesh, next.e_cell, next.k_r_cell);
      state = std::move(next);
      ++rounds;
    }

    // irreversibility across the step
    double viol = 0;
    for (int v = 0; v < state.mesh.n_vertices(); ++v)
      viol = std::max(viol, fs.fields.phi[v] - state.fields.phi[v]);
    result.max_irreversibility_violation =
        std::max(result.max_irreversibility_violation, viol);

    state.phi_prev = state.fields.phi;
    state.fields = std::move(fs.fields);
    state.step = step + 1;
    state.time = (step + 1) * dt;

    fs.report.time = state.time;
    if (!cfg.fractures.empty())
      fs.report.half_length =
          half_crack_length(state.mesh, state.fields.phi, cfg.fractures.front(), cfg.c_ls);
    result.reports.push_back(fs.report);
    if (on_step) on_step(state, fs.report);
  }
  return result;
}

}  // namespace porefrac
