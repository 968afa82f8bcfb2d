#include "porefrac/flow.hpp"

#include <algorithm>
#include <cmath>

#include "porefrac/errors.hpp"

namespace porefrac {

void FlowParams::validate() const {
  if (!(biot_modulus > 0)) throw ConfigError("biot_modulus must be positive");
  if (c_f < 0) throw ConfigError("c_f must be nonnegative");
  if (!(eta_r > 0) || !(eta_f > 0)) throw ConfigError("viscosities must be positive");
  if (alpha < 0 || alpha > 1) throw ConfigError("alpha must lie in [0,1]");
  if (!(c_x > 0) || !(c_x < 0.5)) throw ConfigError("c_x must lie in (0, 0.5)");
  for (int i = 0; i < k_r_cell.size(); ++i)
    if (!(k_r_cell[i] > 0)) throw ConfigError("reservoir permeability must be positive");
}

std::pair<double, double> chi_indicators(double phi, double c_x) {
  const double c1 = 0.5 - c_x;
  const double c2 = 0.5 + c_x;
  double chi_f = -(phi - c2) / (c2 - c1);
  double chi_r = (phi - c1) / (c2 - c1);
  chi_f = std::clamp(chi_f, 0.0, 1.0);
  chi_r = std::clamp(chi_r, 0.0, 1.0);
  return {chi_r, chi_f};
}

double fracture_permeability(double w) {
  const double wc = std::max(w, 0.0);
  return wc * wc / 12.0;
}

double effective_mobility(double chi_r, double chi_f, double k_r, double eta_r, double k_f,
                          double eta_f) {
  return chi_r * k_r / eta_r + chi_f * k_f / eta_f;
}

namespace {

double disc_rate(const std::vector<SourceDisc>& sources, const Vector2d& x) {
  double q = 0;
  for (const auto& s : sources)
    if ((x - s.center).squaredNorm() <= s.radius * s.radius) q += s.rate_density;
  return q;
}

}  // namespace

PressureSystem assemble_fixed_stress_pressure(
    const QuadMesh& mesh, const DofConstraints& constraints, const FlowParams& params,
    const Vec& lambda_cell, const Vec& g_cell, const Vec& p_n, const Vec& u_l,
    const Vec& u_n, const Vec& p_l, const Vec& phi_l, const Vec& w_l, double dt) {
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  params.validate();

  PressureSystem sys;
  sys.mass_coeff_min = std::numeric_limits<double>::max();
  sys.mass_coeff_max = std::numeric_limits<double>::lowest();

  const DofMap dofmap(mesh, FieldKind::scalar);
  sys.a = build_sparse_matrix(mesh, dofmap, constraints);

  const double inv_m = 1.0 / params.biot_modulus;
  const double alpha = params.alpha;

  CellKernel kernel = [&](const CellQuad& cq, Eigen::MatrixXd& a_loc, Eigen::VectorXd& b_loc) {
    const double lam = lambda_cell[cq.cell];
    const double g_sh = g_cell[cq.cell];
    const double denom =
        params.stab_denom_override > 0 ? params.stab_denom_override : 3 * lam + 2 * g_sh;
    const double stab = 3 * alpha * alpha / denom;
    const double k_r = params.k_r_cell[cq.cell];

    for (int q = 0; q < cq.nq; ++q) {
      const double phi = cq.eval(phi_l, q);
      const auto [chi_r, chi_f] = chi_indicators(phi, params.c_x);
      const double k_f = fracture_permeability(cq.eval(w_l, q));

      // time-derivative coefficient (reservoir part carries the fixed-stress
      // augmentation 3 alpha^2 / (3 lambda + 2 G))
      const double mass =
          chi_r * params.rho_r * (inv_m + stab) + chi_f * params.rho_f * params.c_f;
      sys.mass_coeff_min = std::min(sys.mass_coeff_min, mass);
      sys.mass_coeff_max = std::max(sys.mass_coeff_max, mass);

      const double diff_r = chi_r * params.rho_r * k_r / params.eta_r;
      const double diff_f = chi_f * params.rho_f * k_f / params.eta_f;

      const double pn_q = cq.eval(p_n, q);
      const double pl_q = cq.eval(p_l, q);
      const Eigen::Matrix2d grad_ul = cq.eval_grad_vec2(u_l, q);
      const Eigen::Matrix2d grad_un = cq.eval_grad_vec2(u_n, q);
      const double div_dot = (grad_ul.trace() - grad_un.trace()) / dt;

      const double q_f = disc_rate(params.sources_f, cq.xq[q]);
      const double q_r = disc_rate(params.sources_r, cq.xq[q]);

      const double w = cq.jxw[q];
      for (int i = 0; i < 4; ++i) {
        const double ni = cq.n[q][i];
        const Vector2d& gi = cq.grad[q][i];
        for (int j = 0; j < 4; ++j) {
          a_loc(i, j) += w * (mass / dt * cq.n[q][j] * ni +
                              (diff_r + diff_f) * cq.grad[q][j].dot(gi));
        }
        double rhs = mass / dt * pn_q * ni;                    // previous-step storage
        rhs -= chi_r * alpha * div_dot * ni;                   // volumetric coupling
        rhs += chi_r * stab * (pl_q - pn_q) / dt * ni;         // lagged stabilization
        rhs += chi_r * q_r * ni + chi_f * q_f * ni;            // sources
        rhs += diff_r * params.rho_r * params.gravity.dot(gi)  // gravity fluxes
               + diff_f * params.rho_f * params.gravity.dot(gi);
        b_loc[i] += w * rhs;
      }
    }
  };

  assemble(mesh, dofmap, constraints, kernel, sys.a, sys.b);

  if (sys.mass_coeff_max <= 0)
    throw ConfigError("pressure system has nonpositive storage everywhere "
                      "(singular with natural boundary conditions)");
  return sys;
}

}  // namespace porefrac
