#pragma once

#include "porefrac/fem.hpp"
#include "porefrac/solvers.hpp"

namespace porefrac {

using Eigen::Matrix2d;

/// Elastic and fracture constants. Young's modulus varies per cell in the
/// heterogeneous scenarios; the Lame fields are derived from it.
struct ElasticParams {
  Vec e_cell;          // Young's modulus per active cell [Pa]
  double nu = 0.2;     // Poisson ratio [-]
  double g_c = 1.0;    // critical energy release rate [N/m]
  double eps = 0.1;    // phase-field regularization length [m]
  double kappa = 1e-12;  // residual stiffness [-]
  double alpha = 0;    // Biot coefficient [-]

  double lambda_of(double e) const { return nu * e / ((1 + nu) * (1 - 2 * nu)); }
  double g_of(double e) const { return e / (2 * (1 + nu)); }
  Vec lambda_cell() const;
  Vec g_cell() const;
};

/// Displacement/phase-field unknowns with the time history needed for the
/// extrapolation and the irreversibility bound.
struct MechState {
  Vec u;    // interleaved (u_x, u_y), size 2*n_vertices
  Vec phi;  // size n_vertices
};

/// Amor volumetric/deviatoric split in 2D:
///   sigma+ = (G + lambda) tr+(e) I + 2 G dev(e),  sigma- = (G + lambda) tr-(e) I,
/// with tr+ = max(tr e, 0). The identity sigma+ + sigma- = lambda tr(e) I + 2 G e
/// holds exactly.
void split_stress(const Matrix2d& strain, double lambda, double g,
                  Matrix2d& sigma_plus, Matrix2d& sigma_minus);

/// Directional derivatives of the split at a given strain (semi-smooth at
/// tr e = 0; the positive branch is taken there).
void split_stress_derivative(const Matrix2d& strain, const Matrix2d& dstrain,
                             double lambda, double g, Matrix2d& dsigma_plus,
                             Matrix2d& dsigma_minus);

/// Two-point linear time extrapolation, clamped nodewise to [0,1]. For the
/// first two steps (no usable history) the lagged value phi_n is returned.
Vec extrapolate_phi(const Vec& phi_n, const Vec& phi_nm1, bool have_history);

/// Stiffness degradation acting on the tensile stress: (1-kappa) phi^2 + kappa.
inline double degradation(double phi, double kappa) {
  return (1.0 - kappa) * phi * phi + kappa;
}

struct MechSystem {
  CsrMatrix jacobian;
  Vec residual;  // Galerkin residual (gradient convention), hanging-condensed
};

/// Residual and exact Jacobian of the quasi-monolithic system at the given
/// state, holding the extrapolated phase-field fixed. `constraints` carries
/// hanging + Dirichlet + active-set lines; the returned residual is the raw
/// one (only hanging nodes condensed) whose entries at constrained dofs are
/// the constraint multipliers (up to sign). With `clamp_phi_curvature` the
/// phase-field curvature coefficient is floored at zero pointwise (a
/// positive-semidefinite iteration matrix for the Newton solver when tip
/// suction makes the exact Hessian indefinite); the residual is unaffected.
MechSystem assemble_mech_system(const QuadMesh& mesh, const DofConstraints& constraints,
                                const DofConstraints& hanging_only, const MechState& state,
                                const Vec& pressure, const Vec& ephi,
                                const ElasticParams& params,
                                bool clamp_phi_curvature = false);

/// Residual only (cheap path for line search / activation tests).
Vec assemble_mech_residual(const QuadMesh& mesh, const DofConstraints& hanging_only,
                           const MechState& state, const Vec& pressure, const Vec& ephi,
                           const ElasticParams& params);

struct NewtonIterLog {
  double residual = 0;
  int active_set_size = 0;
  int line_search_steps = 0;
  int gmres_iterations = 0;
};

struct NewtonReport {
  int newton_iterations = 0;     // loop entries, including the converging check
  int gmres_iterations_total = 0;
  bool converged = false;
  double final_residual = 0;
  int active_set_size = 0;
  std::vector<NewtonIterLog> log;
};

struct NewtonOptions {
  double tol_rel = 1e-8;
  double tol_abs_floor = 1e-12;
  int max_newton = 50;
  int max_line_search = 10;
  double complementarity_c = 0;  // 0: use 100 * g_c / eps
  double gmres_tol = 1e-8;
  int gmres_restart = 30;
  int gmres_max_iter = 4000;
};

/// Combined semi-smooth Newton / primal-dual active set solve of the
/// variational inequality with the nodewise bound phi <= bound. The state is
/// updated in place; on exit phi satisfies the bound, inactive residual
/// components are below tolerance, and the active set is unchanged between
/// the final two sweeps.
NewtonReport active_set_newton_solve(const QuadMesh& mesh, MechState& state,
                                     const Vec& pressure, const Vec& ephi,
                                     const ElasticParams& params, const Vec& bound,
                                     const NewtonOptions& opts = {});

}  // namespace porefrac
