#pragma once

#include "porefrac/fem.hpp"

namespace porefrac {

/// Disc-supported source: constant volumetric rate density inside the disc.
struct SourceDisc {
  Vector2d center{0, 0};
  double radius = 0;
  double rate_density = 0;  // [1/s] (volumetric rate per volume)
};

/// Poroelastic and fracture-flow constants. Reservoir permeability may vary
/// per cell; everything else is uniform.
struct FlowParams {
  double alpha = 0;            // Biot coefficient [-]
  double biot_modulus = 1e8;   // M [Pa]
  double c_f = 1e-8;           // fracture fluid compressibility [1/Pa]
  double eta_r = 1e-3;         // [Pa s]
  double eta_f = 1e-3;         // [Pa s]
  double rho_r = 1.0;          // reference densities [kg/m^3]
  double rho_f = 1.0;
  Vector2d gravity{0, 0};      // [m/s^2]
  double c_x = 0.1;            // indicator half-width
  Vec k_r_cell;                // per active cell [m^2]
  std::vector<SourceDisc> sources_f;  // enter the fracture part of the weak form
  std::vector<SourceDisc> sources_r;  // enter the reservoir part
  double stab_denom_override = 0;     // >0 replaces 3*lambda + 2*G

  void validate() const;
};

/// Linear indicator blend between reservoir and fracture: chi_f = 1 for
/// phi <= c1 = 0.5 - c_x, chi_r = 1 for phi >= c2 = 0.5 + c_x, linear in
/// between; outputs clamped to [0,1] and chi_r + chi_f = 1.
std::pair<double, double> chi_indicators(double phi, double c_x);  // (chi_r, chi_f)

/// Cubic law, isotropic: k_f = w^2 / 12; negative widths are clamped first.
double fracture_permeability(double w);

/// Blended permeability-viscosity ratio of the cake region.
double effective_mobility(double chi_r, double chi_f, double k_r, double eta_r,
                          double k_f, double eta_f);

struct PressureSystem {
  CsrMatrix a;
  Vec b;
  double mass_coeff_min = 0;  // extrema of the time-derivative coefficient
  double mass_coeff_max = 0;
};

/// Fixed-stress stabilized pressure step: assemble the linear system for
/// P^{l+1} given the previous time-step fields (P_n, U_n), the current
/// iterates (P_l, U_l, Phi_l, W_l) and dt. Coefficients chi, K_eff are
/// evaluated at quadrature points from the nodal fields; natural (zero-flux)
/// boundary conditions.
PressureSystem assemble_fixed_stress_pressure(
    const QuadMesh& mesh, const DofConstraints& constraints, const FlowParams& params,
    const Vec& lambda_cell, const Vec& g_cell, const Vec& p_n, const Vec& u_l,
    const Vec& u_n, const Vec& p_l, const Vec& phi_l, const Vec& w_l, double dt);

}  // namespace porefrac
