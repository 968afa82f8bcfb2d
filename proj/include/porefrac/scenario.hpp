#pragma once

#include "porefrac/driver.hpp"

namespace porefrac {

/// Per-step quantity-of-interest record.
struct QoiRecord {
  double time = 0;
  int fs_iters = 0;
  int newton_iters = 0;
  int gmres_iters = 0;
  double max_p = 0;
  double max_w = 0;
  double half_length = 0;
  double cod_center = 0;
  double min_axis_pressure = 0;
};

using QoiSeries = std::vector<QoiRecord>;

/// Nodal initial phase-field: zero strictly inside any fracture slab, one
/// elsewhere. Throws ConfigError when a fracture contains no mesh node.
Vec initial_phasefield(const QuadMesh& mesh, const std::vector<FractureSpec>& fractures,
                       double default_half_thickness);

/// Plane-strain opening of a pressurized line crack of half-length l0:
/// cod(x) = 4 p l0 (1 - nu^2) / E * sqrt(1 - ((x - xc)/l0)^2); zero outside.
double sneddon_cod_analytic(double x, double x_center, double p, double l0, double e,
                            double nu);

/// Crack opening displacement at the vertical line x = x0 by composite
/// midpoint quadrature of u . grad(phi) with step h_min/2.
double cod_profile(const QuadMesh& mesh, const Vec& u, const Vec& phi, double x0);

/// Half extent of the connected {phi < c_ls} region along the fracture axis,
/// sampled at h_min/2 resolution; zero when no point is below the threshold.
double half_crack_length(const QuadMesh& mesh, const Vec& phi, const FractureSpec& fracture,
                         double c_ls);

/// Minimum pressure sampled along the fracture axis (fluid-lag diagnostics).
double min_axis_pressure(const QuadMesh& mesh, const Vec& p, const FractureSpec& fracture);

/// Piecewise-constant random fields per square block, i.i.d. uniform in the
/// given ranges and deterministic in the seed. Throws ConfigError when the
/// blocks are finer than eps.
void heterogeneous_fields(const HeterogeneitySpec& het, const Vector2d& domain_lower,
                          double eps, const QuadMesh& mesh, Vec& e_cell, Vec& k_cell);

/// Command-line entry point (see README). Returns 0 on success, 2 on usage or
/// configuration errors, 3 on solver failure (partial outputs retained).
int run_cli(int argc, const char* const* argv);

}  // namespace porefrac
