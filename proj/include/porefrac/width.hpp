#pragma once

#include "porefrac/fem.hpp"

namespace porefrac {

enum class LevelSetMode { shift, poisson };

struct WidthParams {
  double c_ls = 0.1;    // level-set threshold on the phase-field
  double theta = 1e3;   // interface penalty
  double beta = 100;    // interior source factor
  double f1 = -10;      // level-set source, fracture side
  double f2 = 10;       // level-set source, reservoir side
  LevelSetMode mode = LevelSetMode::shift;

  void validate() const;
};

/// A mesh face on the discrete fracture boundary: separates a material-id 0
/// cell from a material-id 1 cell.
struct InterfaceFace {
  int face = -1;       // index into mesh.faces()
  int cell_frac = -1;  // id-0 side
  int cell_res = -1;   // id-1 side
};

/// Set material ids from the cell-minimum phase-field value against c_ls
/// (0 = fracture, 1 = reservoir).
void assign_material_ids(QuadMesh& mesh, const Vec& phi, double c_ls);

/// Faces of the current fracture boundary; requires material ids assigned.
std::vector<InterfaceFace> build_interface_set(const QuadMesh& mesh);

/// Connected components of fracture (id-0) cells via face adjacency;
/// component index per active-cell position, -1 for reservoir cells.
std::vector<int> fracture_components(const QuadMesh& mesh, int* n_components = nullptr);

/// Level-set directly from the phase-field: phi_ls = phi - c_ls.
Vec levelset_shift(const Vec& phi, double c_ls);

/// Level-set from the interface-penalized Poisson problem
///   (grad phi_ls, grad psi) + theta int_Gamma phi_ls psi = (f, psi),
/// with f = f1 inside the fracture and f2 in the reservoir so that
/// phi_ls < 0 in the fracture interior and > 0 in the far reservoir.
/// Throws ConfigError when no fracture boundary exists.
Vec levelset_poisson(const QuadMesh& mesh, const std::vector<InterfaceFace>& interface,
                     const Vec& phi, const WidthParams& params);

/// Aperture at one interface quadrature point from the displacement and the
/// level-set gradient: w = |2 u . grad / |grad||; zero when the gradient is
/// degenerate. The sign is normalized so a physically opening crack yields a
/// nonnegative width.
double boundary_width(const Vector2d& u, const Vector2d& grad_ls);

/// Apertures at the 2-point Gauss points of every interface face; the
/// level-set gradient is taken from the reservoir-side cell.
std::vector<std::array<double, 2>> interface_widths(const QuadMesh& mesh,
                                                    const std::vector<InterfaceFace>& interface,
                                                    const Vec& u, const Vec& phi_ls);

/// Width interpolation problem: (grad W, grad psi) + theta int_Gamma W psi =
/// theta int_Gamma w_D psi + (g, psi), W = 0 on the outer boundary, with
/// g = beta * max(w_D) over each connected fracture component's cells.
Vec solve_width(const QuadMesh& mesh, const std::vector<InterfaceFace>& interface,
                const std::vector<std::array<double, 2>>& w_d, const WidthParams& params);

}  // namespace porefrac
