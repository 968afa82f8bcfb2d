#pragma once

#include <string>

#include "porefrac/scenario.hpp"

namespace porefrac {

/// Legacy ASCII VTK unstructured-grid snapshot: point data P, PHI, PHI_LS, W,
/// vector U; cell data material_id, E, K_R.
void write_vtk(const std::string& path, const QuadMesh& mesh, const FieldState& fields,
               const Vec& e_cell, const Vec& k_r_cell);

/// qoi.csv: time, fs_iters, newton_iters, gmres_iters, max_p, max_w,
/// half_length, cod_center.
void write_qoi_csv(const std::string& path, const QoiSeries& series);

/// cod.csv: x, cod, analytic_cod.
struct CodSample {
  double x = 0, cod = 0, analytic = 0;
};
void write_cod_csv(const std::string& path, const std::vector<CodSample>& samples);

/// axis_pressure.csv: time, min_p, argmin_x (tip-pressure diagnostics).
struct AxisPressureSample {
  double time = 0, min_p = 0, argmin_x = 0;
};
void write_axis_pressure_csv(const std::string& path,
                             const std::vector<AxisPressureSample>& samples);

}  // namespace porefrac
