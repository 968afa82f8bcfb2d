#include "porefrac/output.hpp"

#include <cstdio>

#include "porefrac/errors.hpp"

namespace porefrac {

namespace {

std::FILE* open_or_throw(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open output file: " + path);
  return f;
}

}  // namespace

void write_vtk(const std::string& path, const QuadMesh& mesh, const FieldState& fields,
               const Vec& e_cell, const Vec& k_r_cell) {
  std::FILE* f = open_or_throw(path);
  const int nv = mesh.n_vertices();
  const auto& act = mesh.active_cells();

  std::fprintf(f, "# vtk DataFile Version 3.0\nporefrac snapshot\nASCII\n");
  std::fprintf(f, "DATASET UNSTRUCTURED_GRID\n");
  std::fprintf(f, "POINTS %d double\n", nv);
  for (int v = 0; v < nv; ++v)
    std::fprintf(f, "%.17g %.17g 0\n", mesh.vertex(v).x(), mesh.vertex(v).y());

  std::fprintf(f, "CELLS %zu %zu\n", act.size(), 5 * act.size());
  for (int c : act) {
    const auto& cell = mesh.cell(c);
    std::fprintf(f, "4 %d %d %d %d\n", cell.v[0], cell.v[1], cell.v[2], cell.v[3]);
  }
  std::fprintf(f, "CELL_TYPES %zu\n", act.size());
  for (std::size_t i = 0; i < act.size(); ++i) std::fprintf(f, "9\n");

  std::fprintf(f, "POINT_DATA %d\n", nv);
  auto scalars = [&](const char* name, const Vec& v) {
    std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
    for (int i = 0; i < nv; ++i) std::fprintf(f, "%.17g\n", v.size() ? v[i] : 0.0);
  };
  scalars("P", fields.p);
  scalars("PHI", fields.phi);
  scalars("PHI_LS", fields.phi_ls);
  scalars("W", fields.w);
  std::fprintf(f, "VECTORS U double\n");
  for (int i = 0; i < nv; ++i)
    std::fprintf(f, "%.17g %.17g 0\n", fields.u[2 * i], fields.u[2 * i + 1]);

  std::fprintf(f, "CELL_DATA %zu\n", act.size());
  std::fprintf(f, "SCALARS material_id int 1\nLOOKUP_TABLE default\n");
  for (int c : act) std::fprintf(f, "%d\n", mesh.cell(c).material_id);
  std::fprintf(f, "SCALARS E double 1\nLOOKUP_TABLE default\n");
  for (int c : act) std::fprintf(f, "%.17g\n", e_cell.size() ? e_cell[c] : 0.0);
  std::fprintf(f, "SCALARS K_R double 1\nLOOKUP_TABLE default\n");
  for (int c : act) std::fprintf(f, "%.17g\n", k_r_cell.size() ? k_r_cell[c] : 0.0);
  std::fclose(f);
}

void write_qoi_csv(const std::string& path, const QoiSeries& series) {
  std::FILE* f = open_or_throw(path);
  std::fprintf(f, "time,fs_iters,newton_iters,gmres_iters,max_p,max_w,half_length,cod_center\n");
  for (const auto& r : series)
    std::fprintf(f, "%.17g,%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n", r.time, r.fs_iters,
                 r.newton_iters, r.gmres_iters, r.max_p, r.max_w, r.half_length,
                 r.cod_center);
  std::fclose(f);
}

void write_cod_csv(const std::string& path, const std::vector<CodSample>& samples) {
  std::FILE* f = open_or_throw(path);
  std::fprintf(f, "x,cod,analytic_cod\n");
  for (const auto& s : samples)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", s.x, s.cod, s.analytic);
  std::fclose(f);
}

void write_axis_pressure_csv(const std::string& path,
                             const std::vector<AxisPressureSample>& samples) {
  std::FILE* f = open_or_throw(path);
  std::fprintf(f, "time,min_p,argmin_x\n");
  for (const auto& s : samples)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", s.time, s.min_p, s.argmin_x);
  std::fclose(f);
}

}  // namespace porefrac
