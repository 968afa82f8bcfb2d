#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "porefrac/errors.hpp"
#include "porefrac/output.hpp"
#include "porefrac/scenario.hpp"
#include "porefrac/width.hpp"

using namespace porefrac;

TEST_CASE("initial phase field: slab nodes zeroed, elsewhere one") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {4, 4}, 5);
  std::vector<FractureSpec> fractures = {FractureSpec{{2.0, 2.0}, 0.2, 0.0, 0.0}};
  const double half_thickness = 0.2;
  Vec phi = initial_phasefield(mesh, fractures, half_thickness);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vector2d x = mesh.vertex(v);
    const bool inside =
        std::abs(x.x() - 2.0) < 0.2 && std::abs(x.y() - 2.0) < half_thickness;
    CHECK(phi[v] == (inside ? 0.0 : 1.0));
  }
}

TEST_CASE("no fractures leaves the phase field at one") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 2);
  Vec phi = initial_phasefield(mesh, {}, 0.1);
  CHECK(phi.minCoeff() == 1.0);
}

TEST_CASE("two disjoint slabs produce two fracture components") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {4, 4}, 5);
  std::vector<FractureSpec> fractures = {FractureSpec{{1.0, 1.0}, 0.4, 0.0, 0.0},
                                         FractureSpec{{3.0, 3.0}, 0.4, 0.0, 0.0}};
  Vec phi = initial_phasefield(mesh, fractures, 0.15);
  assign_material_ids(mesh, phi, 0.1);
  int n_comp = 0;
  fracture_components(mesh, &n_comp);
  CHECK(n_comp == 2);
}

TEST_CASE("fracture thinner than the mesh is a configuration error") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {4, 4}, 2);  // h = 1
  std::vector<FractureSpec> fractures = {FractureSpec{{2.0, 2.2}, 0.3, 0.0, 0.0}};
  CHECK_THROWS_AS(initial_phasefield(mesh, fractures, 0.05), ConfigError);
}

TEST_CASE("sneddon analytic opening") {
  // tips close
  CHECK(sneddon_cod_analytic(2.2, 2.0, 1e-3, 0.2, 1.0, 0.2) == 0.0);
  CHECK(sneddon_cod_analytic(2.5, 2.0, 1e-3, 0.2, 1.0, 0.2) == 0.0);
  // center value 4 p l0 (1 - nu^2) / E
  CHECK(sneddon_cod_analytic(2.0, 2.0, 1e-3, 0.2, 1.0, 0.2) ==
        doctest::Approx(7.68e-4).epsilon(1e-12));
  // linear in p
  const double c1 = sneddon_cod_analytic(2.05, 2.0, 1e-3, 0.2, 1.0, 0.2);
  const double c2 = sneddon_cod_analytic(2.05, 2.0, 2e-3, 0.2, 1.0, 0.2);
  CHECK(c2 == doctest::Approx(2.0 * c1).epsilon(1e-12));
}

TEST_CASE("cod profile: zero displacement and the dense quadrature oracle") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {4, 4}, 5);
  const int nv = mesh.n_vertices();

  Vec zero_u = Vec::Zero(2 * nv);
  Vec phi = Vec::Ones(nv);
  CHECK(cod_profile(mesh, zero_u, phi, 2.0) == 0.0);

  // manufactured smooth opening and phase ramp
  Vec u(2 * nv);
  for (int v = 0; v < nv; ++v) {
    u[2 * v] = 0.0;
    u[2 * v + 1] = 2e-3 * std::tanh((mesh.vertex(v).y() - 2.0) / 0.3);
  }
  for (int v = 0; v < nv; ++v)
    phi[v] = std::min(1.0, std::abs(mesh.vertex(v).y() - 2.0) / 0.5);

  const double x0 = 2.0;
  const double cod = cod_profile(mesh, u, phi, x0);

  // dense midpoint quadrature of the same Q1 fields
  const double step = mesh.h_min() / 200.0;
  const int n = static_cast<int>(std::ceil(4.0 / step));
  const double dy = 4.0 / n;
  double oracle = 0;
  for (int k = 0; k < n; ++k) {
    const double y = (k + 0.5) * dy;
    const double uy = mesh.value_at(u, 2, {x0, y})[1];
    const double ym = std::max(0.0, y - 1e-9), yp = std::min(4.0, y + 1e-9);
    const double dphi = (mesh.value_at(phi, 1, {x0, yp})[0] -
                         mesh.value_at(phi, 1, {x0, ym})[0]) / (yp - ym);
    oracle += uy * dphi * dy;
  }
  CHECK(cod == doctest::Approx(oracle).epsilon(1e-3));
  // the manufactured field opens by about 2 * 2e-3 (ramp spans the jump)
  CHECK(cod > 2e-3);
}

TEST_CASE("half crack length of a synthetic slab") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {4, 4}, 5);
  Vec phi = Vec::Ones(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vector2d x = mesh.vertex(v);
    if (std::abs(x.x() - 2.0) < 0.3 && std::abs(x.y() - 2.0) < 0.15) phi[v] = 0.0;
  }
  FractureSpec f{{2.0, 2.0}, 0.3, 0.0, 0.0};
  const double hl = half_crack_length(mesh, phi, f, 0.1);
  CHECK(hl == doctest::Approx(0.3).epsilon(0.25));

  Vec ones = Vec::Ones(mesh.n_vertices());
  CHECK(half_crack_length(mesh, ones, f, 0.1) == 0.0);
}

TEST_CASE("heterogeneous fields: determinism, ranges, degenerate range") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {10, 10}, 4);
  HeterogeneitySpec het;
  het.seed = 7;
  het.block_size = 1.0;
  het.e_min = 1e7;
  het.e_max = 1e8;
  het.k_min = 1e-13;
  het.k_max = 1e-12;

  Vec e1, k1, e2, k2;
  heterogeneous_fields(het, {0, 0}, 0.5, mesh, e1, k1);
  heterogeneous_fields(het, {0, 0}, 0.5, mesh, e2, k2);
  CHECK((e1 - e2).norm() == 0.0);  // deterministic in the seed
  CHECK((k1 - k2).norm() == 0.0);

  het.seed = 8;
  Vec e3, k3;
  heterogeneous_fields(het, {0, 0}, 0.5, mesh, e3, k3);
  CHECK((e1 - e3).norm() > 0.0);

  for (int c : mesh.active_cells()) {
    CHECK(e1[c] >= het.e_min);
    CHECK(e1[c] <= het.e_max);
    CHECK(k1[c] >= het.k_min);
    CHECK(k1[c] <= het.k_max);
  }
  // several distinct blocks appear
  std::set<double> distinct;
  for (int c : mesh.active_cells()) distinct.insert(e1[c]);
  CHECK(distinct.size() > 10);

  HeterogeneitySpec degen = het;
  degen.e_min = degen.e_max = 5e7;
  Vec e4, k4;
  heterogeneous_fields(degen, {0, 0}, 0.5, mesh, e4, k4);
  for (int c : mesh.active_cells()) CHECK(e4[c] == 5e7);

  CHECK_THROWS_AS(heterogeneous_fields(het, {0, 0}, 2.0, mesh, e4, k4), ConfigError);
}

TEST_CASE("config parsing: overrides, lists, and errors") {
  const std::string path = "test_config.cfg";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "scenario = example1\n";
    out << "alpha = 1.0\n";
    out << "t_end = 2 # trailing comment\n";
    out << "fracture = 1.0 2.0 0.25 0\n";
    out << "fracture = 3.0 2.0 0.25 90\n";
    out << "levelset_mode = poisson\n";
  }
  ScenarioConfig cfg = parse_config_file(path);
  CHECK(cfg.alpha == 1.0);
  CHECK(cfg.coupling.t_end == 2.0);
  CHECK(cfg.coupling.dt == 1.0);  // preset value survives
  REQUIRE(cfg.fractures.size() == 2);  // file list replaces the preset list
  CHECK(cfg.fractures[1].angle == doctest::Approx(M_PI / 2));
  CHECK(cfg.levelset_mode == LevelSetMode::poisson);
  std::remove(path.c_str());

  {
    std::ofstream out(path);
    out << "unknown_key = 1\n";
  }
  CHECK_THROWS_AS(parse_config_file(path), ConfigError);
  {
    std::ofstream out(path);
    out << "alpha\n";
  }
  CHECK_THROWS_AS(parse_config_file(path), ConfigError);
  {
    std::ofstream out(path);
    out << "alpha = abc\n";
  }
  CHECK_THROWS_AS(parse_config_file(path), ConfigError);
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_config_file("does_not_exist.cfg"), ConfigError);
  CHECK_THROWS_AS(preset_config("example9"), ConfigError);
}

TEST_CASE("vtk writer round-trips point data to 1e-12") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 2);
  const int nv = mesh.n_vertices();
  FieldState fields;
  fields.p.resize(nv);
  fields.phi.resize(nv);
  fields.phi_ls.resize(nv);
  fields.w.resize(nv);
  fields.u.resize(2 * nv);
  for (int v = 0; v < nv; ++v) {
    fields.p[v] = std::sin(3.0 * v) * 1e-3;
    fields.phi[v] = 0.5 + 0.5 * std::cos(static_cast<double>(v));
    fields.phi_ls[v] = fields.phi[v] - 0.1;
    fields.w[v] = 1e-4 * v;
    fields.u[2 * v] = 1e-5 * v;
    fields.u[2 * v + 1] = -2e-5 * v;
  }
  Vec e_cell = Vec::Constant(mesh.n_cells_total(), 1e8);
  Vec k_cell = Vec::Constant(mesh.n_cells_total(), 1e-12);
  const std::string path = "test_roundtrip.vtk";
  write_vtk(path, mesh, fields, e_cell, k_cell);

  // parse back POINTS count and the P / PHI / U arrays
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string tok;
  int n_points = 0;
  while (in >> tok) {
    if (tok == "POINTS") {
      in >> n_points >> tok;
      break;
    }
  }
  REQUIRE(n_points == nv);
  std::vector<double> px(n_points);
  for (int v = 0; v < n_points; ++v) {
    double x, y, z;
    in >> x >> y >> z;
    CHECK(std::abs(x - mesh.vertex(v).x()) < 1e-12);
  }
  Vec p_read(nv), phi_read(nv), u_read(2 * nv);
  bool got_p = false, got_phi = false, got_u = false;
  while (in >> tok) {
    if (tok == "SCALARS") {
      std::string name, type;
      in >> name >> type;
      int comps;
      in >> comps;
      std::string lt, def;
      in >> lt >> def;
      if (name == "P") {
        for (int v = 0; v < nv; ++v) in >> p_read[v];
        got_p = true;
      } else if (name == "PHI") {
        for (int v = 0; v < nv; ++v) in >> phi_read[v];
        got_phi = true;
      }
    } else if (tok == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      double z;
      for (int v = 0; v < nv; ++v) in >> u_read[2 * v] >> u_read[2 * v + 1] >> z;
      got_u = true;
    }
    if (got_p && got_phi && got_u) break;
  }
  REQUIRE(got_p);
  REQUIRE(got_phi);
  REQUIRE(got_u);
  CHECK((p_read - fields.p).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((phi_read - fields.phi).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((u_read - fields.u).lpNorm<Eigen::Infinity>() < 1e-12);
  std::remove(path.c_str());
}

TEST_CASE("cli usage errors exit with code 2") {
  const char* missing[] = {"porefrac", "--config", "no_such_file.cfg"};
  CHECK(run_cli(3, missing) == 2);
  const char* unknown[] = {"porefrac", "--frobnicate"};
  CHECK(run_cli(2, unknown) == 2);
  const char* badmode[] = {"porefrac", "--levelset-mode", "banana"};
  CHECK(run_cli(3, badmode) == 2);
  const char* help[] = {"porefrac", "--help"};
  CHECK(run_cli(2, help) == 0);
}
