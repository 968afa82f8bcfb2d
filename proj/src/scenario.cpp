#include "porefrac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "porefrac/errors.hpp"
#include "porefrac/output.hpp"
#include "porefrac/width.hpp"

namespace porefrac {

namespace {

// slab membership in the fracture's rotated frame
bool inside_fracture(const FractureSpec& f, double half_thickness, const Vector2d& x) {
  const Vector2d d = x - f.center;
  const Vector2d axis(std::cos(f.angle), std::sin(f.angle));
  const Vector2d perp(-axis.y(), axis.x());
  return std::abs(d.dot(axis)) < f.half_length && std::abs(d.dot(perp)) < half_thickness;
}

Vector2d gradient_at(const QuadMesh& mesh, const Vec& nodal, const Vector2d& x) {
  const int c = mesh.locate(x);
  const Vector2d xi = mesh.local_coords(c, x);
  std::array<double, 4> vals;
  std::array<Vector2d, 4> grads;
  q1_shape(xi.x(), xi.y(), vals, grads);
  const double hx = mesh.cell_hx(c), hy = mesh.cell_hy(c);
  Vector2d g(0, 0);
  const auto& v = mesh.cell(c).v;
  for (int i = 0; i < 4; ++i) {
    g.x() += grads[i].x() / hx * nodal[v[i]];
    g.y() += grads[i].y() / hy * nodal[v[i]];
  }
  return g;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double u01(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

Vec initial_phasefield(const QuadMesh& mesh, const std::vector<FractureSpec>& fractures,
                       double default_half_thickness) {
  Vec phi = Vec::Ones(mesh.n_vertices());
  for (const auto& f : fractures) {
    const double ht = f.half_thickness > 0 ? f.half_thickness : default_half_thickness;
    int interior = 0;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if (inside_fracture(f, ht, mesh.vertex(v))) {
        phi[v] = 0.0;
        ++interior;
      }
    }
    if (interior == 0)
      throw ConfigError("initial fracture contains no mesh node (thinner than the mesh)");
  }
  return phi;
}

double sneddon_cod_analytic(double x, double x_center, double p, double l0, double e,
                            double nu) {
  const double s = (x - x_center) / l0;
  if (std::abs(s) > 1.0) return 0.0;
  return 4.0 * p * l0 * (1.0 - nu * nu) / e * std::sqrt(1.0 - s * s);
}

double cod_profile(const QuadMesh& mesh, const Vec& u, const Vec& phi, double x0) {
  const double y0 = mesh.lower().y(), y1 = mesh.upper().y();
  const double step = mesh.h_min() / 2.0;
  const int n = std::max(1, static_cast<int>(std::ceil((y1 - y0) / step)));
  const double dy = (y1 - y0) / n;
  double integral = 0;
  for (int k = 0; k < n; ++k) {
    const Vector2d x(x0, y0 + (k + 0.5) * dy);
    const Eigen::VectorXd uq = mesh.value_at(u, 2, x);
    const Vector2d grad_phi = gradient_at(mesh, phi, x);
    integral += (uq[0] * grad_phi.x() + uq[1] * grad_phi.y()) * dy;
  }
  return integral;
}

double half_crack_length(const QuadMesh& mesh, const Vec& phi, const FractureSpec& fracture,
                         double c_ls) {
  const Vector2d axis(std::cos(fracture.angle), std::sin(fracture.angle));
  const double step = mesh.h_min() / 2.0;

  // clip the axis line to the domain
  double t_max = std::numeric_limits<double>::max();
  double t_min = std::numeric_limits<double>::lowest();
  for (int d = 0; d < 2; ++d) {
    if (std::abs(axis[d]) < 1e-14) continue;
    const double a = (mesh.lower()[d] - fracture.center[d]) / axis[d];
    const double b = (mesh.upper()[d] - fracture.center[d]) / axis[d];
    t_min = std::max(t_min, std::min(a, b));
    t_max = std::min(t_max, std::max(a, b));
  }

  auto below = [&](double t) {
    const Vector2d x = fracture.center + t * axis;
    return mesh.value_at(phi, 1, x)[0] < c_ls;
  };
  if (!below(0.0)) return 0.0;
  double lo = 0, hi = 0;
  while (lo - step > t_min && below(lo - step)) lo -= step;
  while (hi + step < t_max && below(hi + step)) hi += step;
  return 0.5 * (hi - lo);
}

double min_axis_pressure(const QuadMesh& mesh, const Vec& p, const FractureSpec& fracture) {
  const Vector2d axis(std::cos(fracture.angle), std::sin(fracture.angle));
  const double step = mesh.h_min() / 2.0;
  double t_max = std::numeric_limits<double>::max();
  double t_min = std::numeric_limits<double>::lowest();
  for (int d = 0; d < 2; ++d) {
    if (std::abs(axis[d]) < 1e-14) continue;
    const double a = (mesh.lower()[d] - fracture.center[d]) / axis[d];
    const double b = (mesh.upper()[d] - fracture.center[d]) / axis[d];
    t_min = std::max(t_min, std::min(a, b));
    t_max = std::min(t_max, std::max(a, b));
  }
  double best = std::numeric_limits<double>::max();
  for (double t = t_min + step; t < t_max - step; t += step)
    best = std::min(best, mesh.value_at(p, 1, fracture.center + t * axis)[0]);
  return best;
}

void heterogeneous_fields(const HeterogeneitySpec& het, const Vector2d& domain_lower,
                          double eps, const QuadMesh& mesh, Vec& e_cell, Vec& k_cell) {
  if (!(het.block_size > eps))
    throw ConfigError("heterogeneity block size must exceed epsilon");
  e_cell = Vec::Zero(mesh.n_cells_total());
  k_cell = Vec::Zero(mesh.n_cells_total());
  for (int c = 0; c < mesh.n_cells_total(); ++c) {
    const Vector2d ctr = mesh.cell_center(c);
    const auto bx = static_cast<std::uint64_t>(
        std::floor((ctr.x() - domain_lower.x()) / het.block_size));
    const auto by = static_cast<std::uint64_t>(
        std::floor((ctr.y() - domain_lower.y()) / het.block_size));
    const std::uint64_t base = splitmix64(het.seed ^ splitmix64(bx ^ (by << 32)));
    e_cell[c] = het.e_min + (het.e_max - het.e_min) * u01(splitmix64(base ^ 0x1ull));
    k_cell[c] = het.k_min + (het.k_max - het.k_min) * u01(splitmix64(base ^ 0x2ull));
  }
}

namespace {

struct CliOptions {
  std::string scenario = "example1";
  std::string config_path;
  std::string out_dir;
  std::string levelset_mode;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  long seed = -1;
  int vtk_stride = -1;
};

void print_usage() {
  std::cout <<
      "usage: porefrac [options]\n"
      "  --scenario NAME     example1 | example3 | example4 | custom (default example1)\n"
      "  --config PATH       key = value configuration file (overrides the preset)\n"
      "  --alpha FLOAT       Biot coefficient override\n"
      "  --seed INT          RNG seed for heterogeneous fields\n"
      "  --out DIR           output directory\n"
      "  --vtk-stride INT    VTK snapshot every N steps (0 disables)\n"
      "  --levelset-mode M   shift | poisson\n"
      "  --help              this message\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CliOptions opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&](const char* name) -> std::string {
      if (i + 1 >= argc) throw ConfigError(std::string(name) + " expects a value");
      return argv[++i];
    };
    try {
      if (arg == "--help" || arg == "-h") {
        print_usage();
        return 0;
      } else if (arg == "--scenario") {
        opt.scenario = next("--scenario");
      } else if (arg == "--config") {
        opt.config_path = next("--config");
      } else if (arg == "--alpha") {
        opt.alpha = std::stod(next("--alpha"));
      } else if (arg == "--seed") {
        opt.seed = std::stol(next("--seed"));
      } else if (arg == "--out") {
        opt.out_dir = next("--out");
      } else if (arg == "--vtk-stride") {
        opt.vtk_stride = std::stoi(next("--vtk-stride"));
      } else if (arg == "--levelset-mode") {
        opt.levelset_mode = next("--levelset-mode");
      } else {
        std::cerr << "unknown option: " << arg << "\n";
        print_usage();
        return 2;
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  ScenarioConfig cfg;
  try {
    cfg = opt.config_path.empty() ? preset_config(opt.scenario)
                                  : parse_config_file(opt.config_path);
    if (!std::isnan(opt.alpha)) {
      const bool was_example1 = cfg.name == "example1";
      cfg.alpha = opt.alpha;
      if (was_example1) cfg.q_f = opt.alpha > 0.5 ? 5e-2 : 5e-9;  // preset injection rates
    }
    if (opt.seed >= 0) {
      cfg.seed = static_cast<std::uint64_t>(opt.seed);
      cfg.heterogeneity.seed = cfg.seed;
    }
    if (!opt.out_dir.empty()) cfg.output.directory = opt.out_dir;
    if (opt.vtk_stride >= 0) cfg.output.vtk_stride = opt.vtk_stride;
    if (!opt.levelset_mode.empty())
      apply_config_line(cfg, "levelset_mode", opt.levelset_mode);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::filesystem::create_directories(cfg.output.directory);
    SimState state = make_initial_state(cfg);
    std::cout << "scenario " << cfg.name << ": " << state.mesh.n_active() << " cells, "
              << state.mesh.n_vertices() << " vertices, eps = " << state.eps << "\n";

    if (cfg.output.dump_systems && !cfg.fractures.empty()) {
      // export the first assembled pressure system for offline inspection
      SimState probe = state;
      FlowParams fp = make_flow_params(cfg, probe);
      ElasticParams ep;
      ep.e_cell = probe.e_cell;
      ep.nu = cfg.poisson_ratio;
      const DofMap map(probe.mesh, FieldKind::scalar);
      const DofConstraints cons(probe.mesh, map);
      assign_material_ids(probe.mesh, probe.fields.phi, cfg.c_ls);
      PressureSystem sys = assemble_fixed_stress_pressure(
          probe.mesh, cons, fp, ep.lambda_cell(), ep.g_cell(), probe.fields.p,
          probe.fields.u, probe.fields.u, probe.fields.p, probe.fields.phi,
          probe.fields.w, cfg.coupling.dt);
      write_matrix_market(sys.a, cfg.output.directory + "/pressure_system.mtx");
    }

    QoiSeries qoi;
    std::vector<AxisPressureSample> axis_samples;
    if (cfg.output.vtk_stride > 0)
      write_vtk(cfg.output.directory + "/snapshot_0000.vtk", state.mesh, state.fields,
                state.e_cell, state.k_r_cell);

    StepCallback cb = [&](const SimState& s, const TimeStepReport& rep) {
      QoiRecord rec;
      rec.time = rep.time;
      rec.fs_iters = rep.fs_iterations;
      rec.newton_iters = rep.newton_iterations_total;
      rec.gmres_iters = rep.gmres_iterations_total;
      rec.max_p = rep.max_pressure;
      rec.max_w = rep.max_width;
      rec.half_length = rep.half_length;
      if (!cfg.fractures.empty()) {
        rec.cod_center = cod_profile(s.mesh, s.fields.u, s.fields.phi,
                                     cfg.fractures.front().center.x());
        rec.min_axis_pressure = min_axis_pressure(s.mesh, s.fields.p, cfg.fractures.front());
      }
      qoi.push_back(rec);
      if (cfg.output.record_axis_pressure && !cfg.fractures.empty())
        axis_samples.push_back({rep.time, rec.min_axis_pressure, 0.0});
      if (cfg.output.vtk_stride > 0 && s.step % cfg.output.vtk_stride == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "/snapshot_%04d.vtk", s.step);
        write_vtk(cfg.output.directory + name, s.mesh, s.fields, s.e_cell, s.k_r_cell);
      }
      std::cout << "t = " << rep.time << "  fs = " << rep.fs_iterations
                << "  newton = " << rep.newton_iterations_total
                << "  gmres = " << rep.gmres_iterations_total
                << "  max_p = " << rep.max_pressure << "  max_w = " << rep.max_width
                << "  half_length = " << rep.half_length << "\n";
    };

    RunResult run = run_time_loop(state, cfg, cb);

    write_qoi_csv(cfg.output.directory + "/qoi.csv", qoi);
    if (cfg.output.record_axis_pressure)
      write_axis_pressure_csv(cfg.output.directory + "/axis_pressure.csv", axis_samples);

    if (!cfg.fractures.empty()) {
      const FractureSpec& f = cfg.fractures.front();
      const double p_ref = qoi.empty() ? 0.0 : qoi.back().max_p;
      std::vector<CodSample> cod;
      const double span = 1.2 * f.half_length;
      const double step = state.mesh.h_min() / 2.0;
      for (double x = f.center.x() - span; x <= f.center.x() + span; x += step) {
        CodSample smp;
        smp.x = x;
        smp.cod = cod_profile(state.mesh, state.fields.u, state.fields.phi, x);
        smp.analytic = sneddon_cod_analytic(x, f.center.x(), p_ref, f.half_length,
                                            cfg.young_modulus, cfg.poisson_ratio);
        cod.push_back(smp);
      }
      write_cod_csv(cfg.output.directory + "/cod.csv", cod);
    }

    if (cfg.output.vtk_stride > 0)
      write_vtk(cfg.output.directory + "/snapshot_final.vtk", state.mesh, state.fields,
                state.e_cell, state.k_r_cell);

    if (!run.ok) {
      std::cerr << "solver failure: " << run.error << " (partial outputs retained)\n";
      return 3;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace porefrac
