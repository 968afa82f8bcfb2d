#include "porefrac/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "porefrac/errors.hpp"

namespace porefrac {

void ScenarioConfig::validate() const {
  if (!(domain_upper.x() > domain_lower.x()) || !(domain_upper.y() > domain_lower.y()))
    throw ConfigError("domain rectangle is degenerate");
  if (n_uniform < 0) throw ConfigError("n_uniform must be nonnegative");
  if (!(poisson_ratio > -1) || !(poisson_ratio < 0.5))
    throw ConfigError("poisson_ratio out of range");
  if (!(g_c > 0)) throw ConfigError("g_c must be positive");
  if (epsilon < 0 || (epsilon == 0 && !(epsilon_factor > 0)))
    throw ConfigError("epsilon (or epsilon_factor) must be positive");
  if (!(coupling.dt > 0)) throw ConfigError("dt must be positive");
  if (coupling.t_end < 0) throw ConfigError("t_end must be nonnegative");
  if (!(coupling.tol_fs_pressure > 0) || !(coupling.tol_fs_displacement > 0) ||
      !(coupling.tol_fs_phasefield > 0))
    throw ConfigError("fixed-stress tolerances must be positive");
  for (const auto& f : fractures) {
    const double margin = f.half_length + std::max(f.half_thickness, 0.0);
    if (f.center.x() - margin < domain_lower.x() || f.center.x() + margin > domain_upper.x() ||
        f.center.y() - margin < domain_lower.y() || f.center.y() + margin > domain_upper.y())
      throw ConfigError("fracture extends outside the domain");
  }
}

ScenarioConfig example1_config(double alpha) {
  ScenarioConfig cfg;
  cfg.name = "example1";
  cfg.domain_lower = {0, 0};
  cfg.domain_upper = {4, 4};
  cfg.n_uniform = 5;
  cfg.refine_boxes = {{Eigen::Vector4d(1.55, 1.75, 2.45, 2.25), 3}};
  cfg.fractures = {FractureSpec{{2.0, 2.0}, 0.2, 0.0, 0.0}};
  cfg.young_modulus = 1.0;
  cfg.poisson_ratio = 0.2;
  cfg.g_c = 1.0;
  cfg.epsilon = 0.045;
  cfg.kappa_factor = 1e-10;
  cfg.alpha = alpha;
  cfg.biot_modulus = 3e9;
  cfg.c_f = 1e-12;
  cfg.eta_r = cfg.eta_f = 1e-3;
  cfg.rho_r = cfg.rho_f = 1.0;
  cfg.k_r = 1e-12;  // 1 darcy
  cfg.q_f = alpha > 0.5 ? 5e-2 : 5e-9;
  cfg.source_radius_factor = 2.0;
  cfg.source_scale = 0.0052;  // well normalization; recovers p ~ 1e-3 Pa at T=10 s
  cfg.coupling.dt = 1.0;
  cfg.coupling.t_end = 10.0;
  cfg.coupling.tol_fs_pressure = cfg.coupling.tol_fs_displacement =
      cfg.coupling.tol_fs_phasefield = 1e-3;
  cfg.output.directory = "out_example1";
  return cfg;
}

ScenarioConfig example3_config() {
  ScenarioConfig cfg;
  cfg.name = "example3";
  cfg.domain_lower = {0, 0};
  cfg.domain_upper = {4, 4};
  cfg.n_uniform = 4;
  cfg.refine_boxes = {{Eigen::Vector4d(1.5, 1.7, 2.5, 2.3), 2}};
  cfg.fractures = {FractureSpec{{2.0, 2.0}, 0.2, 0.0, 0.0}};
  cfg.young_modulus = 1e8;
  cfg.poisson_ratio = 0.2;
  cfg.g_c = 1.0;
  cfg.epsilon = 0;  // 2 * h_min
  cfg.epsilon_factor = 2.0;
  cfg.kappa_factor = 1e-10;
  cfg.alpha = 1.0;
  cfg.biot_modulus = 1e8;
  cfg.c_f = 1e-8;
  cfg.eta_r = cfg.eta_f = 1e-3;
  cfg.k_r = 1e-12;
  cfg.q_f = 2.0;
  cfg.source_scale = 0.01;  // well normalization for the coarse propagation run
  cfg.coupling.dt = 0.01;
  cfg.coupling.t_end = 0.3;
  cfg.coupling.tol_fs_pressure = 200.0;  // pressures reach O(7e4) Pa here
  cfg.coupling.tol_fs_displacement = 1e-3;
  cfg.coupling.tol_fs_phasefield = 1e-3;
  cfg.coupling.pc_max_rounds = 3;
  cfg.output.directory = "out_example3";
  return cfg;
}

ScenarioConfig example4_config() {
  ScenarioConfig cfg;
  cfg.name = "example4";
  cfg.domain_lower = {0, 0};
  cfg.domain_upper = {10, 10};
  cfg.n_uniform = 4;
  cfg.fractures = {FractureSpec{{3.5, 4.5}, 0.6, 0.0, 0.0},
                   FractureSpec{{6.5, 5.5}, 0.6, 0.0, 0.0},
                   FractureSpec{{5.0, 3.0}, 0.6, 90.0 * M_PI / 180.0, 0.0}};
  for (const auto& f : cfg.fractures) {
    Eigen::Vector4d box(f.center.x() - f.half_length - 0.8, f.center.y() - f.half_length - 0.8,
                        f.center.x() + f.half_length + 0.8, f.center.y() + f.half_length + 0.8);
    cfg.refine_boxes.push_back({box, 2});
  }
  cfg.young_modulus = 1e8;
  cfg.poisson_ratio = 0.2;
  cfg.g_c = 1.0;
  cfg.epsilon = 0;
  cfg.epsilon_factor = 2.0;
  cfg.kappa_factor = 1e-10;
  cfg.alpha = 1.0;
  cfg.biot_modulus = 1e8;
  cfg.c_f = 1e-8;
  cfg.eta_r = cfg.eta_f = 1e-3;
  cfg.k_r = 1e-12;
  cfg.q_f = 5.0;
  cfg.source_scale = 4e-4;
  cfg.coupling.dt = 0.01;
  cfg.coupling.t_end = 0.1;
  cfg.coupling.tol_fs_pressure = 100.0;  // pressures reach O(1e3..1e4) Pa
  cfg.coupling.tol_fs_displacement = 1e-4;
  cfg.coupling.tol_fs_phasefield = 1e-2;  // multi-fracture phase-field converges slower
  cfg.coupling.pc_max_rounds = 3;
  cfg.heterogeneity.enabled = true;
  cfg.heterogeneity.seed = 1;
  cfg.heterogeneity.block_size = 1.0;
  cfg.heterogeneity.e_min = 1e7;
  cfg.heterogeneity.e_max = 1e8;
  cfg.heterogeneity.k_min = 1e-13;  // 0.1 darcy
  cfg.heterogeneity.k_max = 1e-12;
  cfg.output.directory = "out_example4";
  return cfg;
}

ScenarioConfig preset_config(const std::string& name) {
  if (name == "example1") return example1_config(0.0);
  if (name == "example3") return example3_config();
  if (name == "example4") return example4_config();
  if (name == "custom") return ScenarioConfig{};
  throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + s);
  }
}

long to_long(const std::string& s, const std::string& key) {
  const double v = to_double(s, key);
  if (v != std::floor(v)) throw ConfigError("expected integer for '" + key + "'");
  return static_cast<long>(v);
}

std::vector<double> to_doubles(const std::string& s, const std::string& key) {
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(tok, key));
  return out;
}

}  // namespace

void apply_config_line(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  auto nums = [&](std::size_t want) {
    auto v = to_doubles(value, key);
    if (v.size() != want)
      throw ConfigError("'" + key + "' expects " + std::to_string(want) + " values");
    return v;
  };

  if (key == "scenario") {
    cfg = preset_config(value);
  } else if (key == "domain") {
    auto v = nums(4);
    cfg.domain_lower = {v[0], v[1]};
    cfg.domain_upper = {v[2], v[3]};
  } else if (key == "n_uniform") {
    cfg.n_uniform = static_cast<int>(to_long(value, key));
  } else if (key == "refine_box") {
    auto v = nums(5);
    cfg.refine_boxes.push_back({Eigen::Vector4d(v[0], v[1], v[2], v[3]),
                                static_cast<int>(v[4])});
  } else if (key == "fracture") {
    auto v = to_doubles(value, key);
    if (v.size() != 4 && v.size() != 5)
      throw ConfigError("'fracture' expects: cx cy half_length angle_deg [half_thickness]");
    FractureSpec f;
    f.center = {v[0], v[1]};
    f.half_length = v[2];
    f.angle = v[3] * M_PI / 180.0;
    f.half_thickness = v.size() == 5 ? v[4] : 0.0;
    cfg.fractures.push_back(f);
  } else if (key == "young_modulus") {
    cfg.young_modulus = to_double(value, key);
  } else if (key == "poisson_ratio") {
    cfg.poisson_ratio = to_double(value, key);
  } else if (key == "g_c") {
    cfg.g_c = to_double(value, key);
  } else if (key == "epsilon") {
    cfg.epsilon = to_double(value, key);
  } else if (key == "epsilon_factor") {
    cfg.epsilon_factor = to_double(value, key);
  } else if (key == "kappa_factor") {
    cfg.kappa_factor = to_double(value, key);
  } else if (key == "alpha") {
    cfg.alpha = to_double(value, key);
  } else if (key == "biot_modulus") {
    cfg.biot_modulus = to_double(value, key);
  } else if (key == "c_f") {
    cfg.c_f = to_double(value, key);
  } else if (key == "eta_r") {
    cfg.eta_r = to_double(value, key);
  } else if (key == "eta_f") {
    cfg.eta_f = to_double(value, key);
  } else if (key == "rho_r") {
    cfg.rho_r = to_double(value, key);
  } else if (key == "rho_f") {
    cfg.rho_f = to_double(value, key);
  } else if (key == "gravity") {
    auto v = nums(2);
    cfg.gravity = {v[0], v[1]};
  } else if (key == "k_r") {
    cfg.k_r = to_double(value, key);
  } else if (key == "k_r_darcy") {
    cfg.k_r = to_double(value, key) * 1e-12;  // 1 d = 1e-12 m^2
  } else if (key == "c_x") {
    cfg.c_x = to_double(value, key);
  } else if (key == "q_f") {
    cfg.q_f = to_double(value, key);
  } else if (key == "q_r") {
    cfg.q_r = to_double(value, key);
  } else if (key == "source_radius_factor") {
    cfg.source_radius_factor = to_double(value, key);
  } else if (key == "source_scale") {
    cfg.source_scale = to_double(value, key);
  } else if (key == "stab_denominator") {
    cfg.stab_denom_override = to_double(value, key);
  } else if (key == "c_ls") {
    cfg.c_ls = to_double(value, key);
  } else if (key == "theta") {
    cfg.theta = to_double(value, key);
  } else if (key == "beta") {
    cfg.beta = to_double(value, key);
  } else if (key == "f1") {
    cfg.f1 = to_double(value, key);
  } else if (key == "f2") {
    cfg.f2 = to_double(value, key);
  } else if (key == "levelset_mode") {
    if (value == "shift")
      cfg.levelset_mode = LevelSetMode::shift;
    else if (value == "poisson")
      cfg.levelset_mode = LevelSetMode::poisson;
    else
      throw ConfigError("levelset_mode must be 'shift' or 'poisson'");
  } else if (key == "tol_fs") {
    cfg.coupling.tol_fs_pressure = cfg.coupling.tol_fs_displacement =
        cfg.coupling.tol_fs_phasefield = to_double(value, key);
  } else if (key == "tol_fs_pressure") {
    cfg.coupling.tol_fs_pressure = to_double(value, key);
  } else if (key == "tol_fs_displacement") {
    cfg.coupling.tol_fs_displacement = to_double(value, key);
  } else if (key == "tol_fs_phasefield") {
    cfg.coupling.tol_fs_phasefield = to_double(value, key);
  } else if (key == "max_fs_iters") {
    cfg.coupling.max_fs_iters = static_cast<int>(to_long(value, key));
  } else if (key == "dt") {
    cfg.coupling.dt = to_double(value, key);
  } else if (key == "t_end") {
    cfg.coupling.t_end = to_double(value, key);
  } else if (key == "pc_max_rounds") {
    cfg.coupling.pc_max_rounds = static_cast<int>(to_long(value, key));
  } else if (key == "c_ref") {
    cfg.c_ref = to_double(value, key);
  } else if (key == "heterogeneous") {
    cfg.heterogeneity.enabled = to_long(value, key) != 0;
  } else if (key == "het_block_size") {
    cfg.heterogeneity.block_size = to_double(value, key);
  } else if (key == "e_min") {
    cfg.heterogeneity.e_min = to_double(value, key);
  } else if (key == "e_max") {
    cfg.heterogeneity.e_max = to_double(value, key);
  } else if (key == "k_r_min") {
    cfg.heterogeneity.k_min = to_double(value, key);
  } else if (key == "k_r_max") {
    cfg.heterogeneity.k_max = to_double(value, key);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_long(value, key));
    cfg.heterogeneity.seed = cfg.seed;
  } else if (key == "out_dir") {
    cfg.output.directory = value;
  } else if (key == "vtk_stride") {
    cfg.output.vtk_stride = static_cast<int>(to_long(value, key));
  } else if (key == "record_axis_pressure") {
    cfg.output.record_axis_pressure = to_long(value, key) != 0;
  } else if (key == "dump_systems") {
    cfg.output.dump_systems = to_long(value, key) != 0;
  } else if (key == "newton_tol_rel") {
    cfg.newton_tol_rel = to_double(value, key);
  } else if (key == "max_newton") {
    cfg.max_newton = static_cast<int>(to_long(value, key));
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ScenarioConfig cfg;
  bool fractures_reset = false, boxes_reset = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    // a config overriding a preset replaces its fracture / box lists
    if (key == "fracture" && !fractures_reset) {
      cfg.fractures.clear();
      fractures_reset = true;
    }
    if (key == "refine_box" && !boxes_reset) {
      cfg.refine_boxes.clear();
      boxes_reset = true;
    }
    if (key == "scenario") {
      fractures_reset = boxes_reset = false;
    }
    apply_config_line(cfg, key, value);
  }
  return cfg;
}

}  // namespace porefrac
