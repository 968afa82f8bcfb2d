#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "porefrac/flow.hpp"
#include "porefrac/width.hpp"

namespace porefrac {

/// Initial fracture: a thin axis-aligned or rotated slab where the
/// phase-field starts at zero.
struct FractureSpec {
  Vector2d center{0, 0};
  double half_length = 0.2;
  double angle = 0;           // radians; 0 = horizontal
  double half_thickness = 0;  // 0: use eps/2
};

struct RefineBox {
  Eigen::Vector4d rect{0, 0, 0, 0};  // x0 y0 x1 y1
  int levels = 0;
};

/// Block-random heterogeneous fields (Young's modulus and reservoir
/// permeability), deterministic in the seed.
struct HeterogeneitySpec {
  bool enabled = false;
  std::uint64_t seed = 0;
  double block_size = 1.0;  // [m]; must exceed eps
  double e_min = 1e7, e_max = 1e8;
  double k_min = 1e-13, k_max = 1e-12;
};

struct CouplingConfig {
  double tol_fs_pressure = 1e-3;
  double tol_fs_displacement = 1e-3;
  double tol_fs_phasefield = 1e-3;
  int max_fs_iters = 50;
  double dt = 1.0;   // [s]
  double t_end = 10; // [s]
  int pc_max_rounds = 3;
};

struct OutputSpec {
  std::string directory = "out";
  int vtk_stride = 0;  // 0 disables VTK snapshots
  bool record_axis_pressure = false;
  bool dump_systems = false;  // MatrixMarket export of first assembled systems
};

/// Everything needed to run a scenario.
struct ScenarioConfig {
  std::string name = "custom";

  Vector2d domain_lower{0, 0};
  Vector2d domain_upper{4, 4};
  int n_uniform = 5;
  std::vector<RefineBox> refine_boxes;

  std::vector<FractureSpec> fractures;

  // Mechanics
  double young_modulus = 1.0;  // [Pa], homogeneous default
  double poisson_ratio = 0.2;
  double g_c = 1.0;            // [N/m]
  double epsilon = 0;          // [m]; 0: epsilon_factor * h_min
  double epsilon_factor = 2.0;
  double kappa_factor = 1e-10;  // kappa = kappa_factor * h_min

  // Flow
  double alpha = 0;
  double biot_modulus = 1e8;  // [Pa]
  double c_f = 1e-8;          // [1/Pa]
  double eta_r = 1e-3, eta_f = 1e-3;
  double rho_r = 1.0, rho_f = 1.0;
  Eigen::Vector2d gravity{0, 0};
  double k_r = 1e-12;  // [m^2], homogeneous default
  double c_x = 0.1;
  double q_f = 0;               // injection rate density [1/s]
  double q_r = 0;
  double source_radius_factor = 2.0;  // well disc radius = factor * eps
  double source_scale = 1.0;          // well normalization (see presets)
  double stab_denom_override = 0;

  // Width / level-set
  double c_ls = 0.1;
  double theta = 1e3;
  double beta = 100;
  double f1 = -10, f2 = 10;
  LevelSetMode levelset_mode = LevelSetMode::shift;

  // Coupling / adaptivity
  CouplingConfig coupling;
  double c_ref = 0.8;  // predictor-corrector flag threshold

  HeterogeneitySpec heterogeneity;
  OutputSpec output;
  std::uint64_t seed = 0;

  // Newton knobs
  double newton_tol_rel = 1e-8;
  int max_newton = 50;

  void validate() const;
};

/// Built-in scenario presets.
ScenarioConfig example1_config(double alpha = 0);
ScenarioConfig example3_config();
ScenarioConfig example4_config();
ScenarioConfig preset_config(const std::string& name);

/// Flat key = value configuration file. Unknown keys are errors; repeated
/// `fracture` / `refine_box` keys append. A `scenario` key selects the preset
/// the remaining keys override.
ScenarioConfig parse_config_file(const std::string& path);
void apply_config_line(ScenarioConfig& cfg, const std::string& key, const std::string& value);

}  // namespace porefrac
