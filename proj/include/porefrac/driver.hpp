#pragma once

#include <functional>

#include "porefrac/config.hpp"
#include "porefrac/mechanics.hpp"

namespace porefrac {

/// Nodal solution fields at one time level.
struct FieldState {
  Vec p;       // pressure
  Vec u;       // displacement, interleaved
  Vec phi;     // phase-field
  Vec phi_ls;  // level-set
  Vec w;       // width
};

/// Per-step diagnostics mirroring the quantities the runs report.
struct TimeStepReport {
  double time = 0;
  int fs_iterations = 0;
  int newton_iterations_total = 0;
  int gmres_iterations_total = 0;
  int active_cells = 0;
  double max_pressure = 0;
  double max_width = 0;
  double half_length = 0;
};

/// Full simulation state owned by the driver.
struct SimState {
  QuadMesh mesh;
  FieldState fields;     // at t^n
  Vec phi_prev;          // phase-field at t^{n-1} (extrapolation history)
  int step = 0;          // completed steps
  double time = 0;
  Vec e_cell;            // material fields on the current mesh
  Vec k_r_cell;
  double kappa = 0;
  double eps = 0;        // regularization length, fixed at setup

  explicit SimState(QuadMesh m) : mesh(std::move(m)) {}
};

struct FixedStressResult {
  FieldState fields;
  TimeStepReport report;
  bool converged = false;
};

/// One time step of the iterative coupling: per iterate compute the level-set,
/// the width, the stabilized pressure and the displacement/phase-field solve,
/// until the increments of P, U and Phi all drop below their tolerances in L2.
/// Mutates only the mesh material ids; the time-level fields stay untouched.
FixedStressResult fixed_stress_step(SimState& state, const ScenarioConfig& cfg, double dt);

struct RunResult {
  std::vector<TimeStepReport> reports;
  double max_irreversibility_violation = 0;
  bool ok = true;
  std::string error;
};

/// Called after every accepted step (QoI extraction, output writing).
using StepCallback = std::function<void(const SimState&, const TimeStepReport&)>;

/// Time loop with predictor-corrector mesh adaptivity: after each step the
/// refinement indicator is evaluated on the new phase-field; if cells are
/// flagged, the mesh is refined, history re-interpolated from its pre-step
/// values and the step recomputed (bounded number of rounds). Throws nothing;
/// failures are reported in RunResult with partial reports retained.
RunResult run_time_loop(SimState& state, const ScenarioConfig& cfg,
                        const StepCallback& on_step = {});

/// Initialize a SimState for a scenario: build the mesh, the material fields,
/// the initial phase-field and zero flow/mechanics fields.
SimState make_initial_state(const ScenarioConfig& cfg);

/// Rebuild per-cell material fields (heterogeneous or uniform) for a mesh.
void build_material_fields(const ScenarioConfig& cfg, const QuadMesh& mesh, Vec& e_cell,
                           Vec& k_r_cell);

/// Flow parameter bundle for the current state (sources positioned at the
/// fracture centers).
FlowParams make_flow_params(const ScenarioConfig& cfg, const SimState& state);

}  // namespace porefrac
