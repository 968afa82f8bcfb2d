#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace porefrac {

using Eigen::Vector2d;

/// Map from a constrained (hanging) item to its masters. Weights per line sum
/// to one (Q1 face-midpoint interpolation gives two masters at 0.5 each); an
/// optional inhomogeneity supports Dirichlet-type lines at the dof level.
class ConstraintSet {
 public:
  struct Line {
    std::vector<std::pair<int, double>> masters;  // empty for Dirichlet-type
    double inhom = 0.0;
  };

  void clear();
  void add_line(int idx, std::vector<std::pair<int, double>> masters, double inhom = 0.0);
  bool is_constrained(int idx) const;
  const Line& line(int idx) const;
  int n_constrained() const { return static_cast<int>(lines_.size()); }

  /// Resolve master chains so no master is itself constrained.
  void finalize();

  /// Overwrite constrained entries from their masters (ncomp interleaved
  /// components per item).
  void distribute(Eigen::VectorXd& v, int ncomp = 1) const;

  const std::vector<std::pair<int, Line>>& all_lines() const { return ordered_; }

 private:
  std::unordered_map<int, int> line_of_;
  std::vector<Line> lines_;
  std::vector<std::pair<int, Line>> ordered_;  // rebuilt on finalize
};

/// Adaptive 1-irregular quadtree mesh of axis-aligned quadrilaterals over a
/// rectangle. Vertices live on a dyadic integer lattice so geometric
/// predicates are exact. Immutable after construction; refinement produces a
/// new mesh.
class QuadMesh {
 public:
  static constexpr int kMaxLevel = 24;
  static constexpr std::int64_t kLattice = std::int64_t(1) << kMaxLevel;

  struct Cell {
    int level = 0;
    std::int64_t ix = 0, iy = 0;  // lattice coords of the SW corner
    int parent = -1;
    std::array<int, 4> child{-1, -1, -1, -1};
    std::array<int, 4> v{-1, -1, -1, -1};  // SW, SE, NE, NW
    int material_id = 1;                   // 0 fracture, 1 reservoir
    bool is_leaf() const { return child[0] < 0; }
  };

  /// Faces between active cells, enumerated from the finer side so a coarse
  /// face split by hanging nodes appears as its two half-faces.
  struct Face {
    int v0 = -1, v1 = -1;   // endpoint vertices (fine side)
    int cell = -1;          // owner (finer or equal level)
    int neighbor = -1;      // other side
    int axis = 0;           // 0: face normal along x, 1: along y
  };

  QuadMesh(const Vector2d& lower, const Vector2d& upper);

  // Geometry
  const Vector2d& lower() const { return lower_; }
  const Vector2d& upper() const { return upper_; }
  Vector2d extent() const { return upper_ - lower_; }

  int n_vertices() const { return static_cast<int>(vertex_coords_.size()); }
  const Vector2d& vertex(int v) const { return vertex_coords_[v]; }
  bool vertex_on_boundary(int v) const;

  int n_cells_total() const { return static_cast<int>(cells_.size()); }
  const Cell& cell(int c) const { return cells_[c]; }
  Cell& cell_mutable(int c) { return cells_[c]; }
  const std::vector<int>& active_cells() const { return active_; }
  int n_active() const { return static_cast<int>(active_.size()); }

  double cell_hx(int c) const;
  double cell_hy(int c) const;
  double cell_diameter(int c) const;
  Vector2d cell_center(int c) const;
  double h_min() const;
  double h_max() const;
  double domain_area() const { return extent().x() * extent().y(); }

  const std::vector<Face>& faces() const { return faces_; }
  const ConstraintSet& constraints() const { return constraints_; }

  /// Split every flagged active cell into four children; closure refinement
  /// restores 1-irregularity. Returns the refined mesh.
  QuadMesh refined(const std::vector<char>& flags) const;

  /// Global refinement convenience.
  QuadMesh refined_uniform() const;

  /// Leaf containing the point (clamped to the domain); descends the tree.
  int locate(const Vector2d& x) const;

  /// Q1 point evaluation of interleaved nodal data (ncomp components).
  Eigen::VectorXd value_at(const Eigen::VectorXd& nodal, int ncomp, const Vector2d& x) const;

  /// Interpolate nodal data onto another (nested) mesh.
  Eigen::VectorXd interpolate_to(const QuadMesh& target, const Eigen::VectorXd& nodal,
                                 int ncomp) const;

  /// Local coordinates of x inside active cell c, each in [0,1].
  Vector2d local_coords(int c, const Vector2d& x) const;

 private:
  friend QuadMesh build_rect_mesh(const Vector2d&, const Vector2d&, int,
                                  const std::vector<std::pair<Eigen::Vector4d, int>>&);

  Vector2d lower_, upper_;
  std::vector<Vector2d> vertex_coords_;
  std::vector<std::array<std::int64_t, 2>> vertex_lattice_;
  std::unordered_map<std::uint64_t, int> vertex_by_key_;
  std::vector<Cell> cells_;
  std::unordered_map<std::uint64_t, int> cell_by_key_;
  std::vector<int> active_;
  std::vector<Face> faces_;
  ConstraintSet constraints_;

  int find_or_create_vertex(std::int64_t ix, std::int64_t iy);
  int cell_at(int level, std::int64_t ci, std::int64_t cj) const;  // -1 if absent
  void split(int c);
  void ensure_refinable(int c);
  void rebuild_topology();
};

/// Mesh over an axis-aligned rectangle: n_uniform global refinements, then
/// each box [x0,y0,x1,y1] gets the requested extra levels (cells overlapping
/// the box are split, with 1-irregular closure).
QuadMesh build_rect_mesh(const Vector2d& lower, const Vector2d& upper, int n_uniform,
                         const std::vector<std::pair<Eigen::Vector4d, int>>& local_boxes = {});

/// Predictor-corrector refinement indicator: a cell is flagged iff its
/// minimum nodal phase-field value is below c_ref and its diameter still
/// exceeds eps/2.
std::vector<char> predictor_corrector_flags(const QuadMesh& mesh, const Eigen::VectorXd& phi,
                                            double eps, double c_ref);

}  // namespace porefrac
