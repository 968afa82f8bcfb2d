#pragma once

#include <functional>

#include "porefrac/csr.hpp"
#include "porefrac/mesh.hpp"

namespace porefrac {

enum class FieldKind { scalar = 1, vector2 = 2, coupled3 = 3 };

/// Dof layout for a nodal field: dofs are vertex-major interleaved,
/// dof = vertex * ncomp + component, a contiguous 0-based range.
struct DofMap {
  FieldKind kind = FieldKind::scalar;
  int ncomp = 1;
  int n_vertices = 0;

  DofMap() = default;
  DofMap(const QuadMesh& mesh, FieldKind k)
      : kind(k), ncomp(static_cast<int>(k)), n_vertices(mesh.n_vertices()) {}

  int n_dofs() const { return ncomp * n_vertices; }
  int dof(int vertex, int comp = 0) const { return vertex * ncomp + comp; }
};

/// Dof-level constraints: hanging-node interpolation lines expanded per
/// component plus Dirichlet lines. Assembly condenses constrained rows and
/// columns onto masters; solutions are completed with distribute().
class DofConstraints {
 public:
  DofConstraints() = default;
  DofConstraints(const QuadMesh& mesh, const DofMap& dofmap);

  void add_dirichlet(int dof, double value);
  void close();

  bool is_constrained(int dof) const { return line_of_[dof] >= 0; }
  int n_dofs() const { return static_cast<int>(line_of_.size()); }

  /// Entries of constrained dofs overwritten by master combination + inhom.
  void distribute(Vec& v) const;
  /// Zero constrained entries (residual norms on the free dofs).
  void set_zero(Vec& v) const;

  /// Resolution of a dof into (master dof, weight) pairs; identity when free.
  void resolve(int dof, std::vector<std::pair<int, double>>& out) const;
  double inhomogeneity(int dof) const;

 private:
  std::vector<int> line_of_;
  struct Line {
    std::vector<std::pair<int, double>> masters;
    double inhom = 0.0;
  };
  std::vector<Line> lines_;
};

/// Per-cell quadrature data handed to assembly kernels. 2x2 Gauss points on
/// axis-aligned rectangles; shape values/gradients are already mapped.
struct CellQuad {
  int cell = 0;
  std::array<int, 4> vids{};
  int nq = 4;
  std::array<Vector2d, 4> xq{};
  std::array<double, 4> jxw{};
  double n[4][4];            // n[q][i]
  Vector2d grad[4][4];       // physical gradients
  double hx = 0, hy = 0;

  double eval(const Vec& nodal, int q) const {
    double s = 0;
    for (int i = 0; i < 4; ++i) s += n[q][i] * nodal[vids[i]];
    return s;
  }
  Vector2d eval_grad(const Vec& nodal, int q) const {
    Vector2d g(0, 0);
    for (int i = 0; i < 4; ++i) g += grad[q][i] * nodal[vids[i]];
    return g;
  }
  Vector2d eval_vec2(const Vec& nodal, int q) const {
    Vector2d u(0, 0);
    for (int i = 0; i < 4; ++i) {
      u.x() += n[q][i] * nodal[2 * vids[i]];
      u.y() += n[q][i] * nodal[2 * vids[i] + 1];
    }
    return u;
  }
  Eigen::Matrix2d eval_grad_vec2(const Vec& nodal, int q) const {
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();  // g(r,c) = d u_r / d x_c
    for (int i = 0; i < 4; ++i) {
      g.row(0) += nodal[2 * vids[i]] * grad[q][i].transpose();
      g.row(1) += nodal[2 * vids[i] + 1] * grad[q][i].transpose();
    }
    return g;
  }
};

/// Face quadrature data (2-point Gauss on the segment) for interface terms;
/// shape values are traces of the owning cell's basis.
struct FaceQuad {
  int face = 0;
  int cell = 0;
  std::array<int, 4> vids{};
  int nq = 2;
  std::array<Vector2d, 2> xq{};
  std::array<double, 2> jxw{};
  double n[2][4];
};

using CellKernel = std::function<void(const CellQuad&, Eigen::MatrixXd& a_loc, Eigen::VectorXd& b_loc)>;
using FaceKernel = std::function<void(const FaceQuad&, Eigen::MatrixXd& a_loc, Eigen::VectorXd& b_loc)>;

/// Q1 shape values and reference gradients at (xi, eta) in [0,1]^2.
void q1_shape(double xi, double eta, std::array<double, 4>& vals,
              std::array<Vector2d, 4>& grads);

/// Fill cell quadrature data for an active cell.
void init_cell_quad(const QuadMesh& mesh, int cell, CellQuad& cq);

/// Sparsity pattern of the constrained system for a dofmap.
CsrMatrix build_sparse_matrix(const QuadMesh& mesh, const DofMap& dofmap,
                              const DofConstraints& constraints);

/// Generic assembly: loops active cells, calls the kernel, distributes local
/// contributions through the constraints (condensed rows/cols), finalizes
/// constrained rows to identity. Optional face kernel runs over the given
/// face subset. Symmetric kernels yield symmetric matrices.
void assemble(const QuadMesh& mesh, const DofMap& dofmap, const DofConstraints& constraints,
              const CellKernel& kernel, CsrMatrix& a, Vec& b,
              const std::vector<int>* face_set = nullptr,
              const FaceKernel* face_kernel = nullptr,
              bool want_matrix = true);

/// Raw (uncondensed apart from hanging nodes) vector-only assembly; used for
/// residuals where constrained entries carry multiplier information.
void assemble_vector(const QuadMesh& mesh, const DofMap& dofmap,
                     const DofConstraints& hanging_only,
                     const CellKernel& kernel, Vec& b,
                     const std::vector<int>* face_set = nullptr,
                     const FaceKernel* face_kernel = nullptr);

/// Symmetric Dirichlet elimination on an assembled system: constrained rows
/// and columns zeroed, diagonal one, rhs corrected so the solution equals the
/// prescribed values there.
void apply_dirichlet(CsrMatrix& a, Vec& b, const std::vector<int>& dofs,
                     const std::vector<double>& values);

/// L2 norm over the domain of a nodal field with ncomp components.
double l2_norm(const QuadMesh& mesh, const Vec& nodal, int ncomp = 1);

/// Boundary vertex list (for Dirichlet conditions on the outer boundary).
std::vector<int> boundary_vertices(const QuadMesh& mesh);

}  // namespace porefrac
