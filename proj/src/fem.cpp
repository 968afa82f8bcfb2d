#include "porefrac/fem.hpp"

#include <algorithm>
#include <cmath>

#include "porefrac/errors.hpp"

namespace porefrac {

namespace {
constexpr double kGaussA = 0.5 - 0.5 / 1.7320508075688772;  // 2-point Gauss on [0,1]
constexpr double kGaussB = 0.5 + 0.5 / 1.7320508075688772;
}  // namespace

void q1_shape(double xi, double eta, std::array<double, 4>& vals,
              std::array<Vector2d, 4>& grads) {
  vals[0] = (1 - xi) * (1 - eta);
  vals[1] = xi * (1 - eta);
  vals[2] = xi * eta;
  vals[3] = (1 - xi) * eta;
  grads[0] = {-(1 - eta), -(1 - xi)};
  grads[1] = {1 - eta, -xi};
  grads[2] = {eta, xi};
  grads[3] = {-eta, 1 - xi};
}

// ---------------------------------------------------------------------------
// DofConstraints

DofConstraints::DofConstraints(const QuadMesh& mesh, const DofMap& dofmap) {
  line_of_.assign(dofmap.n_dofs(), -1);
  for (const auto& [vertex, ln] : mesh.constraints().all_lines()) {
    for (int c = 0; c < dofmap.ncomp; ++c) {
      Line dl;
      dl.inhom = ln.inhom;
      dl.masters.reserve(ln.masters.size());
      for (auto& [m, w] : ln.masters) dl.masters.emplace_back(dofmap.dof(m, c), w);
      line_of_[dofmap.dof(vertex, c)] = static_cast<int>(lines_.size());
      lines_.push_back(std::move(dl));
    }
  }
}

void DofConstraints::add_dirichlet(int dof, double value) {
  if (line_of_[dof] >= 0) {
    // a hanging dof on the boundary keeps the interpolation; masters are on
    // the boundary too and receive the value themselves
    return;
  }
  line_of_[dof] = static_cast<int>(lines_.size());
  lines_.push_back(Line{{}, value});
}

void DofConstraints::close() {}

void DofConstraints::distribute(Vec& v) const {
  for (int d = 0; d < n_dofs(); ++d) {
    const int l = line_of_[d];
    if (l < 0) continue;
    double s = lines_[l].inhom;
    for (auto& [m, w] : lines_[l].masters) s += w * v[m];
    v[d] = s;
  }
}

void DofConstraints::set_zero(Vec& v) const {
  for (int d = 0; d < n_dofs(); ++d)
    if (line_of_[d] >= 0) v[d] = 0.0;
}

void DofConstraints::resolve(int dof, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  const int l = line_of_[dof];
  if (l < 0)
    out.emplace_back(dof, 1.0);
  else
    out.insert(out.end(), lines_[l].masters.begin(), lines_[l].masters.end());
}

double DofConstraints::inhomogeneity(int dof) const {
  const int l = line_of_[dof];
  return l < 0 ? 0.0 : lines_[l].inhom;
}

// ---------------------------------------------------------------------------
// Quadrature setup

void init_cell_quad(const QuadMesh& mesh, int cell, CellQuad& cq) {
  const auto& c = mesh.cell(cell);
  cq.cell = cell;
  cq.vids = c.v;
  cq.nq = 4;
  cq.hx = mesh.cell_hx(cell);
  cq.hy = mesh.cell_hy(cell);
  if (!(cq.hx > 0) || !(cq.hy > 0)) throw AssemblyError("singular cell mapping");
  const Vector2d x0 = mesh.vertex(c.v[0]);
  const double pts[2] = {kGaussA, kGaussB};
  std::array<double, 4> vals;
  std::array<Vector2d, 4> grads;
  int q = 0;
  for (int qy = 0; qy < 2; ++qy)
    for (int qx = 0; qx < 2; ++qx, ++q) {
      const double xi = pts[qx], eta = pts[qy];
      q1_shape(xi, eta, vals, grads);
      cq.xq[q] = {x0.x() + xi * cq.hx, x0.y() + eta * cq.hy};
      cq.jxw[q] = 0.25 * cq.hx * cq.hy;
      for (int i = 0; i < 4; ++i) {
        cq.n[q][i] = vals[i];
        cq.grad[q][i] = {grads[i].x() / cq.hx, grads[i].y() / cq.hy};
      }
    }
}

namespace {

void init_face_quad(const QuadMesh& mesh, int face_idx, FaceQuad& fq) {
  const auto& face = mesh.faces()[face_idx];
  fq.face = face_idx;
  fq.cell = face.cell;
  fq.vids = mesh.cell(face.cell).v;
  fq.nq = 2;
  const Vector2d a = mesh.vertex(face.v0);
  const Vector2d b = mesh.vertex(face.v1);
  const double len = (b - a).norm();
  const double pts[2] = {kGaussA, kGaussB};
  std::array<double, 4> vals;
  std::array<Vector2d, 4> grads;
  for (int q = 0; q < 2; ++q) {
    const Vector2d x = a + pts[q] * (b - a);
    fq.xq[q] = x;
    fq.jxw[q] = 0.5 * len;
    const Vector2d xi = mesh.local_coords(face.cell, x);
    q1_shape(xi.x(), xi.y(), vals, grads);
    for (int i = 0; i < 4; ++i) fq.n[q][i] = vals[i];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Sparsity and assembly

CsrMatrix build_sparse_matrix(const QuadMesh& mesh, const DofMap& dofmap,
                              const DofConstraints& constraints) {
  const int n = dofmap.n_dofs();
  std::vector<std::vector<int>> rows(n);
  std::vector<int> cell_dofs;
  std::vector<std::pair<int, double>> res;
  for (int c : mesh.active_cells()) {
    const auto& cell = mesh.cell(c);
    cell_dofs.clear();
    for (int i = 0; i < 4; ++i)
      for (int comp = 0; comp < dofmap.ncomp; ++comp) {
        constraints.resolve(dofmap.dof(cell.v[i], comp), res);
        for (auto& [g, w] : res) cell_dofs.push_back(g);
      }
    std::sort(cell_dofs.begin(), cell_dofs.end());
    cell_dofs.erase(std::unique(cell_dofs.begin(), cell_dofs.end()), cell_dofs.end());
    for (int a : cell_dofs)
      for (int b : cell_dofs) rows[a].push_back(b);
  }
  for (int d = 0; d < n; ++d) rows[d].push_back(d);
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return CsrMatrix::from_pattern(rows);
}

namespace {

// Scatter a local block through the constraints: constrained rows/cols are
// distributed onto masters, inhomogeneities move to the rhs. The resolutions
// of all local dofs are materialized once per cell in `scratch`.
void distribute_local(const DofConstraints& constraints, const std::vector<int>& dofs,
                      const Eigen::MatrixXd& a_loc, const Eigen::VectorXd& b_loc,
                      CsrMatrix* a, Vec* b,
                      std::vector<std::vector<std::pair<int, double>>>& scratch) {
  const int nl = static_cast<int>(dofs.size());
  if (static_cast<int>(scratch.size()) < nl) scratch.resize(nl);
  for (int i = 0; i < nl; ++i) constraints.resolve(dofs[i], scratch[i]);

  for (int i = 0; i < nl; ++i) {
    for (auto& [gi, wi] : scratch[i]) {
      if (b) {
        double rhs = wi * b_loc[i];
        if (a) {
          for (int j = 0; j < nl; ++j) {
            const double inhom = constraints.inhomogeneity(dofs[j]);
            if (inhom != 0.0) rhs -= wi * a_loc(i, j) * inhom;
          }
        }
        (*b)[gi] += rhs;
      }
      if (a) {
        for (int j = 0; j < nl; ++j) {
          if (a_loc(i, j) == 0.0) continue;
          for (auto& [gj, wj] : scratch[j]) a->add(gi, gj, wi * wj * a_loc(i, j));
        }
      }
    }
  }
}

void finalize_constrained(const DofConstraints& constraints, CsrMatrix* a, Vec* b) {
  for (int d = 0; d < constraints.n_dofs(); ++d) {
    if (!constraints.is_constrained(d)) continue;
    if (a) a->at(d, d) = 1.0;
    if (b) (*b)[d] = constraints.inhomogeneity(d);
  }
}

}  // namespace

void assemble(const QuadMesh& mesh, const DofMap& dofmap, const DofConstraints& constraints,
              const CellKernel& kernel, CsrMatrix& a, Vec& b,
              const std::vector<int>* face_set, const FaceKernel* face_kernel,
              bool want_matrix) {
  const int nloc = 4 * dofmap.ncomp;
  b = Vec::Zero(dofmap.n_dofs());
  if (want_matrix) a.set_zero();
  Eigen::MatrixXd a_loc(nloc, nloc);
  Eigen::VectorXd b_loc(nloc);
  CellQuad cq;
  std::vector<int> dofs(nloc);
  std::vector<std::vector<std::pair<int, double>>> scratch(nloc);
  for (int c : mesh.active_cells()) {
    init_cell_quad(mesh, c, cq);
    a_loc.setZero();
    b_loc.setZero();
    kernel(cq, a_loc, b_loc);
    for (int i = 0; i < 4; ++i)
      for (int comp = 0; comp < dofmap.ncomp; ++comp)
        dofs[i * dofmap.ncomp + comp] = dofmap.dof(cq.vids[i], comp);
    distribute_local(constraints, dofs, a_loc, b_loc, want_matrix ? &a : nullptr, &b, scratch);
  }
  if (face_set && face_kernel) {
    FaceQuad fq;
    for (int f : *face_set) {
      init_face_quad(mesh, f, fq);
      a_loc.setZero();
      b_loc.setZero();
      (*face_kernel)(fq, a_loc, b_loc);
      for (int i = 0; i < 4; ++i)
        for (int comp = 0; comp < dofmap.ncomp; ++comp)
          dofs[i * dofmap.ncomp + comp] = dofmap.dof(fq.vids[i], comp);
      distribute_local(constraints, dofs, a_loc, b_loc, want_matrix ? &a : nullptr, &b, scratch);
    }
  }
  finalize_constrained(constraints, want_matrix ? &a : nullptr, &b);
}

void assemble_vector(const QuadMesh& mesh, const DofMap& dofmap,
                     const DofConstraints& hanging_only, const CellKernel& kernel, Vec& b,
                     const std::vector<int>* face_set, const FaceKernel* face_kernel) {
  const int nloc = 4 * dofmap.ncomp;
  b = Vec::Zero(dofmap.n_dofs());
  Eigen::MatrixXd a_loc(nloc, nloc);
  Eigen::VectorXd b_loc(nloc);
  CellQuad cq;
  std::vector<int> dofs(nloc);
  std::vector<std::vector<std::pair<int, double>>> scratch(nloc);
  for (int c : mesh.active_cells()) {
    init_cell_quad(mesh, c, cq);
    b_loc.setZero();
    kernel(cq, a_loc, b_loc);
    for (int i = 0; i < 4; ++i)
      for (int comp = 0; comp < dofmap.ncomp; ++comp)
        dofs[i * dofmap.ncomp + comp] = dofmap.dof(cq.vids[i], comp);
    distribute_local(hanging_only, dofs, a_loc, b_loc, nullptr, &b, scratch);
  }
  if (face_set && face_kernel) {
    FaceQuad fq;
    for (int f : *face_set) {
      init_face_quad(mesh, f, fq);
      b_loc.setZero();
      (*face_kernel)(fq, a_loc, b_loc);
      for (int i = 0; i < 4; ++i)
        for (int comp = 0; comp < dofmap.ncomp; ++comp)
          dofs[i * dofmap.ncomp + comp] = dofmap.dof(fq.vids[i], comp);
      distribute_local(hanging_only, dofs, a_loc, b_loc, nullptr, &b, scratch);
    }
  }
}

void apply_dirichlet(CsrMatrix& a, Vec& b, const std::vector<int>& dofs,
                     const std::vector<double>& values) {
  if (dofs.empty()) return;
  const int n = a.n();
  std::vector<char> mask(n, 0);
  std::vector<double> val(n, 0.0);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    mask[dofs[k]] = 1;
    val[dofs[k]] = values[k];
  }
  // move known column values to the rhs, then zero rows/cols symmetrically
  const auto& rp = a.row_ptr();
  const auto& cols = a.cols();
  for (int i = 0; i < n; ++i) {
    if (mask[i]) continue;
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      if (mask[cols[k]]) b[i] -= a.vals()[k] * val[cols[k]];
  }
  a.eliminate_symmetric(dofs, mask);
  for (std::size_t k = 0; k < dofs.size(); ++k) b[dofs[k]] = values[k];
}

double l2_norm(const QuadMesh& mesh, const Vec& nodal, int ncomp) {
  double s = 0;
  CellQuad cq;
  for (int c : mesh.active_cells()) {
    init_cell_quad(mesh, c, cq);
    for (int q = 0; q < cq.nq; ++q) {
      double v2 = 0;
      for (int comp = 0; comp < ncomp; ++comp) {
        double v = 0;
        for (int i = 0; i < 4; ++i) v += cq.n[q][i] * nodal[cq.vids[i] * ncomp + comp];
        v2 += v * v;
      }
      s += cq.jxw[q] * v2;
    }
  }
  return std::sqrt(s);
}

std::vector<int> boundary_vertices(const QuadMesh& mesh) {
  std::vector<int> out;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (mesh.vertex_on_boundary(v)) out.push_back(v);
  return out;
}

}  // namespace porefrac
