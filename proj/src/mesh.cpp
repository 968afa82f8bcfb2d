#include "porefrac/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "porefrac/errors.hpp"

namespace porefrac {

namespace {

inline std::uint64_t vkey(std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(ix) << 25) | static_cast<std::uint64_t>(iy);
}

inline std::uint64_t ckey(int level, std::int64_t ci, std::int64_t cj) {
  return (static_cast<std::uint64_t>(level) << 48) |
         (static_cast<std::uint64_t>(ci) << 24) | static_cast<std::uint64_t>(cj);
}

// face index -> (di, dj) of the same-level neighbor
constexpr int kFaceDi[4] = {1, -1, 0, 0};   // E, W, N, S
constexpr int kFaceDj[4] = {0, 0, 1, -1};

}  // namespace

// ---------------------------------------------------------------------------
// ConstraintSet

void ConstraintSet::clear() {
  line_of_.clear();
  lines_.clear();
  ordered_.clear();
}

void ConstraintSet::add_line(int idx, std::vector<std::pair<int, double>> masters,
                             double inhom) {
  line_of_[idx] = static_cast<int>(lines_.size());
  lines_.push_back(Line{std::move(masters), inhom});
}

bool ConstraintSet::is_constrained(int idx) const { return line_of_.count(idx) > 0; }

const ConstraintSet::Line& ConstraintSet::line(int idx) const {
  return lines_[line_of_.at(idx)];
}

void ConstraintSet::finalize() {
  // Resolve chains: a master that is itself constrained is replaced by its
  // masters. Chains always move to coarser faces, so this terminates.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& ln : lines_) {
      std::vector<std::pair<int, double>> out;
      double inhom_add = 0;
      bool local = false;
      for (auto& [m, w] : ln.masters) {
        auto it = line_of_.find(m);
        if (it == line_of_.end()) {
          out.emplace_back(m, w);
        } else {
          local = true;
          const Line& sub = lines_[it->second];
          for (auto& [mm, ww] : sub.masters) out.emplace_back(mm, w * ww);
          inhom_add += w * sub.inhom;
        }
      }
      if (local) {
        ln.masters = std::move(out);
        ln.inhom += inhom_add;
        changed = true;
      }
    }
  }
  ordered_.clear();
  std::vector<int> idx;
  idx.reserve(line_of_.size());
  for (auto& [d, l] : line_of_) idx.push_back(d);
  std::sort(idx.begin(), idx.end());
  for (int d : idx) ordered_.emplace_back(d, lines_[line_of_[d]]);
}

void ConstraintSet::distribute(Eigen::VectorXd& v, int ncomp) const {
  for (const auto& [idx, ln] : ordered_) {
    for (int c = 0; c < ncomp; ++c) {
      double s = ln.inhom;
      for (auto& [m, w] : ln.masters) s += w * v[m * ncomp + c];
      v[idx * ncomp + c] = s;
    }
  }
}

// ---------------------------------------------------------------------------
// QuadMesh

QuadMesh::QuadMesh(const Vector2d& lower, const Vector2d& upper)
    : lower_(lower), upper_(upper) {
  if (!(upper.x() > lower.x()) || !(upper.y() > lower.y()))
    throw ConfigError("degenerate domain rectangle");
  Cell root;
  root.level = 0;
  root.ix = 0;
  root.iy = 0;
  root.v = {find_or_create_vertex(0, 0), find_or_create_vertex(kLattice, 0),
            find_or_create_vertex(kLattice, kLattice), find_or_create_vertex(0, kLattice)};
  cells_.push_back(root);
  cell_by_key_[ckey(0, 0, 0)] = 0;
  rebuild_topology();
}

int QuadMesh::find_or_create_vertex(std::int64_t ix, std::int64_t iy) {
  const auto key = vkey(ix, iy);
  auto it = vertex_by_key_.find(key);
  if (it != vertex_by_key_.end()) return it->second;
  const int id = static_cast<int>(vertex_coords_.size());
  vertex_by_key_.emplace(key, id);
  vertex_lattice_.push_back({ix, iy});
  const double fx = static_cast<double>(ix) / static_cast<double>(kLattice);
  const double fy = static_cast<double>(iy) / static_cast<double>(kLattice);
  vertex_coords_.emplace_back(lower_.x() + fx * extent().x(), lower_.y() + fy * extent().y());
  return id;
}

bool QuadMesh::vertex_on_boundary(int v) const {
  const auto& l = vertex_lattice_[v];
  return l[0] == 0 || l[0] == kLattice || l[1] == 0 || l[1] == kLattice;
}

int QuadMesh::cell_at(int level, std::int64_t ci, std::int64_t cj) const {
  if (level < 0 || ci < 0 || cj < 0) return -1;
  const std::int64_t n = std::int64_t(1) << level;
  if (ci >= n || cj >= n) return -1;
  auto it = cell_by_key_.find(ckey(level, ci, cj));
  return it == cell_by_key_.end() ? -1 : it->second;
}

double QuadMesh::cell_hx(int c) const {
  return extent().x() / static_cast<double>(std::int64_t(1) << cells_[c].level);
}
double QuadMesh::cell_hy(int c) const {
  return extent().y() / static_cast<double>(std::int64_t(1) << cells_[c].level);
}
double QuadMesh::cell_diameter(int c) const { return std::hypot(cell_hx(c), cell_hy(c)); }

Vector2d QuadMesh::cell_center(int c) const {
  const Cell& cell = cells_[c];
  const std::int64_t s = kLattice >> cell.level;
  const double fx = (cell.ix + 0.5 * s) / static_cast<double>(kLattice);
  const double fy = (cell.iy + 0.5 * s) / static_cast<double>(kLattice);
  return {lower_.x() + fx * extent().x(), lower_.y() + fy * extent().y()};
}

double QuadMesh::h_min() const {
  double h = std::numeric_limits<double>::max();
  for (int c : active_) h = std::min(h, cell_diameter(c));
  return h;
}

double QuadMesh::h_max() const {
  double h = 0;
  for (int c : active_) h = std::max(h, cell_diameter(c));
  return h;
}

void QuadMesh::split(int c) {
  Cell& cell = cells_[c];
  if (!cell.is_leaf()) return;
  if (cell.level >= kMaxLevel) throw ConfigError("refinement exceeds maximum level");
  const std::int64_t s = kLattice >> cell.level;
  const std::int64_t hx = s / 2;
  const std::int64_t x0 = cell.ix, y0 = cell.iy;

  const int vs = find_or_create_vertex(x0 + hx, y0);
  const int ve = find_or_create_vertex(x0 + s, y0 + hx);
  const int vn = find_or_create_vertex(x0 + hx, y0 + s);
  const int vw = find_or_create_vertex(x0, y0 + hx);
  const int vc = find_or_create_vertex(x0 + hx, y0 + hx);

  const int lvl = cell.level + 1;
  const std::array<std::array<std::int64_t, 2>, 4> corners = {
      {{x0, y0}, {x0 + hx, y0}, {x0 + hx, y0 + hx}, {x0, y0 + hx}}};
  const std::array<std::array<int, 4>, 4> verts = {{{cells_[c].v[0], vs, vc, vw},
                                                    {vs, cells_[c].v[1], ve, vc},
                                                    {vc, ve, cells_[c].v[2], vn},
                                                    {vw, vc, vn, cells_[c].v[3]}}};
  for (int k = 0; k < 4; ++k) {
    Cell child;
    child.level = lvl;
    child.ix = corners[k][0];
    child.iy = corners[k][1];
    child.parent = c;
    child.v = verts[k];
    child.material_id = cells_[c].material_id;
    const int id = static_cast<int>(cells_.size());
    cells_.push_back(child);
    cells_[c].child[k] = id;
    cell_by_key_[ckey(lvl, child.ix >> (kMaxLevel - lvl), child.iy >> (kMaxLevel - lvl))] = id;
  }
}

void QuadMesh::ensure_refinable(int c) {
  const Cell& cell = cells_[c];
  const int l = cell.level;
  const std::int64_t ci = cell.ix >> (kMaxLevel - l);
  const std::int64_t cj = cell.iy >> (kMaxLevel - l);
  for (int f = 0; f < 4; ++f) {
    const std::int64_t ni = ci + kFaceDi[f];
    const std::int64_t nj = cj + kFaceDj[f];
    const std::int64_t n = std::int64_t(1) << l;
    if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;  // boundary
    while (cell_at(l, ni, nj) < 0) {
      // deepest existing cell covering the neighbor slot is a leaf coarser
      // than l; it must be split before c can be.
      int cov = -1;
      for (int k = l - 1; k >= 0; --k) {
        cov = cell_at(k, ni >> (l - k), nj >> (l - k));
        if (cov >= 0) break;
      }
      ensure_refinable(cov);
      split(cov);
    }
  }
}

QuadMesh QuadMesh::refined(const std::vector<char>& flags) const {
  if (flags.size() != active_.size())
    throw ConfigError("refine: flag count does not match active cell count");
  QuadMesh m = *this;
  std::vector<int> to_split;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) to_split.push_back(active_[i]);
  for (int c : to_split) {
    if (!m.cells_[c].is_leaf()) continue;
    m.ensure_refinable(c);
    m.split(c);
  }
  m.rebuild_topology();
  return m;
}

QuadMesh QuadMesh::refined_uniform() const {
  return refined(std::vector<char>(active_.size(), 1));
}

void QuadMesh::rebuild_topology() {
  active_.clear();
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c)
    if (cells_[c].is_leaf()) active_.push_back(c);

  // Hanging-node constraints: a leaf whose same-level neighbor is refined is
  // the coarse side of a split face; the face midpoint vertex interpolates
  // the two face endpoints.
  constraints_.clear();
  for (int c : active_) {
    const Cell& cell = cells_[c];
    const int l = cell.level;
    const std::int64_t ci = cell.ix >> (kMaxLevel - l);
    const std::int64_t cj = cell.iy >> (kMaxLevel - l);
    const std::int64_t s = kLattice >> l;
    for (int f = 0; f < 4; ++f) {
      const int nb = cell_at(l, ci + kFaceDi[f], cj + kFaceDj[f]);
      if (nb < 0 || cells_[nb].is_leaf()) continue;
      // endpoints of this face and its midpoint
      std::int64_t mx, my;
      int a, b;
      switch (f) {
        case 0: a = cell.v[1]; b = cell.v[2]; mx = cell.ix + s; my = cell.iy + s / 2; break;
        case 1: a = cell.v[0]; b = cell.v[3]; mx = cell.ix; my = cell.iy + s / 2; break;
        case 2: a = cell.v[3]; b = cell.v[2]; mx = cell.ix + s / 2; my = cell.iy + s; break;
        default: a = cell.v[0]; b = cell.v[1]; mx = cell.ix + s / 2; my = cell.iy; break;
      }
      auto it = vertex_by_key_.find(vkey(mx, my));
      if (it == vertex_by_key_.end()) throw AssemblyError("missing hanging vertex");
      constraints_.add_line(it->second, {{a, 0.5}, {b, 0.5}});
    }
  }
  constraints_.finalize();

  // Face list from the finer (or equal-level, deduplicated) side.
  faces_.clear();
  for (int c : active_) {
    const Cell& cell = cells_[c];
    const int l = cell.level;
    const std::int64_t ci = cell.ix >> (kMaxLevel - l);
    const std::int64_t cj = cell.iy >> (kMaxLevel - l);
    for (int f = 0; f < 4; ++f) {
      const std::int64_t ni = ci + kFaceDi[f];
      const std::int64_t nj = cj + kFaceDj[f];
      const std::int64_t n = std::int64_t(1) << l;
      if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;
      int v0, v1;
      switch (f) {
        case 0: v0 = cell.v[1]; v1 = cell.v[2]; break;
        case 1: v0 = cell.v[0]; v1 = cell.v[3]; break;
        case 2: v0 = cell.v[3]; v1 = cell.v[2]; break;
        default: v0 = cell.v[0]; v1 = cell.v[1]; break;
      }
      const int axis = (f < 2) ? 0 : 1;
      const int same = cell_at(l, ni, nj);
      if (same >= 0) {
        if (cells_[same].is_leaf()) {
          if (f == 0 || f == 2)  // record each equal-level pair once
            faces_.push_back(Face{v0, v1, c, same, axis});
        }
        // refined neighbor: the finer side records the two half-faces
        continue;
      }
      // coarser neighbor: find the covering leaf
      int cov = -1;
      for (int k = l - 1; k >= 0; --k) {
        cov = cell_at(k, ni >> (l - k), nj >> (l - k));
        if (cov >= 0) break;
      }
      if (cov < 0) throw AssemblyError("mesh not covering the domain");
      faces_.push_back(Face{v0, v1, c, cov, axis});
    }
  }
}

int QuadMesh::locate(const Vector2d& x) const {
  double fx = (x.x() - lower_.x()) / extent().x() * static_cast<double>(kLattice);
  double fy = (x.y() - lower_.y()) / extent().y() * static_cast<double>(kLattice);
  fx = std::clamp(fx, 0.0, static_cast<double>(kLattice));
  fy = std::clamp(fy, 0.0, static_cast<double>(kLattice));
  int c = 0;  // root
  while (!cells_[c].is_leaf()) {
    const Cell& cell = cells_[c];
    const std::int64_t s = kLattice >> cell.level;
    const double mx = static_cast<double>(cell.ix + s / 2);
    const double my = static_cast<double>(cell.iy + s / 2);
    const bool east = fx >= mx;
    const bool north = fy >= my;
    c = cell.child[east ? (north ? 2 : 1) : (north ? 3 : 0)];
  }
  return c;
}

Vector2d QuadMesh::local_coords(int c, const Vector2d& x) const {
  const Cell& cell = cells_[c];
  const std::int64_t s = kLattice >> cell.level;
  const double x0 = lower_.x() + cell.ix / static_cast<double>(kLattice) * extent().x();
  const double y0 = lower_.y() + cell.iy / static_cast<double>(kLattice) * extent().y();
  const double hx = extent().x() * s / static_cast<double>(kLattice);
  const double hy = extent().y() * s / static_cast<double>(kLattice);
  return {std::clamp((x.x() - x0) / hx, 0.0, 1.0), std::clamp((x.y() - y0) / hy, 0.0, 1.0)};
}

Eigen::VectorXd QuadMesh::value_at(const Eigen::VectorXd& nodal, int ncomp,
                                   const Vector2d& x) const {
  const int c = locate(x);
  const Vector2d xi = local_coords(c, x);
  const double n0 = (1 - xi.x()) * (1 - xi.y());
  const double n1 = xi.x() * (1 - xi.y());
  const double n2 = xi.x() * xi.y();
  const double n3 = (1 - xi.x()) * xi.y();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ncomp);
  const auto& v = cells_[c].v;
  for (int comp = 0; comp < ncomp; ++comp)
    out[comp] = n0 * nodal[v[0] * ncomp + comp] + n1 * nodal[v[1] * ncomp + comp] +
                n2 * nodal[v[2] * ncomp + comp] + n3 * nodal[v[3] * ncomp + comp];
  return out;
}

Eigen::VectorXd QuadMesh::interpolate_to(const QuadMesh& target, const Eigen::VectorXd& nodal,
                                         int ncomp) const {
  Eigen::VectorXd out(static_cast<std::int64_t>(target.n_vertices()) * ncomp);
  for (int v = 0; v < target.n_vertices(); ++v) {
    const Eigen::VectorXd val = value_at(nodal, ncomp, target.vertex(v));
    for (int comp = 0; comp < ncomp; ++comp) out[v * ncomp + comp] = val[comp];
  }
  return out;
}

QuadMesh build_rect_mesh(const Vector2d& lower, const Vector2d& upper, int n_uniform,
                         const std::vector<std::pair<Eigen::Vector4d, int>>& local_boxes) {
  if (n_uniform < 0) throw ConfigError("n_uniform must be nonnegative");
  QuadMesh mesh(lower, upper);
  for (int i = 0; i < n_uniform; ++i) mesh = mesh.refined_uniform();

  constexpr double tol = 1e-12;
  for (const auto& [box, levels] : local_boxes) {
    if (box[0] < lower.x() - tol || box[1] < lower.y() - tol || box[2] > upper.x() + tol ||
        box[3] > upper.y() + tol || box[0] >= box[2] || box[1] >= box[3])
      throw ConfigError("refinement box outside domain");
    for (int k = 0; k < levels; ++k) {
      std::vector<char> flags(mesh.n_active(), 0);
      const auto& act = mesh.active_cells();
      for (std::size_t i = 0; i < act.size(); ++i) {
        const int c = act[i];
        const Vector2d ctr = mesh.cell_center(c);
        const double hx = mesh.cell_hx(c) / 2, hy = mesh.cell_hy(c) / 2;
        const bool overlap = ctr.x() - hx < box[2] && ctr.x() + hx > box[0] &&
                             ctr.y() - hy < box[3] && ctr.y() + hy > box[1];
        flags[i] = overlap ? 1 : 0;
      }
      mesh = mesh.refined(flags);
    }
  }
  return mesh;
}

std::vector<char> predictor_corrector_flags(const QuadMesh& mesh, const Eigen::VectorXd& phi,
                                            double eps, double c_ref) {
  if (c_ref < 0 || c_ref > 1) throw ConfigError("c_ref must lie in [0,1]");
  std::vector<char> flags(mesh.n_active(), 0);
  const auto& act = mesh.active_cells();
  for (std::size_t i = 0; i < act.size(); ++i) {
    const auto& cell = mesh.cell(act[i]);
    double phi_min = std::numeric_limits<double>::max();
    for (int k = 0; k < 4; ++k) phi_min = std::min(phi_min, phi[cell.v[k]]);
    flags[i] = (phi_min < c_ref && mesh.cell_diameter(act[i]) > eps / 2) ? 1 : 0;
  }
  return flags;
}

}  // namespace porefrac
