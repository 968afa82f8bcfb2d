#include "doctest.h"
#include "porefrac/errors.hpp"
#include "porefrac/fem.hpp"
#include "porefrac/mechanics.hpp"
#include "porefrac/solvers.hpp"

using namespace porefrac;

namespace {

CellKernel mass_kernel() {
  return [](const CellQuad& cq, Eigen::MatrixXd& a, Eigen::VectorXd&) {
    for (int q = 0; q < cq.nq; ++q)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) += cq.jxw[q] * cq.n[q][j] * cq.n[q][i];
  };
}

CellKernel laplace_kernel(double f_rhs = 0.0) {
  return [f_rhs](const CellQuad& cq, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
    for (int q = 0; q < cq.nq; ++q)
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
          a(i, j) += cq.jxw[q] * cq.grad[q][j].dot(cq.grad[q][i]);
        b[i] += cq.jxw[q] * f_rhs * cq.n[q][i];
      }
  };
}

// Classic 5-point finite-difference Poisson oracle on the unit square with
// homogeneous Dirichlet data: -lap u = f, grid matching a uniformly refined
// mesh with n interior nodes per direction.
Vec fd_poisson_unit_square(int cells_per_side, double f) {
  const int n = cells_per_side - 1;  // interior nodes per direction
  const double h = 1.0 / cells_per_side;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * n, n * n);
  Vec b = Vec::Constant(n * n, f * h * h);
  auto idx = [n](int i, int j) { return j * n + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      a(idx(i, j), idx(i, j)) = 4;
      if (i > 0) a(idx(i, j), idx(i - 1, j)) = -1;
      if (i + 1 < n) a(idx(i, j), idx(i + 1, j)) = -1;
      if (j > 0) a(idx(i, j), idx(i, j - 1)) = -1;
      if (j + 1 < n) a(idx(i, j), idx(i, j + 1)) = -1;
    }
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
}

}  // namespace

TEST_CASE("q1 shape values at nodal and interior points") {
  std::array<double, 4> v;
  std::array<Vector2d, 4> g;
  q1_shape(0, 0, v, g);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] + v[2] + v[3] == doctest::Approx(0.0));

  q1_shape(0.5, 0.5, v, g);
  for (int i = 0; i < 4; ++i) CHECK(v[i] == doctest::Approx(0.25));

  // tensor-product evaluation at (0.25, 0.75)
  q1_shape(0.25, 0.75, v, g);
  CHECK(v[0] == doctest::Approx(0.75 * 0.25));
  CHECK(v[1] == doctest::Approx(0.25 * 0.25));
  CHECK(v[2] == doctest::Approx(0.25 * 0.75));
  CHECK(v[3] == doctest::Approx(0.75 * 0.75));
  double s = 0;
  for (int i = 0; i < 4; ++i) s += v[i];
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("mass matrix on one unit cell has row sums 1/4") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 0);
  DofMap map(mesh, FieldKind::scalar);
  DofConstraints cons(mesh, map);
  CsrMatrix a = build_sparse_matrix(mesh, map, cons);
  Vec b;
  assemble(mesh, map, cons, mass_kernel(), a, b);
  for (int i = 0; i < 4; ++i) {
    double row = 0;
    for (int j = 0; j < 4; ++j) row += a.at(i, j);
    CHECK(row == doctest::Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("2x2 Gauss integrates bilinear x bilinear products exactly") {
  // mass matrix of [0,a]x[0,b] equals (ab/36) [[4,2,1,2],[2,4,2,1],[1,2,4,2],[2,1,2,4]]
  const double ax = 0.7, by = 1.3;
  QuadMesh mesh = build_rect_mesh({0, 0}, {ax, by}, 0);
  DofMap map(mesh, FieldKind::scalar);
  DofConstraints cons(mesh, map);
  CsrMatrix a = build_sparse_matrix(mesh, map, cons);
  Vec b;
  assemble(mesh, map, cons, mass_kernel(), a, b);
  const double s = ax * by / 36.0;
  const double expect[4][4] = {{4, 2, 1, 2}, {2, 4, 2, 1}, {1, 2, 4, 2}, {2, 1, 2, 4}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(a.at(i, j) == doctest::Approx(s * expect[i][j]).epsilon(1e-14));
}

TEST_CASE("laplace kernel annihilates linear fields at interior nodes") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 1);
  DofMap map(mesh, FieldKind::scalar);
  DofConstraints cons(mesh, map);
  CsrMatrix a = build_sparse_matrix(mesh, map, cons);
  Vec b;
  assemble(mesh, map, cons, laplace_kernel(), a, b);
  Vec lin(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v)
    lin[v] = 2 * mesh.vertex(v).x() - mesh.vertex(v).y();
  Vec r = a.multiply(lin);
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (!mesh.vertex_on_boundary(v)) CHECK(std::abs(r[v]) < 1e-14);
}

TEST_CASE("poisson solve matches the finite-difference oracle within 5%") {
  const int refinements = 2;  // 4x4 mesh
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, refinements);
  DofMap map(mesh, FieldKind::scalar);
  DofConstraints cons(mesh, map);
  for (int v : boundary_vertices(mesh)) cons.add_dirichlet(v, 0.0);
  cons.close();
  CsrMatrix a = build_sparse_matrix(mesh, map, cons);
  Vec b;
  assemble(mesh, map, cons, laplace_kernel(1.0), a, b);
  auto r = cg_ssor(a, b, 1e-12);
  REQUIRE(r.converged);
  Vec x = r.x;
  cons.distribute(x);

  Vec fd = fd_poisson_unit_square(1 << refinements, 1.0);
  CHECK(x.maxCoeff() == doctest::Approx(fd.maxCoeff()).epsilon(0.05));
}

TEST_CASE("apply_dirichlet on a hand-solved 3-node chain") {
  // tridiagonal [2,-1; -1,2,-1; -1,2], ends fixed to 0 and 1 -> middle 0.5
  std::vector<std::vector<int>> rows = {{0, 1}, {0, 1, 2}, {1, 2}};
  CsrMatrix a = CsrMatrix::from_pattern(rows);
  a.at(0, 0) = 2;
  a.at(0, 1) = -1;
  a.at(1, 0) = -1;
  a.at(1, 1) = 2;
  a.at(1, 2) = -1;
  a.at(2, 1) = -1;
  a.at(2, 2) = 2;
  Vec b = Vec::Zero(3);

  SUBCASE("empty dof set leaves the system unchanged") {
    CsrMatrix a2 = a;
    Vec b2 = b;
    apply_dirichlet(a2, b2, {}, {});
    CHECK(a2.at(1, 1) == 2);
    CHECK(b2.norm() == 0);
  }

  SUBCASE("two ends pinned produce the linear ramp") {
    apply_dirichlet(a, b, {0, 2}, {0.0, 1.0});
    // symmetry of the eliminated system
    CHECK(a.at(1, 0) == 0);
    CHECK(a.at(0, 1) == 0);
    Vec x = dense_lu_solve(a, b);
    CHECK(x[0] == doctest::Approx(0.0));
    CHECK(x[1] == doctest::Approx(0.5));
    CHECK(x[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("all dofs constrained to zero solve to zero") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 1);
  DofMap map(mesh, FieldKind::scalar);
  DofConstraints cons(mesh, map);
  CsrMatrix a = build_sparse_matrix(mesh, map, cons);
  Vec b;
  assemble(mesh, map, cons, laplace_kernel(1.0), a, b);
  std::vector<int> all(map.n_dofs());
  for (int i = 0; i < map.n_dofs(); ++i) all[i] = i;
  apply_dirichlet(a, b, all, std::vector<double>(map.n_dofs(), 0.0));
  Vec x = dense_lu_solve(a, b);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("elasticity patch test reproduces affine displacements to 1e-10") {
  // hanging-node mesh; boundary data from an affine displacement field
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 2,
                                  {{Eigen::Vector4d(0.4, 0.4, 0.8, 0.8), 1}});
  REQUIRE(mesh.constraints().n_constrained() > 0);

  auto affine = [](const Vector2d& x) {
    return Vector2d(0.02 * x.x() - 0.01 * x.y() + 0.005, 0.013 * x.x() + 0.007 * x.y());
  };

  ElasticParams params;
  params.e_cell = Vec::Constant(mesh.n_cells_total(), 5.0);
  params.nu = 0.3;
  params.g_c = 1;
  params.eps = 0.5;
  params.kappa = 0;
  params.alpha = 0;

  const int nv = mesh.n_vertices();
  MechState state;
  state.u = Vec::Zero(2 * nv);
  state.phi = Vec::Ones(nv);
  Vec pressure = Vec::Zero(nv);
  Vec ephi = Vec::Ones(nv);

  DofMap map(mesh, FieldKind::coupled3);
  DofConstraints hanging(mesh, map);

  // assemble with hanging constraints only, then impose boundary values (and
  // pin the phase-field at one so only elasticity is exercised)
  MechSystem raw = assemble_mech_system(mesh, hanging, hanging, state, pressure, ephi, params);
  Vec rb = -raw.residual;  // zero at the stress-free state
  std::vector<int> ddofs;
  std::vector<double> dvals;
  for (int v : boundary_vertices(mesh)) {
    const Vector2d ub = affine(mesh.vertex(v));
    ddofs.push_back(3 * v);
    dvals.push_back(ub.x());
    ddofs.push_back(3 * v + 1);
    dvals.push_back(ub.y());
  }
  for (int v = 0; v < nv; ++v)
    if (!mesh.constraints().is_constrained(v)) {
      ddofs.push_back(3 * v + 2);
      dvals.push_back(1.0);
    }
  apply_dirichlet(raw.jacobian, rb, ddofs, dvals);
  Vec x = dense_lu_solve(raw.jacobian, rb);
  hanging.distribute(x);

  for (int v = 0; v < nv; ++v) {
    const Vector2d expect = affine(mesh.vertex(v));
    CHECK(std::abs(x[3 * v] - expect.x()) < 1e-10);
    CHECK(std::abs(x[3 * v + 1] - expect.y()) < 1e-10);
  }
}

TEST_CASE("constrained solve satisfies hanging-node interpolation exactly") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 2,
                                  {{Eigen::Vector4d(0.0, 0.0, 0.4, 0.4), 1}});
  REQUIRE(mesh.constraints().n_constrained() > 0);
  DofMap map(mesh, FieldKind::scalar);
  DofConstraints cons(mesh, map);
  for (int v : boundary_vertices(mesh)) cons.add_dirichlet(v, 0.0);
  cons.close();
  CsrMatrix a = build_sparse_matrix(mesh, map, cons);
  Vec b;
  assemble(mesh, map, cons, laplace_kernel(1.0), a, b);
  auto r = cg_ssor(a, b, 1e-13);
  REQUIRE(r.converged);
  Vec x = r.x;
  cons.distribute(x);
  for (const auto& [v, line] : mesh.constraints().all_lines()) {
    double expect = 0;
    for (auto& [m, w] : line.masters) expect += w * x[m];
    CHECK(x[v] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("l2 norm of a constant equals sqrt(area) times the constant") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {2, 3}, 2);
  Vec c = Vec::Constant(mesh.n_vertices(), 0.5);
  CHECK(l2_norm(mesh, c, 1) == doctest::Approx(0.5 * std::sqrt(6.0)).epsilon(1e-13));
}
