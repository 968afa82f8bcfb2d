#include <random>

#include "doctest.h"
#include "porefrac/mechanics.hpp"
#include "porefrac/solvers.hpp"

using namespace porefrac;

namespace {

ElasticParams simple_params(const QuadMesh& mesh) {
  ElasticParams p;
  p.e_cell = Vec::Constant(mesh.n_cells_total(), 1.0);
  p.nu = 0.2;
  p.g_c = 1.0;
  p.eps = 0.25;
  p.kappa = 1e-10;
  p.alpha = 0.0;
  return p;
}

}  // namespace

TEST_CASE("amor split hand values") {
  Matrix2d sp, sm;

  split_stress(Matrix2d::Identity(), 1.0, 1.0, sp, sm);  // tr+ = 2
  CHECK((sp - 4.0 * Matrix2d::Identity()).norm() < 1e-14);
  CHECK(sm.norm() < 1e-14);

  split_stress(-Matrix2d::Identity(), 1.0, 1.0, sp, sm);
  CHECK(sp.norm() < 1e-14);
  CHECK((sm + 4.0 * Matrix2d::Identity()).norm() < 1e-14);

  Matrix2d shear;
  shear << 0, 1, 1, 0;  // trace-free
  split_stress(shear, 0.7, 1.3, sp, sm);
  CHECK((sp - 2.0 * 1.3 * shear).norm() < 1e-14);
  CHECK(sm.norm() < 1e-14);
}

TEST_CASE("split identity sigma+ + sigma- = lambda tr(e) I + 2 G e on 1e4 strains") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  const double lambda = 0.8, g = 1.7;
  Matrix2d sp, sm;
  for (int k = 0; k < 10000; ++k) {
    Matrix2d e;
    const double a = u(rng), b = u(rng), c = u(rng);
    e << a, c, c, b;
    split_stress(e, lambda, g, sp, sm);
    const Matrix2d full = lambda * e.trace() * Matrix2d::Identity() + 2.0 * g * e;
    CHECK((sp + sm - full).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("extrapolation: constant, linear, clamped") {
  Vec a = Vec::Constant(3, 0.7), b = Vec::Constant(3, 0.7);
  CHECK((extrapolate_phi(a, b, true) - a).norm() == 0.0);

  Vec phi_n = Vec::Constant(1, 0.8), phi_nm1 = Vec::Constant(1, 1.0);
  CHECK(extrapolate_phi(phi_n, phi_nm1, true)[0] == doctest::Approx(0.6));

  Vec lo_n = Vec::Constant(1, 0.1), lo_nm1 = Vec::Constant(1, 0.9);
  CHECK(extrapolate_phi(lo_n, lo_nm1, true)[0] == 0.0);  // clamp(-0.7)

  // first steps: lagged value
  CHECK(extrapolate_phi(lo_n, lo_nm1, false)[0] == doctest::Approx(0.1));
}

TEST_CASE("degradation limit equals kappa at phi = 0") {
  const double kappa = 3e-7;
  CHECK(std::abs(degradation(0.0, kappa) - kappa) < 1e-14);
  CHECK(degradation(1.0, kappa) == doctest::Approx(1.0));
}

TEST_CASE("unbroken stress-free state has a vanishing residual") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 1);
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  DofMap map(mesh, FieldKind::coupled3);
  DofConstraints hanging(mesh, map);
  MechState state{Vec::Zero(2 * nv), Vec::Ones(nv)};
  Vec r = assemble_mech_residual(mesh, hanging, state, Vec::Zero(nv), Vec::Ones(nv), params);
  CHECK(r.lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("constant pressure with alpha = 1 leaves displacement rows clean") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 1);
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  params.alpha = 1.0;
  DofMap map(mesh, FieldKind::coupled3);
  DofConstraints hanging(mesh, map);
  MechState state{Vec::Zero(2 * nv), Vec::Ones(nv)};
  Vec r = assemble_mech_residual(mesh, hanging, state, Vec::Constant(nv, 2.5),
                                 Vec::Ones(nv), params);
  for (int v = 0; v < nv; ++v) {
    CHECK(std::abs(r[3 * v]) < 1e-13);
    CHECK(std::abs(r[3 * v + 1]) < 1e-13);
  }
}

TEST_CASE("jacobian matches central finite differences of the residual") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 1);  // 2x2 mesh, 27 dofs
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  params.alpha = 0.7;  // exercise the pressure coupling blocks

  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  MechState state;
  state.u.resize(2 * nv);
  state.phi.resize(nv);
  Vec pressure(nv), ephi(nv);
  for (int v = 0; v < nv; ++v) {
    state.u[2 * v] = u(rng);
    state.u[2 * v + 1] = u(rng);
    state.phi[v] = 0.4 + 0.3 * u(rng);
    pressure[v] = u(rng);
    ephi[v] = 0.5 + 0.3 * u(rng);
  }

  DofMap map(mesh, FieldKind::coupled3);
  DofConstraints hanging(mesh, map);
  MechSystem sys = assemble_mech_system(mesh, hanging, hanging, state, pressure, ephi, params);

  const double h = 1e-6;
  const int n = map.n_dofs();
  Eigen::MatrixXd j_fd(n, n);
  for (int d = 0; d < n; ++d) {
    MechState plus = state, minus = state;
    const int v = d / 3, c = d % 3;
    if (c < 2) {
      plus.u[2 * v + c] += h;
      minus.u[2 * v + c] -= h;
    } else {
      plus.phi[v] += h;
      minus.phi[v] -= h;
    }
    Vec rp = assemble_mech_residual(mesh, hanging, plus, pressure, ephi, params);
    Vec rm = assemble_mech_residual(mesh, hanging, minus, pressure, ephi, params);
    j_fd.col(d) = (rp - rm) / (2 * h);
  }
  const Eigen::MatrixXd j = sys.jacobian.to_dense();
  CHECK((j - j_fd).norm() / j.norm() < 1e-5);
}

TEST_CASE("displacement block is SPD for the unbroken state") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 2);
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  MechState state{Vec::Zero(2 * nv), Vec::Ones(nv)};
  DofMap map(mesh, FieldKind::coupled3);
  DofConstraints hanging(mesh, map);
  DofConstraints cons(mesh, map);
  for (int v : boundary_vertices(mesh)) {
    cons.add_dirichlet(3 * v, 0.0);
    cons.add_dirichlet(3 * v + 1, 0.0);
  }
  cons.close();
  MechSystem sys =
      assemble_mech_system(mesh, cons, hanging, state, Vec::Zero(nv), Vec::Ones(nv), params);

  // extract the constrained displacement block and check its spectrum
  std::vector<int> udofs;
  for (int v = 0; v < nv; ++v)
    if (!mesh.vertex_on_boundary(v) && !mesh.constraints().is_constrained(v)) {
      udofs.push_back(3 * v);
      udofs.push_back(3 * v + 1);
    }
  const CsrMatrix& jac = sys.jacobian;
  Eigen::MatrixXd block(udofs.size(), udofs.size());
  for (std::size_t i = 0; i < udofs.size(); ++i)
    for (std::size_t j = 0; j < udofs.size(); ++j)
      block(i, j) = jac.at(udofs[i], udofs[j]);
  CHECK((block - block.transpose()).norm() < 1e-12 * block.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("newton at a converged state returns after one sweep") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 1);
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  MechState state{Vec::Zero(2 * nv), Vec::Ones(nv)};
  Vec bound = Vec::Ones(nv);
  NewtonReport rep = active_set_newton_solve(mesh, state, Vec::Zero(nv), Vec::Ones(nv),
                                             params, bound);
  CHECK(rep.converged);
  CHECK(rep.newton_iterations == 1);
  CHECK(state.u.norm() == 0.0);
}

TEST_CASE("newton relaxes the phase field and honors the bound") {
  // crack seed: bound pins one strip of nodes at zero; elsewhere phi relaxes
  // towards one under the Ambrosio-Tortorelli terms
  QuadMesh mesh = build_rect_mesh({0, 0}, {1, 1}, 3);
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  params.eps = 0.25;

  Vec bound = Vec::Ones(nv);
  for (int v = 0; v < nv; ++v) {
    const Vector2d x = mesh.vertex(v);
    if (std::abs(x.y() - 0.5) < 0.08 && x.x() > 0.3 && x.x() < 0.7) bound[v] = 0.0;
  }
  MechState state{Vec::Zero(2 * nv), bound};

  NewtonReport rep = active_set_newton_solve(mesh, state, Vec::Zero(nv), bound, params, bound);
  CHECK(rep.converged);
  CHECK(rep.newton_iterations <= 20);
  for (int v = 0; v < nv; ++v) {
    CHECK(state.phi[v] <= bound[v] + 1e-12);
    CHECK(state.phi[v] >= -1e-12);
  }
  // away from the seeded strip the field recovers towards one
  double far_min = 1.0;
  for (int v = 0; v < nv; ++v)
    if ((mesh.vertex(v) - Vector2d(0.1, 0.1)).norm() < 0.1)
      far_min = std::min(far_min, state.phi[v]);
  CHECK(far_min > 0.8);
  // inside the strip the bound stays active
  bool strip_zero = true;
  for (int v = 0; v < nv; ++v)
    if (bound[v] == 0.0 && state.phi[v] > 1e-12) strip_zero = false;
  CHECK(strip_zero);
}

TEST_CASE("pressurized crack opens symmetrically") {
  QuadMesh mesh = build_rect_mesh({0, 0}, {4, 4}, 4,
                                  {{Eigen::Vector4d(1.5, 1.7, 2.5, 2.3), 1}});
  const int nv = mesh.n_vertices();
  ElasticParams params = simple_params(mesh);
  params.eps = 0.5;
  params.alpha = 0.0;

  Vec bound = Vec::Ones(nv);
  for (int v = 0; v < nv; ++v) {
    const Vector2d x = mesh.vertex(v);
    if (std::abs(x.y() - 2.0) < 0.22 && std::abs(x.x() - 2.0) < 0.5) bound[v] = 0.0;
  }
  MechState state{Vec::Zero(2 * nv), bound};
  Vec pressure = Vec::Constant(nv, 1e-3);
  Vec ephi = bound;

  NewtonReport rep = active_set_newton_solve(mesh, state, pressure, ephi, params, bound);
  CHECK(rep.converged);
  // upper crack face moves up, lower face down
  const double uy_top = mesh.value_at(state.u, 2, {2.0, 2.4})[1];
  const double uy_bot = mesh.value_at(state.u, 2, {2.0, 1.6})[1];
  CHECK(uy_top > 0.0);
  CHECK(uy_bot < 0.0);
  CHECK(uy_top == doctest::Approx(-uy_bot).epsilon(1e-6));
}
