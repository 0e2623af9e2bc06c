#include <cmath>
#include <cstdlib>

#include <Eigen/Dense>
#include <doctest.h>

#include "poroflow/assembly.hpp"
#include "poroflow/errors.hpp"

using namespace poroflow;

namespace {

const MaterialParams ex1{14.516e6, 0.3, 2000.0, 1000.0, 0.33, 1e-2};

BCSpec uniform_bc(SkeletonCondition skel, FluidCondition fluid) {
  BCSpec bc;
  for (Side s : all_sides) {
    bc.skeleton.push_back({SideRange{s}, skel});
    bc.fluid.push_back({SideRange{s}, fluid});
  }
  return bc;
}

// Left side clamped, the rest free; impermeable except a drained top.
BCSpec cantilever_bc() {
  BCSpec bc;
  for (Side s : all_sides) {
    bc.skeleton.push_back({SideRange{s}, s == Side::left ? SkeletonCondition::fully_fixed : SkeletonCondition::free});
    bc.fluid.push_back({SideRange{s}, s == Side::top ? FluidCondition::drained : FluidCondition::impermeable});
  }
  return bc;
}

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

double min_eigenvalue(const SparseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(m));
  return es.eigenvalues().minCoeff();
}

// Interpolates a vector field onto the free displacement DOFs.
template <class Fn>
Vector interpolate(const Mesh& mesh, const DofMap& dofs, Fn&& field) {
  Vector u = Vector::Zero(dofs.n_disp);
  for (int node = 0; node < dofs.num_disp_nodes; ++node) {
    const Point v = field(dofs.node_position(mesh, node));
    for (int c = 0; c < 2; ++c) {
      if (dofs.disp[2 * node + c] >= 0) u[dofs.disp[2 * node + c]] = v[c];
    }
  }
  return u;
}

}  // namespace

TEST_CASE("material derived quantities") {
  CHECK(ex1.density() == doctest::Approx(1670.0));
  CHECK(ex1.shear_modulus() == doctest::Approx(14.516e6 / 2.6));
  CHECK(ex1.lame_lambda() == doctest::Approx(14.516e6 * 0.3 / (1.3 * 0.4)));
  CHECK(ex1.constrained_modulus() == doctest::Approx(19.5407692e6).epsilon(1e-8));
  CHECK(ex1.darcy_damping() == doctest::Approx(0.33 * 9.81 / 1e-2));
  auto bad = ex1;
  bad.poisson = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = ex1;
  bad.porosity = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = ex1;
  bad.conductivity = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("element coupling entries") {
  const auto g = TriangleGeometry::from({Point(0, 0), Point(1, 0), Point(0, 1)});
  const std::array<int, 3> signs{1, -1, 1};
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    const auto e = element_matrices(kind, g, signs, ex1, MassMode::consistent);
    // integral of the constant divergence s l / A over the triangle
    for (int j = 0; j < 3; ++j) CHECK(e.B[j] == doctest::Approx(signs[j] * g.edge_lengths[j]).epsilon(1e-14));
    CHECK(e.M.isApprox(e.M.transpose(), 0.0));
    CHECK(e.K.isApprox(e.K.transpose(), 0.0));
    CHECK(e.A.isApprox(e.A.transpose(), 0.0));
    // Q is the integral of div N: for the field u = (x, 0) that is the area
    const int n = num_nodal_functions(nodal_kind(kind));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
      const Point xi = i < 3 ? g.vertices[i] : 0.5 * (g.vertices[(i - 2) % 3] + g.vertices[(i - 1) % 3]);
      u[2 * i] = xi.x();
    }
    CHECK(e.Q.dot(u) == doctest::Approx(g.area).epsilon(1e-14));
  }
}

TEST_CASE("consistent mass sums to the mixture mass per direction") {
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    auto mesh = generate({2.0, 1.0, 4, 2, MeshPattern::crisscross});
    const auto a = assemble(mesh, kind, ex1, uniform_bc(SkeletonCondition::free, FluidCondition::impermeable),
                            MassMode::consistent);
    const auto M = dense(a.sys.M);
    Vector ex = interpolate(mesh, a.dofs, [](const Point&) { return Point(1, 0); });
    Vector ey = interpolate(mesh, a.dofs, [](const Point&) { return Point(0, 1); });
    CHECK(ex.dot(M * ex) == doctest::Approx(ex1.density() * 2.0).epsilon(1e-12));
    CHECK(ey.dot(M * ey) == doctest::Approx(ex1.density() * 2.0).epsilon(1e-12));
    CHECK(std::abs(ex.dot(M * ey)) < 1e-9);
  }
}

TEST_CASE("P1 lumping: both methods give a third of the element mass per vertex") {
  const auto g = TriangleGeometry::from({Point(0, 0), Point(1.2, 0.1), Point(0.3, 0.7)});
  const std::array<int, 3> signs{1, 1, 1};
  const auto e = element_matrices(ElementKind::P1RT0, g, signs, ex1, MassMode::consistent);
  for (auto method : {LumpMethod::lobatto, LumpMethod::hinton}) {
    const auto L = lump_mass(e.M, method, NodalKind::P1);
    CHECK((L - Eigen::MatrixXd(L.diagonal().asDiagonal())).norm() == 0.0);
    for (int i = 0; i < 6; ++i) CHECK(L(i, i) == doctest::Approx(g.area * ex1.density() / 3.0).epsilon(1e-13));
    // row-sum of the consistent P1 mass
    for (int i = 0; i < 6; ++i) CHECK(L(i, i) == doctest::Approx(e.M.row(i).sum()).epsilon(1e-13));
  }
}

TEST_CASE("P2 lumping weights") {
  const auto g = TriangleGeometry::from({Point(0, 0), Point(1.0, 0.2), Point(0.1, 0.9)});
  const std::array<int, 3> signs{1, 1, 1};
  const double mass = g.area * ex1.density();
  const auto e = element_matrices(ElementKind::P2RT0, g, signs, ex1, MassMode::consistent);

  // HRZ: consistent diagonal A/30 (vertex) and 8A/45 (midpoint) scaled to the total
  const double dv = 1.0 / 30.0, dm = 8.0 / 45.0;
  const double scale = mass / (3 * dv + 3 * dm);
  const auto hrz = lump_mass(e.M, LumpMethod::hinton, NodalKind::P2);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) CHECK(hrz(2 * i + c, 2 * i + c) == doctest::Approx(scale * dv).epsilon(1e-12));
    for (int i = 3; i < 6; ++i) CHECK(hrz(2 * i + c, 2 * i + c) == doctest::Approx(scale * dm).epsilon(1e-12));
  }
  CHECK(hrz(6, 6) / hrz(0, 0) == doctest::Approx(16.0 / 3.0));

  // nodal Lobatto quadrature on P2 puts no mass at the vertices
  const auto lob = lump_mass(e.M, LumpMethod::lobatto, NodalKind::P2);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(lob(2 * i, 2 * i)) < 1e-12 * mass);
  for (int i = 3; i < 6; ++i) CHECK(lob(2 * i, 2 * i) == doctest::Approx(mass / 3.0).epsilon(1e-12));

  for (auto method : {LumpMethod::lobatto, LumpMethod::hinton}) {
    const auto f = lumping_fractions(NodalKind::P2, e.M, method);
    double s = 0.0;
    for (double v : f) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("lumped global mass keeps the total mass") {
  auto mesh = generate({1.0, 1.0, 3, 3, MeshPattern::union_jack});
  const auto bc = uniform_bc(SkeletonCondition::free, FluidCondition::impermeable);
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    const auto consistent = assemble(mesh, kind, ex1, bc, MassMode::consistent);
    for (auto mode : {MassMode::lobatto, MassMode::hinton}) {
      const auto lumped = assemble(mesh, kind, ex1, bc, mode);
      CHECK(lumped.sys.M.sum() == doctest::Approx(consistent.sys.M.sum()).epsilon(1e-12));
      // the fluid block is never lumped
      CHECK(dense(lumped.sys.A).isApprox(dense(consistent.sys.A), 0.0));
      CHECK(lumped.sys.mass_mode == mode);
    }
  }
}

TEST_CASE("global blocks are symmetric and definite after constraints") {
  auto mesh = generate({1.0, 1.0, 3, 3, MeshPattern::criss});
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    const auto a = assemble(mesh, kind, ex1, cantilever_bc(), MassMode::consistent);
    const auto& s = a.sys;
    for (const SparseMatrix* m : {&s.M, &s.A, &s.K}) {
      CHECK((dense(*m) - dense(*m).transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(min_eigenvalue(s.M) > 0.0);
    CHECK(min_eigenvalue(s.A) > 0.0);
    CHECK(min_eigenvalue(s.K) > 0.0);
    CHECK(s.darcy_damping == doctest::Approx(ex1.darcy_damping()));
  }
}

TEST_CASE("stiffness annihilates rigid-body modes before constraints") {
  auto mesh = generate({2.0, 1.0, 4, 2, MeshPattern::crisscross});
  const auto bc = uniform_bc(SkeletonCondition::free, FluidCondition::impermeable);
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    const auto a = assemble(mesh, kind, ex1, bc, MassMode::consistent);
    const double knorm = dense(a.sys.K).norm();
    const Vector tx = interpolate(mesh, a.dofs, [](const Point&) { return Point(1, 0); });
    const Vector ty = interpolate(mesh, a.dofs, [](const Point&) { return Point(0, 1); });
    const Vector rot = interpolate(mesh, a.dofs, [](const Point& x) { return Point(-x.y(), x.x()); });
    for (const Vector* v : {&tx, &ty, &rot}) CHECK((a.sys.K * *v).norm() <= 1e-9 * knorm * v->norm());
    const Vector stretch = interpolate(mesh, a.dofs, [](const Point& x) { return Point(x.x(), 0); });
    CHECK(stretch.dot(a.sys.K * stretch) > 0.0);
  }
}

TEST_CASE("Q against independently integrated divergence") {
  auto mesh = generate({2.0, 1.0, 4, 2, MeshPattern::union_jack});
  const auto bc = uniform_bc(SkeletonCondition::free, FluidCondition::impermeable);

  SUBCASE("P1 linear field, div = 3") {
    const auto a = assemble(mesh, ElementKind::P1RT0, ex1, bc, MassMode::consistent);
    const Vector u = interpolate(mesh, a.dofs, [](const Point& x) { return Point(x.x(), 2 * x.y()); });
    const Vector div = a.sys.Q.transpose() * u;
    for (std::size_t m = 0; m < mesh.num_triangles(); ++m) CHECK(div[m] == doctest::Approx(3 * mesh.tri_area(m)));
    // constant pressure: integral of div over the domain
    CHECK(div.sum() == doctest::Approx(6.0));
  }
  SUBCASE("P2 quadratic field, div = 3x") {
    const auto a = assemble(mesh, ElementKind::P2RT0, ex1, bc, MassMode::consistent);
    const Vector u = interpolate(mesh, a.dofs, [](const Point& x) { return Point(x.x() * x.x(), x.x() * x.y()); });
    const Vector div = a.sys.Q.transpose() * u;
    for (std::size_t m = 0; m < mesh.num_triangles(); ++m) {
      CHECK(div[m] == doctest::Approx(3 * mesh.tri_area(m) * mesh.centroid(m).x()).epsilon(1e-12));
    }
  }
}

TEST_CASE("B columns hold s l on the edges of their triangle") {
  auto mesh = generate({1.0, 1.0, 2, 2, MeshPattern::crisscross});
  const auto a = assemble(mesh, ElementKind::P1RT0, ex1, cantilever_bc(), MassMode::consistent);
  const auto B = dense(a.sys.B);
  CHECK(B.cols() == static_cast<Eigen::Index>(mesh.num_triangles()));
  CHECK(a.dofs.n_pres == static_cast<int>(mesh.num_triangles()));
  for (std::size_t m = 0; m < mesh.num_triangles(); ++m) {
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(B.rows());
    for (int i = 0; i < 3; ++i) {
      const int j = mesh.tri_edges(m)[i];
      if (a.dofs.vel[j] >= 0) expected[a.dofs.vel[j]] = mesh.tri_signs(m)[i] * mesh.edge_length(j);
    }
    CHECK((B.col(m) - expected).norm() < 1e-14);
  }
}

TEST_CASE("DOF map partitions the unknowns") {
  auto mesh = generate({1.0, 1.0, 2, 2, MeshPattern::criss});
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    const auto d = build_dofmap(mesh, kind, cantilever_bc());
    const int nodes = kind == ElementKind::P1RT0 ? 9 : 9 + 16;
    CHECK(d.num_disp_nodes == nodes);
    int free = 0;
    for (int v : d.disp) free += v >= 0;
    CHECK(free == d.n_disp);
    // the left side has 3 vertices (plus 2 midpoints for P2), both components fixed
    CHECK(d.n_disp == 2 * nodes - 2 * (kind == ElementKind::P1RT0 ? 3 : 5));
    // impermeable edges: every boundary edge except the 2 on the drained top
    CHECK(d.n_vel == 16 - 6);
    CHECK(d.total() == d.n_disp + d.n_vel + d.n_pres);
  }
}

TEST_CASE("incomplete boundary conditions are rejected") {
  auto mesh = generate({1.0, 1.0, 2, 2, MeshPattern::criss});
  BCSpec bc = cantilever_bc();
  bc.fluid.pop_back();
  CHECK_THROWS_AS(assemble(mesh, ElementKind::P1RT0, ex1, bc, MassMode::consistent), InvalidInput);
  bc = cantilever_bc();
  bc.skeleton.push_back({SideRange{Side::top}, SkeletonCondition::free});
  CHECK_THROWS_AS(assemble(mesh, ElementKind::P1RT0, ex1, bc, MassMode::consistent), InvalidInput);
}

TEST_CASE("traction loads are consistent edge loads") {
  auto mesh = generate({1.0, 1.0, 1, 1, MeshPattern::criss});
  BCSpec bc = uniform_bc(SkeletonCondition::free, FluidCondition::impermeable);
  bc.skeleton[3] = {SideRange{Side::top}, SkeletonCondition::traction, Point(0, -3000)};
  const int tl = mesh.find_node(Point(0, 1), 1e-9), tr = mesh.find_node(Point(1, 1), 1e-9);

  SUBCASE("P1: half per end node") {
    const auto d = build_dofmap(mesh, ElementKind::P1RT0, bc);
    const auto [P, F] = load_vectors(mesh, d, bc, 0.0);
    CHECK(P[d.disp[2 * tl + 1]] == doctest::Approx(-1500.0));
    CHECK(P[d.disp[2 * tr + 1]] == doctest::Approx(-1500.0));
    CHECK(P.sum() == doctest::Approx(-3000.0));
    CHECK(F.norm() == 0.0);
  }
  SUBCASE("P2: one sixth per end, two thirds at the midpoint") {
    const auto d = build_dofmap(mesh, ElementKind::P2RT0, bc);
    const auto [P, F] = load_vectors(mesh, d, bc, 0.0);
    CHECK(P[d.disp[2 * tl + 1]] == doctest::Approx(-500.0));
    CHECK(P[d.disp[2 * tr + 1]] == doctest::Approx(-500.0));
    const int top = mesh.boundary_edges(Side::top).front();
    CHECK(P[d.disp[2 * d.disp_node_of_edge(top) + 1]] == doctest::Approx(-2000.0));
    CHECK(P.sum() == doctest::Approx(-3000.0));
  }
}

TEST_CASE("prescribed pressure enters F as -p l") {
  auto mesh = generate({1.0, 1.0, 2, 2, MeshPattern::criss});
  BCSpec bc = cantilever_bc();
  for (auto& f : bc.fluid) {
    if (f.where.side == Side::top) f.pressure = 200.0;
  }
  const auto d = build_dofmap(mesh, ElementKind::P1RT0, bc);
  const auto [P, F] = load_vectors(mesh, d, bc, 1.0);
  CHECK(P.norm() == 0.0);
  for (int j : mesh.boundary_edges(Side::top)) CHECK(F[d.vel[j]] == doctest::Approx(-200.0 * 0.5));
  CHECK(F.sum() == doctest::Approx(-200.0));

  // zero prescribed pressure gives no load
  const auto [P0, F0] = load_vectors(mesh, d, cantilever_bc(), 1.0);
  CHECK(F0.norm() == 0.0);
}

TEST_CASE("load histories") {
  CHECK(LoadHistory::step()(0.0) == 1.0);
  const auto ramp = LoadHistory::ramp(0.5);
  CHECK(ramp(0.25) == doctest::Approx(0.5));
  CHECK(ramp(3.0) == 1.0);
  const auto table = LoadHistory::table({{0.0, 0.0}, {1.0, 2.0}, {2.0, 0.0}});
  CHECK(table(0.5) == doctest::Approx(1.0));
  CHECK(table(1.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(table(2.5), InvalidInput);
  CHECK_THROWS_AS(LoadHistory::step()(-1.0), InvalidInput);
  CHECK_THROWS_AS(LoadHistory::ramp(0.0), InvalidInput);
  CHECK_THROWS_AS(LoadHistory::table({{1.0, 0.0}, {0.5, 1.0}}), InvalidInput);
}

TEST_CASE("assembly is independent of the worker count") {
  auto mesh = generate({2.0, 1.0, 8, 4, MeshPattern::crisscross});
  auto run = [&](const char* threads) {
    setenv("POROFLOW_THREADS", threads, 1);
    return assemble(mesh, ElementKind::P2RT0, ex1, cantilever_bc(), MassMode::hinton);
  };
  const auto a = run("1");
  const auto b = run("4");
  unsetenv("POROFLOW_THREADS");
  for (auto [x, y] : {std::pair{&a.sys.M, &b.sys.M}, {&a.sys.K, &b.sys.K}, {&a.sys.A, &b.sys.A},
                      {&a.sys.Mf, &b.sys.Mf}, {&a.sys.Q, &b.sys.Q}, {&a.sys.B, &b.sys.B}}) {
    REQUIRE(x->nonZeros() == y->nonZeros());
    CHECK(std::equal(x->valuePtr(), x->valuePtr() + x->nonZeros(), y->valuePtr()));
    CHECK(std::equal(x->innerIndexPtr(), x->innerIndexPtr() + x->nonZeros(), y->innerIndexPtr()));
  }
}

TEST_CASE("element and mass names") {
  CHECK(parse_element("p2rt0") == ElementKind::P2RT0);
  CHECK(parse_mass_mode("hrz") == MassMode::hinton);
  CHECK(parse_mass_mode("lobatto") == MassMode::lobatto);
  CHECK_THROWS_AS(parse_element("q1"), InvalidInput);
  CHECK_THROWS_AS(parse_mass_mode("row-sum"), InvalidInput);
}
