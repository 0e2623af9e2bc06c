#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <doctest.h>

#include "poroflow/stability.hpp"

using namespace poroflow;

namespace {

constexpr std::array patterns{MeshPattern::criss, MeshPattern::crisscross, MeshPattern::union_jack};

// Checkerboard metric evaluated straight from its definition.
double direct_metric(const Mesh& mesh, const Vector& p) {
  double jumps = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
    if (mesh.is_boundary_edge(j)) continue;
    const auto t = mesh.edge_triangles(j);
    jumps += std::pow(p[t[0]] - p[t[1]], 2) * mesh.edge_length(j);
  }
  for (std::size_t m = 0; m < mesh.num_triangles(); ++m) norm += p[m] * p[m] * mesh.tri_area(m);
  return jumps / norm;
}

}  // namespace

TEST_CASE("rank deficiency of known matrices") {
  Eigen::MatrixXd a(3, 3);
  a << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  CHECK(rank_deficiency(a) == 1);
  CHECK(rank_deficiency(Eigen::MatrixXd::Identity(4, 4)) == 0);
  CHECK(rank_deficiency(Eigen::MatrixXd::Ones(2, 5)) == 4);
  CHECK(rank_deficiency(Eigen::MatrixXd(0, 3)) == 3);
}

TEST_CASE("rank results do not depend on the numbering") {
  std::mt19937 rng(5);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(8, 5);
  a.col(4) = a.col(0) - 2.0 * a.col(2);
  Eigen::PermutationMatrix<Eigen::Dynamic> pr(8), pc(5);
  pr.setIdentity();
  pc.setIdentity();
  std::shuffle(pr.indices().data(), pr.indices().data() + 8, rng);
  std::shuffle(pc.indices().data(), pc.indices().data() + 5, rng);
  CHECK(rank_deficiency(a) == 1);
  CHECK(rank_deficiency(pr * a * pc) == 1);
}

TEST_CASE("local spurious modes per macroelement") {
  CHECK(local_spurious_count(ElementKind::P1RT0, MeshPattern::crisscross) == 1);
  CHECK(local_spurious_count(ElementKind::P1RT0, MeshPattern::criss) == 0);
  CHECK(local_spurious_count(ElementKind::P1RT0, MeshPattern::union_jack) == 0);
  for (auto p : patterns) CHECK(local_spurious_count(ElementKind::P2RT0, p) == 0);
}

TEST_CASE("global spurious modes on the one-macroelement bracket") {
  CHECK(global_spurious_count(ElementKind::P1RT0, MeshPattern::union_jack) >= 1);
  CHECK(global_spurious_count(ElementKind::P1RT0, MeshPattern::crisscross) >= 1);
  CHECK(global_spurious_count(ElementKind::P1RT0, MeshPattern::criss) == 0);
  for (auto p : patterns) CHECK(global_spurious_count(ElementKind::P2RT0, p) == 0);
}

TEST_CASE("macroelement sizes") {
  CHECK(macro_cells(MeshPattern::union_jack, 4) == 8);
  CHECK(macro_cells(MeshPattern::criss, 4) == 4);
  CHECK(macro_cells(MeshPattern::crisscross, 1) == 1);
}

TEST_CASE("inf-sup value is invariant under domain scaling") {
  for (auto kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    const auto a = infsup_level(kind, MeshPattern::criss, 2, 1.0);
    const auto b = infsup_level(kind, MeshPattern::criss, 2, 7.5);
    CHECK(a.eigenvalue > 0.0);
    CHECK(b.eigenvalue == doctest::Approx(a.eigenvalue).epsilon(1e-10));
    CHECK(a.zero_modes == b.zero_modes);
  }
}

TEST_CASE("P1 inf-sup values decrease with refinement on every pattern") {
  for (auto p : patterns) {
    CAPTURE(to_string(p));
    double previous = INFINITY;
    for (int n : {1, 2, 4, 8}) {
      const auto level = infsup_level(ElementKind::P1RT0, p, n);
      CHECK(level.eigenvalue > 0.0);
      CHECK(level.eigenvalue < previous);
      previous = level.eigenvalue;
    }
  }
}

TEST_CASE("P2 inf-sup values stay bounded away from zero") {
  for (auto p : patterns) {
    CAPTURE(to_string(p));
    const double e1 = infsup_level(ElementKind::P2RT0, p, 1).eigenvalue;
    const double e2 = infsup_level(ElementKind::P2RT0, p, 2).eigenvalue;
    const double e4 = infsup_level(ElementKind::P2RT0, p, 4).eigenvalue;
    CHECK(e2 >= 0.5 * e1);
    CHECK(e4 >= 0.5 * e2);
  }
}

TEST_CASE("crisscross P1 counts one zero mode per macroelement") {
  const auto level = infsup_level(ElementKind::P1RT0, MeshPattern::crisscross, 3);
  CHECK(level.zero_modes >= 9);
  CHECK(level.n_pres == 4 * 9);
}

TEST_CASE("classification rule") {
  auto levels = [](std::initializer_list<double> e) {
    std::vector<InfSupLevel> out;
    int n = 4;
    for (double v : e) out.push_back({n, n, 0, 0, 0, v}), n *= 2;
    return out;
  };
  CHECK(classify(levels({0.4, 0.2, 0.1})) == Verdict::fails);
  CHECK(classify(levels({0.3, 0.29, 0.28})) == Verdict::passes);
  CHECK(classify(levels({0.3, 0.28, 0.19})) == Verdict::inconclusive);
  CHECK(classify(levels({0.3, 0.28})) == Verdict::inconclusive);
}

TEST_CASE("checkerboard metric") {
  const auto mesh = generate({1.0, 1.0, 4, 4, MeshPattern::crisscross});
  const auto n = static_cast<Eigen::Index>(mesh.num_triangles());
  CHECK(checkerboard_metric(mesh, Vector::Constant(n, 3.0)) == 0.0);
  CHECK(checkerboard_metric(mesh, Vector::Zero(n)) == 0.0);

  // alternate around each cell centre
  Vector p(n);
  for (Eigen::Index m = 0; m < n; ++m) p[m] = (m % 2 == 0) ? 1.0 : -1.0;
  const double metric = checkerboard_metric(mesh, p);
  CHECK(metric == doctest::Approx(direct_metric(mesh, p)).epsilon(1e-13));
  // every spoke separates opposite signs: 4 (half diagonals) per cell at jump 2
  const double spokes = 16 * 4 * 4.0 * (std::sqrt(2.0) / 8.0);
  CHECK(metric >= spokes * (1.0 - 1e-12));

  Vector smooth(n);
  for (Eigen::Index m = 0; m < n; ++m) smooth[m] = 1.0 + mesh.centroid(m).x();
  CHECK(checkerboard_metric(mesh, smooth) < 0.1 * metric);
  CHECK(checkerboard_metric(mesh, 5.0 * p) == doctest::Approx(metric));
}

TEST_CASE("table writers") {
  InfSupReport r;
  r.kind = ElementKind::P1RT0;
  r.pattern = MeshPattern::crisscross;
  r.local_modes = 1;
  r.global_modes = 2;
  r.verdict = Verdict::fails;
  r.levels = {{1, 1, 2, 4, 1, 0.5}};
  std::ostringstream csv, levels, text;
  write_table_csv(csv, {r});
  write_levels_csv(levels, {r});
  write_table_text(text, {r});
  CHECK(csv.str() ==
        "element,pattern,local_spurious_modes,global_spurious_modes,A_local,B_global,C_infsup,verdict\n"
        "p1rt0,crisscross,1,2,fail,fail,fail,fails\n");
  CHECK(levels.str().find("0.5") != std::string::npos);
  CHECK(text.str().find("crisscross") != std::string::npos);
}
