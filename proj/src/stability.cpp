#include "poroflow/stability.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "poroflow/errors.hpp"
#include "poroflow/linsolve.hpp"
#include "poroflow/parallel.hpp"

namespace poroflow {

namespace {

// Only the constraint and norm blocks matter here; the material just has to validate.
MaterialParams unit_material() {
  MaterialParams m;
  m.youngs_modulus = 1.0;
  m.poisson = 0.3;
  m.solid_density = 1.0;
  m.fluid_density = 1.0;
  m.porosity = 0.5;
  m.conductivity = 1.0;
  return m;
}

BCSpec sides_bc(SkeletonCondition left) {
  BCSpec bc;
  for (Side s : all_sides) {
    bc.skeleton.push_back({{s}, s == Side::left ? left : SkeletonCondition::free});
    bc.fluid.push_back({{s}, FluidCondition::impermeable});
  }
  return bc;
}

Eigen::MatrixXd dense_constraint(ElementKind kind, MeshPattern pattern, int cells, const BCSpec& bc) {
  const Mesh mesh = generate({1.0, 1.0, cells, cells, pattern});
  const Assembled a = assemble(mesh, kind, unit_material(), bc, MassMode::consistent);
  return Eigen::MatrixXd(a.sys.Q);
}

}  // namespace

int macro_cells(MeshPattern pattern, int n) { return pattern == MeshPattern::union_jack ? 2 * n : n; }

BCSpec bracket_bc() { return sides_bc(SkeletonCondition::fully_fixed); }
BCSpec free_bc() { return sides_bc(SkeletonCondition::free); }

int rank_deficiency(const Eigen::MatrixXd& matrix, double rel_tol) {
  const auto cols = static_cast<int>(matrix.cols());
  if (cols == 0) return 0;
  if (matrix.rows() == 0) return cols;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix);
  const auto& s = svd.singularValues();
  const double smax = s.maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * smax) ++rank;
  }
  return cols - rank;
}

int local_spurious_count(ElementKind kind, MeshPattern pattern) {
  return rank_deficiency(dense_constraint(kind, pattern, macro_cells(pattern, 1), free_bc()));
}

int global_spurious_count(ElementKind kind, MeshPattern pattern, int n) {
  return rank_deficiency(dense_constraint(kind, pattern, macro_cells(pattern, n), bracket_bc()));
}

SparseMatrix displacement_norm_matrix(const Mesh& mesh, const DofMap& dofs) {
  const NodalKind nk = nodal_kind(dofs.kind);
  const int nn = num_nodal_functions(nk);
  const QuadratureRule& rule = quadrature(quadrature_degree(dofs.kind));
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t m = 0; m < mesh.num_triangles(); ++m) {
    const auto geom = TriangleGeometry::from(mesh.vertices(m));
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nn, nn);
    for (std::size_t g = 0; g < rule.points.size(); ++g) {
      const NodalValues nv = eval_nodal(nk, geom, rule.points[g]);
      const double w = rule.weights[g] * geom.area;
      for (int a = 0; a < nn; ++a) {
        for (int b = 0; b < nn; ++b) local(a, b) += w * nv.grad[a].dot(nv.grad[b]);
      }
    }
    const auto nodes = dofs.element_nodes(mesh, m);
    for (int a = 0; a < nn; ++a) {
      for (int b = 0; b < nn; ++b) {
        for (int c = 0; c < 2; ++c) {
          const int r = dofs.disp[2 * nodes[a] + c];
          const int s = dofs.disp[2 * nodes[b] + c];
          if (r >= 0 && s >= 0) t.emplace_back(r, s, local(a, b));
        }
      }
    }
  }
  SparseMatrix S(dofs.n_disp, dofs.n_disp);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

Vector pressure_norm_diagonal(const Mesh& mesh) {
  Vector d(static_cast<Eigen::Index>(mesh.num_triangles()));
  for (std::size_t m = 0; m < mesh.num_triangles(); ++m) d[static_cast<Eigen::Index>(m)] = mesh.tri_area(m);
  return d;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::passes: return "passes";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

InfSupLevel infsup_level(ElementKind kind, MeshPattern pattern, int n, double size) {
  if (n < 1) throw InvalidInput(fmt::format("refinement level must be >= 1 (got {})", n));
  InfSupLevel level;
  level.n = n;
  level.cells = macro_cells(pattern, n);
  const Mesh mesh = generate({size, size, level.cells, level.cells, pattern});
  const Assembled a = assemble(mesh, kind, unit_material(), bracket_bc(), MassMode::consistent);
  const SparseMatrix& Q = a.sys.Q;
  level.n_disp = a.sys.n_disp();
  level.n_pres = a.sys.n_pres();

  const SpdFactorization S(displacement_norm_matrix(mesh, a.dofs));
  const Vector tinv = pressure_norm_diagonal(mesh).cwiseSqrt().cwiseInverse();
  const SparseMatrix Qs = Q * tinv.asDiagonal();

  // G = T^-1/2 Q^T S^-1 Q T^-1/2, built in column blocks to bound memory.
  const int np = level.n_pres;
  Eigen::MatrixXd G(np, np);
  const SparseMatrix QsT = Qs.transpose();
  constexpr int block = 256;
  for (int c0 = 0; c0 < np; c0 += block) {
    const int w = std::min(block, np - c0);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(Qs.middleCols(c0, w));
    const Eigen::MatrixXd x = S.solve(rhs);
    G.middleCols(c0, w) = QsT * x;
  }
  G = 0.5 * (G + G.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("infsup", "eigenvalue solver did not converge");
  const Vector& ev = eig.eigenvalues();
  const double vmax = ev.maxCoeff();
  level.eigenvalue = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < 1e-10 * vmax) {
      ++level.zero_modes;
    } else {
      level.eigenvalue = ev[i];
      break;
    }
  }
  return level;
}

Verdict classify(const std::vector<InfSupLevel>& levels) {
  if (levels.size() < 3) return Verdict::inconclusive;
  const auto k = levels.size();
  const double coarse = levels[k - 3].eigenvalue;
  const double mid = levels[k - 2].eigenvalue;
  const double fine = levels[k - 1].eigenvalue;
  if (!(fine > 0.0) || coarse > 2.0 * fine) return Verdict::fails;
  if (std::abs(fine - mid) <= 0.2 * mid) return Verdict::passes;
  return Verdict::inconclusive;
}

InfSupReport infsup_test(ElementKind kind, MeshPattern pattern, const std::vector<int>& levels) {
  InfSupReport r;
  r.kind = kind;
  r.pattern = pattern;
  r.local_modes = local_spurious_count(kind, pattern);
  r.global_modes = global_spurious_count(kind, pattern, 1);
  auto sorted = levels;
  std::sort(sorted.begin(), sorted.end());
  for (int n : sorted) r.levels.push_back(infsup_level(kind, pattern, n));
  r.verdict = classify(r.levels);
  return r;
}

std::vector<InfSupReport> stability_table(const std::vector<ElementKind>& kinds,
                                          const std::vector<MeshPattern>& patterns,
                                          const std::vector<int>& levels) {
  std::vector<InfSupReport> out(kinds.size() * patterns.size());
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = infsup_test(kinds[i / patterns.size()], patterns[i % patterns.size()], levels);
  });
  return out;
}

namespace {

std::string_view element_label(ElementKind kind) { return kind == ElementKind::P1RT0 ? "P1-P0" : "P2-P0"; }

std::string_view mark(bool ok) { return ok ? "ok" : "X"; }

}  // namespace

void write_table_text(std::ostream& os, const std::vector<InfSupReport>& reports) {
  fmt::print(os, "{:<7} {:<11} {:>10} {:>11} {:>10}   smallest nonzero eigenvalue per N\n", "element", "pattern",
             "A:local", "B:global", "C:inf-sup");
  for (const auto& r : reports) {
    std::string eigs;
    for (const auto& l : r.levels) eigs += fmt::format("  N={}:{:.4e}", l.n, l.eigenvalue);
    fmt::print(os, "{:<7} {:<11} {:>6} ({}) {:>7} ({}) {:>10}  {}\n", element_label(r.kind), to_string(r.pattern),
               mark(r.local_modes == 0), r.local_modes, mark(r.global_modes == 0), r.global_modes,
               r.verdict == Verdict::passes ? "ok" : (r.verdict == Verdict::fails ? "X" : "?"), eigs);
  }
}

void write_table_csv(std::ostream& os, const std::vector<InfSupReport>& reports) {
  fmt::print(os, "element,pattern,local_spurious_modes,global_spurious_modes,A_local,B_global,C_infsup,verdict\n");
  for (const auto& r : reports) {
    fmt::print(os, "{},{},{},{},{},{},{},{}\n", to_string(r.kind), to_string(r.pattern), r.local_modes, r.global_modes,
               r.local_modes == 0 ? "pass" : "fail", r.global_modes == 0 ? "pass" : "fail",
               r.verdict == Verdict::passes ? "pass" : (r.verdict == Verdict::fails ? "fail" : "inconclusive"),
               to_string(r.verdict));
  }
}

void write_levels_csv(std::ostream& os, const std::vector<InfSupReport>& reports) {
  fmt::print(os, "element,pattern,local_modes,global_modes,verdict,n,cells,n_disp,n_pres,zero_modes,eigenvalue\n");
  for (const auto& r : reports) {
    for (const auto& l : r.levels) {
      fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{:.15g}\n", to_string(r.kind), to_string(r.pattern), r.local_modes,
                 r.global_modes, to_string(r.verdict), l.n, l.cells, l.n_disp, l.n_pres, l.zero_modes, l.eigenvalue);
    }
  }
}

double checkerboard_metric(const Mesh& mesh, const Vector& p, double eps) {
  if (static_cast<std::size_t>(p.size()) != mesh.num_triangles()) {
    throw InvalidInput("pressure vector size does not match the triangle count");
  }
  double jumps = 0.0;
  for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
    if (mesh.is_boundary_edge(j)) continue;
    const auto& t = mesh.edge_triangles(j);
    const double d = p[t[0]] - p[t[1]];
    jumps += d * d * mesh.edge_length(j);
  }
  double norm = 0.0;
  for (std::size_t m = 0; m < mesh.num_triangles(); ++m) norm += p[static_cast<Eigen::Index>(m)] * p[static_cast<Eigen::Index>(m)] * mesh.tri_area(m);
  return jumps / (norm + eps);
}

}  // namespace poroflow
