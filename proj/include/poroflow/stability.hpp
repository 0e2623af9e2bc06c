#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "poroflow/assembly.hpp"
#include "poroflow/mesh.hpp"

namespace poroflow {

/// Cells per side of the unit square for N macroelements per side. The union
/// jack macroelement is a 2 x 2 block of cells; the other patterns repeat per cell.
int macro_cells(MeshPattern pattern, int n);

/// Boundary conditions of the square bracket: left side fully fixed, the
/// rest free, all sides impermeable.
BCSpec bracket_bc();
/// Every side free and impermeable.
BCSpec free_bc();

/// Column-rank deficiency of a dense matrix (singular values below
/// `rel_tol` * largest count as zero; extra columns beyond the row count are deficient).
int rank_deficiency(const Eigen::MatrixXd& matrix, double rel_tol = 1e-10);

/// Redundant constraints of one unconstrained macroelement.
int local_spurious_count(ElementKind kind, MeshPattern pattern);
/// Kernel dimension of the assembled divergence block on the N-macroelement bracket.
int global_spurious_count(ElementKind kind, MeshPattern pattern, int n = 1);

/// Vector H1-seminorm matrix on the free displacement DOFs.
SparseMatrix displacement_norm_matrix(const Mesh& mesh, const DofMap& dofs);
/// Diagonal of the elemental pressure L2 mass (triangle areas).
Vector pressure_norm_diagonal(const Mesh& mesh);

struct InfSupLevel {
  int n = 0;          // macroelements per side
  int cells = 0;      // cells per side
  int n_disp = 0;
  int n_pres = 0;
  int zero_modes = 0;     // eigenvalues counted as zero
  double eigenvalue = 0;  // smallest nonzero eigenvalue (inf-sup constant squared)
};

enum class Verdict { passes, fails, inconclusive };
std::string_view to_string(Verdict v);

struct InfSupReport {
  ElementKind kind = ElementKind::P1RT0;
  MeshPattern pattern = MeshPattern::criss;
  std::vector<InfSupLevel> levels;
  Verdict verdict = Verdict::inconclusive;
  int local_modes = 0;
  int global_modes = 0;
};

/// Smallest nonzero eigenvalue of Q^T S^-1 Q p = lambda T p on one mesh.
InfSupLevel infsup_level(ElementKind kind, MeshPattern pattern, int n, double size = 1.0);

/// Fails if the eigenvalue drops by more than 2x from N=4 to the finest level,
/// passes if the change between the two finest levels is within 20%.
Verdict classify(const std::vector<InfSupLevel>& levels);

InfSupReport infsup_test(ElementKind kind, MeshPattern pattern, const std::vector<int>& levels = {1, 2, 4, 8, 16});

/// Reports for every (kind, pattern) pair, evaluated concurrently.
std::vector<InfSupReport> stability_table(const std::vector<ElementKind>& kinds,
                                          const std::vector<MeshPattern>& patterns,
                                          const std::vector<int>& levels = {1, 2, 4, 8, 16});

void write_table_text(std::ostream& os, const std::vector<InfSupReport>& reports);
/// One row per (element, pattern): columns A/B/C as pass/fail.
void write_table_csv(std::ostream& os, const std::vector<InfSupReport>& reports);
/// One row per refinement level with the smallest nonzero eigenvalue.
void write_levels_csv(std::ostream& os, const std::vector<InfSupReport>& reports);

/// Sum over interior edges of (p_m - p_m')^2 l_j divided by sum of p_m^2 A_m + eps.
double checkerboard_metric(const Mesh& mesh, const Vector& p, double eps = 1e-300);

}  // namespace poroflow
