#pragma once

#include <array>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "poroflow/basis.hpp"
#include "poroflow/mesh.hpp"

namespace poroflow {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

enum class ElementKind { P1RT0, P2RT0 };
enum class MassMode { consistent, lobatto, hinton };
enum class LumpMethod { lobatto, hinton };

ElementKind parse_element(std::string_view name);
std::string_view to_string(ElementKind kind);
MassMode parse_mass_mode(std::string_view name);
std::string_view to_string(MassMode mode);

inline NodalKind nodal_kind(ElementKind kind) {
  return kind == ElementKind::P1RT0 ? NodalKind::P1 : NodalKind::P2;
}
inline int quadrature_degree(ElementKind kind) { return kind == ElementKind::P1RT0 ? 2 : 4; }

/// Elastic skeleton, pore fluid and coupling constants, SI units throughout.
/// The Biot-Willis coefficient is fixed at 1.
struct MaterialParams {
  double youngs_modulus = 0.0;  // Pa
  double poisson = 0.0;
  double solid_density = 0.0;  // kg/m^3
  double fluid_density = 0.0;  // kg/m^3
  double porosity = 0.0;
  double conductivity = 0.0;  // hydraulic conductivity K_h, m/s
  double gravity = 9.81;      // m/s^2

  double lame_lambda() const;
  double shear_modulus() const;
  /// lambda + 2G, the plane-strain constrained modulus.
  double constrained_modulus() const;
  /// Mixture density n_f rho_f + (1 - n_f) rho_s.
  double density() const;
  /// Coefficient n_f g / K_h multiplying A in the Darcy row.
  double darcy_damping() const;

  /// Throws InvalidInput when a parameter is outside its physical range.
  void validate() const;
};

/// Scalar time history multiplying a boundary datum.
struct LoadHistory {
  enum class Kind { step, ramp, table };
  Kind kind = Kind::step;
  double rise_time = 0.0;                           // ramp only
  std::vector<std::pair<double, double>> samples;  // table only, increasing t

  static LoadHistory step() { return {}; }
  static LoadHistory ramp(double rise);
  static LoadHistory table(std::vector<std::pair<double, double>> samples);

  /// Value at t >= 0; table lookups outside the tabulated range throw InvalidInput.
  double operator()(double t) const;
};

enum class SkeletonCondition { free, normal_fixed, fully_fixed, traction };
enum class FluidCondition { impermeable, drained };

/// Part of one side of the rectangle, selected by the coordinate along that
/// side (x for bottom/top, y for left/right).
struct SideRange {
  Side side = Side::top;
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
};

struct SkeletonSegment {
  SideRange where;
  SkeletonCondition condition = SkeletonCondition::free;
  Point traction = Point::Zero();  // Pa, amplitude of T_prsc
  LoadHistory history;
};

struct FluidSegment {
  SideRange where;
  FluidCondition condition = FluidCondition::impermeable;
  double pressure = 0.0;  // Pa, amplitude of p_prsc
  LoadHistory history;
};

/// Skeleton and fluid boundary conditions. Every boundary edge must belong to
/// exactly one skeleton segment and exactly one fluid segment.
struct BCSpec {
  std::vector<SkeletonSegment> skeleton;
  std::vector<FluidSegment> fluid;
};

/// Free-DOF numbering for displacement (nodes, plus edge midpoints for P2),
/// edge velocities and elemental pressures. Pressures are never constrained.
struct DofMap {
  ElementKind kind = ElementKind::P1RT0;
  int num_vertices = 0;
  int num_disp_nodes = 0;
  /// Per displacement component (2 * node + c): free index or -1.
  std::vector<int> disp;
  /// Per edge: free velocity index or -1.
  std::vector<int> vel;
  int n_disp = 0;
  int n_vel = 0;
  int n_pres = 0;

  int disp_node_of_vertex(int v) const { return v; }
  int disp_node_of_edge(int e) const { return num_vertices + e; }
  /// Local displacement nodes of triangle m in basis order.
  std::array<int, 6> element_nodes(const Mesh& mesh, std::size_t m) const;
  Point node_position(const Mesh& mesh, int node) const;
  int total() const { return n_disp + n_vel + n_pres; }
};

DofMap build_dofmap(const Mesh& mesh, ElementKind kind, const BCSpec& bc);

/// Element-level blocks in local ordering [u_x0, u_y0, u_x1, u_y1, ...].
struct ElementMatrices {
  Eigen::MatrixXd M;   // 2n x 2n
  Eigen::MatrixXd Mf;  // 2n x 3
  Eigen::MatrixXd A;   // 3 x 3
  Eigen::MatrixXd K;   // 2n x 2n
  Eigen::VectorXd Q;   // 2n
  Eigen::Vector3d B;
};

ElementMatrices element_matrices(ElementKind kind, const TriangleGeometry& geom,
                                 const std::array<int, 3>& signs, const MaterialParams& mat,
                                 MassMode mass_mode);

/// Per-node lumped-mass fractions of the element total (sum to one).
std::vector<double> lumping_fractions(NodalKind kind, const Eigen::MatrixXd& element_mass,
                                      LumpMethod method);

/// Diagonal lumped version of an element mass matrix in interleaved ordering.
/// Total mass per coordinate direction is preserved.
Eigen::MatrixXd lump_mass(const Eigen::MatrixXd& element_mass, LumpMethod method, NodalKind kind);

/// Global blocks of the semi-discrete system after eliminating constrained DOFs.
struct SystemMatrices {
  SparseMatrix M;   // disp x disp
  SparseMatrix Mf;  // disp x vel
  SparseMatrix A;   // vel x vel
  SparseMatrix K;   // disp x disp
  SparseMatrix Q;   // disp x pres
  SparseMatrix B;   // vel x pres
  double darcy_damping = 0.0;
  MassMode mass_mode = MassMode::consistent;

  int n_disp() const { return static_cast<int>(M.rows()); }
  int n_vel() const { return static_cast<int>(A.rows()); }
  int n_pres() const { return static_cast<int>(Q.cols()); }
};

struct Assembled {
  SystemMatrices sys;
  DofMap dofs;
};

Assembled assemble(const Mesh& mesh, ElementKind kind, const MaterialParams& mat, const BCSpec& bc,
                   MassMode mass_mode);

/// Boundary load vectors P(t) (traction) and F(t) (prescribed pressure).
class LoadAssembler {
 public:
  LoadAssembler(const Mesh& mesh, const DofMap& dofs, const BCSpec& bc);

  std::pair<Vector, Vector> operator()(double t) const;

 private:
  struct Term {
    Vector unit;
    LoadHistory history;
  };
  std::vector<Term> traction_terms_;
  std::vector<Term> pressure_terms_;
  int n_disp_ = 0;
  int n_vel_ = 0;
};

std::pair<Vector, Vector> load_vectors(const Mesh& mesh, const DofMap& dofs, const BCSpec& bc, double t);

}  // namespace poroflow
