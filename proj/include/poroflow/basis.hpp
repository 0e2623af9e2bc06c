#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "poroflow/mesh.hpp"

namespace poroflow {

enum class NodalKind { P1, P2 };

inline constexpr int num_nodal_functions(NodalKind kind) { return kind == NodalKind::P1 ? 3 : 6; }

/// Symmetric Gauss rule on a triangle. Points are barycentric, weights sum to one
/// and get multiplied by the triangle area at the use site.
struct QuadratureRule {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
  int degree = 0;
};

/// 3-point rule for degree 2, 6-point rule for degree 4.
const QuadratureRule& quadrature(int degree);

/// Straight-sided triangle with precomputed barycentric gradients.
struct TriangleGeometry {
  std::array<Point, 3> vertices;
  double area = 0.0;
  /// Row i is the Cartesian gradient of barycentric coordinate i.
  Eigen::Matrix<double, 3, 2> grad_bary;
  /// Length of local edge i (opposite vertex i).
  std::array<double, 3> edge_lengths{};

  static TriangleGeometry from(const std::array<Point, 3>& vertices);

  Eigen::Vector3d barycentric(const Point& x) const;
  Point cartesian(const Eigen::Vector3d& bary) const;
};

/// Values and gradients of the 3 (P1) or 6 (P2) nodal functions. For P2, local
/// function 3 + i lives at the midpoint of local edge i.
struct NodalValues {
  int count = 0;
  std::array<double, 6> value{};
  std::array<Point, 6> grad{};
};

NodalValues eval_nodal(NodalKind kind, const TriangleGeometry& geom, const Eigen::Vector3d& bary);
NodalValues eval_nodal(NodalKind kind, const TriangleGeometry& geom, const Point& x);

/// RT0 edge functions W_i(x) = s_i l_i / (2A) (x - x_i) with x_i the vertex opposite edge i.
struct Rt0Values {
  std::array<Point, 3> value{};
  std::array<double, 3> div{};
};

Rt0Values eval_rt0(const TriangleGeometry& geom, const std::array<int, 3>& signs, const Point& x);

}  // namespace poroflow
