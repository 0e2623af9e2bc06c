#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace poroflow {

using Point = Eigen::Vector2d;

enum class MeshPattern { criss, crisscross, union_jack };

enum class Side { left, right, bottom, top };

inline constexpr std::array<Side, 4> all_sides{Side::left, Side::right, Side::bottom, Side::top};

MeshPattern parse_pattern(std::string_view name);
std::string_view to_string(MeshPattern pattern);
Side parse_side(std::string_view name);
std::string_view to_string(Side side);

/// Structured rectangle [0, width] x [0, height] split into nx by ny square-ish cells.
struct MeshSpec {
  double width = 1.0;
  double height = 1.0;
  int nx = 1;
  int ny = 1;
  MeshPattern pattern = MeshPattern::criss;
};

/// Triangulation with the global edge-normal convention used by the RT0 space.
///
/// Local edge i of a triangle is opposite local vertex i. Each edge carries a
/// unit normal that equals the outward normal of the lowest-indexed triangle
/// touching it, so boundary normals always point out of the domain and the
/// per-(triangle, edge) sign is +1 for the first triangle and -1 for the second.
class Mesh {
 public:
  static constexpr int no_triangle = -1;

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::array<int, 3>& tri_edges(std::size_t m) const { return tri_to_edge_[m]; }
  const std::array<int, 3>& tri_signs(std::size_t m) const { return signs_[m]; }
  /// Incident triangles of an edge; second entry is no_triangle on the boundary.
  const std::array<int, 2>& edge_triangles(std::size_t j) const { return edge_to_tri_[j]; }
  const Point& edge_normal(std::size_t j) const { return edge_normal_[j]; }
  double edge_length(std::size_t j) const { return edge_length_[j]; }
  double tri_area(std::size_t m) const { return tri_area_[m]; }
  bool is_boundary_edge(std::size_t j) const { return edge_to_tri_[j][1] == no_triangle; }

  Point centroid(std::size_t m) const;
  Point edge_midpoint(std::size_t j) const;
  std::array<Point, 3> vertices(std::size_t m) const;

  bool node_on(std::size_t node, Side side) const;
  /// Boundary edges lying on one side of the rectangle, in increasing edge index.
  std::vector<int> boundary_edges(Side side) const;
  std::vector<int> boundary_nodes(Side side) const;

  double width() const { return width_; }
  double height() const { return height_; }
  double min_edge_length() const;

  /// Index of the node within `tol` of p, or -1.
  int find_node(const Point& p, double tol) const;
  /// Triangle containing p (first match in index order), or -1.
  int find_triangle(const Point& p) const;

  /// Plain-text dump: node table, triangle table, edge table with normals and signs.
  void write_text(std::ostream& os) const;

 private:
  friend Mesh generate(const MeshSpec& spec);

  void build_topology();

  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_to_edge_;
  std::vector<std::array<int, 3>> signs_;
  std::vector<std::array<int, 2>> edge_to_tri_;
  std::vector<Point> edge_normal_;
  std::vector<double> edge_length_;
  std::vector<double> tri_area_;
  double width_ = 0.0;
  double height_ = 0.0;
  double side_tol_ = 0.0;
};

/// Build a structured triangulation. Nodes are numbered row-major over the
/// grid corners, followed by cell-centre nodes (crisscross only). Triangles are
/// enumerated cell by cell, row-major.
Mesh generate(const MeshSpec& spec);

}  // namespace poroflow
