#include "poroflow/mesh.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "poroflow/errors.hpp"

namespace poroflow {

MeshPattern parse_pattern(std::string_view name) {
  if (name == "criss") return MeshPattern::criss;
  if (name == "crisscross") return MeshPattern::crisscross;
  if (name == "unionjack" || name == "union_jack") return MeshPattern::union_jack;
  throw InvalidInput(fmt::format("unknown mesh pattern '{}'", name));
}

std::string_view to_string(MeshPattern pattern) {
  switch (pattern) {
    case MeshPattern::criss: return "criss";
    case MeshPattern::crisscross: return "crisscross";
    case MeshPattern::union_jack: return "unionjack";
  }
  return "?";
}

Side parse_side(std::string_view name) {
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  if (name == "bottom") return Side::bottom;
  if (name == "top") return Side::top;
  throw InvalidInput(fmt::format("unknown boundary side '{}'", name));
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

Point Mesh::centroid(std::size_t m) const {
  const auto& t = triangles_[m];
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

Point Mesh::edge_midpoint(std::size_t j) const {
  return 0.5 * (nodes_[edges_[j][0]] + nodes_[edges_[j][1]]);
}

std::array<Point, 3> Mesh::vertices(std::size_t m) const {
  const auto& t = triangles_[m];
  return {nodes_[t[0]], nodes_[t[1]], nodes_[t[2]]};
}

bool Mesh::node_on(std::size_t node, Side side) const {
  const Point& x = nodes_[node];
  switch (side) {
    case Side::left: return std::abs(x.x()) <= side_tol_;
    case Side::right: return std::abs(x.x() - width_) <= side_tol_;
    case Side::bottom: return std::abs(x.y()) <= side_tol_;
    case Side::top: return std::abs(x.y() - height_) <= side_tol_;
  }
  return false;
}

std::vector<int> Mesh::boundary_edges(Side side) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < edges_.size(); ++j) {
    if (is_boundary_edge(j) && node_on(edges_[j][0], side) && node_on(edges_[j][1], side)) {
      out.push_back(static_cast<int>(j));
    }
  }
  return out;
}

std::vector<int> Mesh::boundary_nodes(Side side) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (node_on(i, side)) out.push_back(static_cast<int>(i));
  }
  return out;
}

double Mesh::min_edge_length() const {
  double lmin = std::numeric_limits<double>::infinity();
  for (double l : edge_length_) lmin = std::min(lmin, l);
  return lmin;
}

int Mesh::find_node(const Point& p, double tol) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if ((nodes_[i] - p).norm() <= tol) return static_cast<int>(i);
  }
  return -1;
}

int Mesh::find_triangle(const Point& p) const {
  const double eps = 1e-12;
  for (std::size_t m = 0; m < triangles_.size(); ++m) {
    const auto v = vertices(m);
    bool inside = true;
    for (int i = 0; i < 3 && inside; ++i) {
      const Point& a = v[(i + 1) % 3];
      const Point& b = v[(i + 2) % 3];
      const Point e = b - a;
      const Point d = p - a;
      // Left of every CCW edge, with a relative tolerance.
      inside = e.x() * d.y() - e.y() * d.x() >= -eps * e.squaredNorm();
    }
    if (inside) return static_cast<int>(m);
  }
  return -1;
}

void Mesh::write_text(std::ostream& os) const {
  fmt::print(os, "# nodes {}\n", nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    fmt::print(os, "{} {:.15g} {:.15g}\n", i, nodes_[i].x(), nodes_[i].y());
  }
  fmt::print(os, "# triangles {}  (v0 v1 v2 | e0 e1 e2 | s0 s1 s2 | area)\n", triangles_.size());
  for (std::size_t m = 0; m < triangles_.size(); ++m) {
    const auto& t = triangles_[m];
    const auto& e = tri_to_edge_[m];
    const auto& s = signs_[m];
    fmt::print(os, "{} {} {} {} | {} {} {} | {:+d} {:+d} {:+d} | {:.15g}\n", m, t[0], t[1], t[2], e[0],
               e[1], e[2], s[0], s[1], s[2], tri_area_[m]);
  }
  fmt::print(os, "# edges {}  (n0 n1 | t0 t1 | normal | length)\n", edges_.size());
  for (std::size_t j = 0; j < edges_.size(); ++j) {
    fmt::print(os, "{} {} {} | {} {} | {:.15g} {:.15g} | {:.15g}\n", j, edges_[j][0], edges_[j][1],
               edge_to_tri_[j][0], edge_to_tri_[j][1], edge_normal_[j].x(), edge_normal_[j].y(),
               edge_length_[j]);
  }
}

void Mesh::build_topology() {
  const std::size_t nt = triangles_.size();
  tri_to_edge_.assign(nt, {-1, -1, -1});
  signs_.assign(nt, {0, 0, 0});
  tri_area_.resize(nt);
  edges_.clear();
  edge_to_tri_.clear();
  edge_normal_.clear();
  edge_length_.clear();

  std::map<std::pair<int, int>, int> lookup;
  for (std::size_t m = 0; m < nt; ++m) {
    const auto& t = triangles_[m];
    const Point e1 = nodes_[t[1]] - nodes_[t[0]];
    const Point e2 = nodes_[t[2]] - nodes_[t[0]];
    tri_area_[m] = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());

    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3];
      const int b = t[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
      const int j = it->second;
      tri_to_edge_[m][i] = j;
      if (inserted) {
        // Triangles are visited in index order, so the first visitor owns the normal.
        const Point tangent = nodes_[b] - nodes_[a];
        const double l = tangent.norm();
        edges_.push_back({a, b});
        edge_length_.push_back(l);
        edge_normal_.emplace_back(tangent.y() / l, -tangent.x() / l);
        edge_to_tri_.push_back({static_cast<int>(m), no_triangle});
        signs_[m][i] = +1;
      } else {
        edge_to_tri_[j][1] = static_cast<int>(m);
        signs_[m][i] = -1;
      }
    }
  }
}

Mesh generate(const MeshSpec& spec) {
  if (!(spec.width > 0.0) || !(spec.height > 0.0)) {
    throw InvalidInput(fmt::format("mesh dimensions must be positive (got {} x {})", spec.width, spec.height));
  }
  if (spec.nx < 1 || spec.ny < 1) {
    throw InvalidInput(fmt::format("mesh cell counts must be >= 1 (got {} x {})", spec.nx, spec.ny));
  }

  Mesh mesh;
  mesh.width_ = spec.width;
  mesh.height_ = spec.height;
  mesh.side_tol_ = 1e-9 * std::hypot(spec.width, spec.height);

  const int nx = spec.nx;
  const int ny = spec.ny;
  const double hx = spec.width / nx;
  const double hy = spec.height / ny;

  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) mesh.nodes_.emplace_back(i * hx, j * hy);
  }
  const auto corner = [nx](int i, int j) { return j * (nx + 1) + i; };
  const int first_centre = static_cast<int>(mesh.nodes_.size());
  if (spec.pattern == MeshPattern::crisscross) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) mesh.nodes_.emplace_back((i + 0.5) * hx, (j + 0.5) * hy);
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = corner(i, j);          // bottom-left
      const int b = corner(i + 1, j);      // bottom-right
      const int c = corner(i + 1, j + 1);  // top-right
      const int d = corner(i, j + 1);      // top-left
      switch (spec.pattern) {
        case MeshPattern::criss:
          mesh.triangles_.push_back({a, b, c});
          mesh.triangles_.push_back({a, c, d});
          break;
        case MeshPattern::union_jack:
          if ((i + j) % 2 == 0) {
            mesh.triangles_.push_back({a, b, c});
            mesh.triangles_.push_back({a, c, d});
          } else {
            mesh.triangles_.push_back({a, b, d});
            mesh.triangles_.push_back({b, c, d});
          }
          break;
        case MeshPattern::crisscross: {
          const int e = first_centre + j * nx + i;
          mesh.triangles_.push_back({a, b, e});
          mesh.triangles_.push_back({b, c, e});
          mesh.triangles_.push_back({c, d, e});
          mesh.triangles_.push_back({d, a, e});
          break;
        }
      }
    }
  }

  mesh.build_topology();
  return mesh;
}

}  // namespace poroflow
