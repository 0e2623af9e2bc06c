#include "poroflow/basis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "poroflow/errors.hpp"

namespace poroflow {

namespace {

QuadratureRule make_rule3() {
  QuadratureRule r;
  r.degree = 2;
  const double a = 2.0 / 3.0;
  const double b = 1.0 / 6.0;
  r.points = {{a, b, b}, {b, a, b}, {b, b, a}};
  r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  return r;
}

QuadratureRule make_rule6() {
  QuadratureRule r;
  r.degree = 4;
  const double a1 = 0.445948490915965;
  const double b1 = 1.0 - 2.0 * a1;
  const double w1 = 0.223381589678011;
  const double a2 = 0.091576213509771;
  const double b2 = 1.0 - 2.0 * a2;
  const double w2 = 0.109951743655322;
  r.points = {{b1, a1, a1}, {a1, b1, a1}, {a1, a1, b1}, {b2, a2, a2}, {a2, b2, a2}, {a2, a2, b2}};
  r.weights = {w1, w1, w1, w2, w2, w2};
  return r;
}

}  // namespace

const QuadratureRule& quadrature(int degree) {
  static const QuadratureRule rule3 = make_rule3();
  static const QuadratureRule rule6 = make_rule6();
  switch (degree) {
    case 2: return rule3;
    case 4: return rule6;
    default: throw InvalidInput(fmt::format("no triangle quadrature rule for degree {}", degree));
  }
}

TriangleGeometry TriangleGeometry::from(const std::array<Point, 3>& v) {
  TriangleGeometry g;
  g.vertices = v;
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) {
    g.edge_lengths[i] = (v[(i + 2) % 3] - v[(i + 1) % 3]).norm();
    scale = std::max(scale, g.edge_lengths[i]);
  }
  const Point e1 = v[1] - v[0];
  const Point e2 = v[2] - v[0];
  g.area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
  if (!(std::abs(g.area) > 1e-14 * scale * scale)) {
    throw NumericalError("geometry", fmt::format("degenerate triangle (area {:g})", g.area));
  }
  // grad(lambda_i) = rot(x_{i+2} - x_{i+1}) / (2A), pointing towards vertex i.
  for (int i = 0; i < 3; ++i) {
    const Point t = v[(i + 2) % 3] - v[(i + 1) % 3];
    g.grad_bary(i, 0) = -t.y() / (2.0 * g.area);
    g.grad_bary(i, 1) = t.x() / (2.0 * g.area);
  }
  return g;
}

Eigen::Vector3d TriangleGeometry::barycentric(const Point& x) const {
  Eigen::Vector3d l;
  for (int i = 0; i < 3; ++i) {
    l[i] = grad_bary.row(i).dot(x - vertices[(i + 1) % 3]);
  }
  return l;
}

Point TriangleGeometry::cartesian(const Eigen::Vector3d& bary) const {
  return bary[0] * vertices[0] + bary[1] * vertices[1] + bary[2] * vertices[2];
}

NodalValues eval_nodal(NodalKind kind, const TriangleGeometry& geom, const Eigen::Vector3d& l) {
  NodalValues out;
  std::array<Point, 3> gl;
  for (int i = 0; i < 3; ++i) gl[i] = geom.grad_bary.row(i).transpose();

  if (kind == NodalKind::P1) {
    out.count = 3;
    for (int i = 0; i < 3; ++i) {
      out.value[i] = l[i];
      out.grad[i] = gl[i];
    }
    return out;
  }

  out.count = 6;
  for (int i = 0; i < 3; ++i) {
    out.value[i] = l[i] * (2.0 * l[i] - 1.0);
    out.grad[i] = (4.0 * l[i] - 1.0) * gl[i];
  }
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    out.value[3 + i] = 4.0 * l[j] * l[k];
    out.grad[3 + i] = 4.0 * (l[j] * gl[k] + l[k] * gl[j]);
  }
  return out;
}

NodalValues eval_nodal(NodalKind kind, const TriangleGeometry& geom, const Point& x) {
  return eval_nodal(kind, geom, geom.barycentric(x));
}

Rt0Values eval_rt0(const TriangleGeometry& geom, const std::array<int, 3>& signs, const Point& x) {
  Rt0Values out;
  for (int i = 0; i < 3; ++i) {
    const double c = signs[i] * geom.edge_lengths[i] / (2.0 * geom.area);
    out.value[i] = c * (x - geom.vertices[i]);
    out.div[i] = 2.0 * c;
  }
  return out;
}

}  // namespace poroflow
