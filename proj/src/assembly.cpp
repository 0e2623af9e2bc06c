#include "poroflow/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "poroflow/errors.hpp"
#include "poroflow/parallel.hpp"

namespace poroflow {

ElementKind parse_element(std::string_view name) {
  if (name == "p1rt0" || name == "P1RT0") return ElementKind::P1RT0;
  if (name == "p2rt0" || name == "P2RT0") return ElementKind::P2RT0;
  throw InvalidInput(fmt::format("unknown element kind '{}'", name));
}

std::string_view to_string(ElementKind kind) {
  return kind == ElementKind::P1RT0 ? "p1rt0" : "p2rt0";
}

MassMode parse_mass_mode(std::string_view name) {
  if (name == "consistent") return MassMode::consistent;
  if (name == "lobatto") return MassMode::lobatto;
  if (name == "hinton" || name == "hrz") return MassMode::hinton;
  throw InvalidInput(fmt::format("unknown mass mode '{}'", name));
}

std::string_view to_string(MassMode mode) {
  switch (mode) {
    case MassMode::consistent: return "consistent";
    case MassMode::lobatto: return "lobatto";
    case MassMode::hinton: return "hinton";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Material

double MaterialParams::lame_lambda() const {
  return youngs_modulus * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
}

double MaterialParams::shear_modulus() const { return youngs_modulus / (2.0 * (1.0 + poisson)); }

double MaterialParams::constrained_modulus() const { return lame_lambda() + 2.0 * shear_modulus(); }

double MaterialParams::density() const {
  return porosity * fluid_density + (1.0 - porosity) * solid_density;
}

double MaterialParams::darcy_damping() const { return porosity * gravity / conductivity; }

void MaterialParams::validate() const {
  if (!(youngs_modulus > 0.0)) throw InvalidInput("Young's modulus must be positive");
  if (!(poisson > 0.0 && poisson < 0.5)) throw InvalidInput("Poisson ratio must lie in (0, 0.5)");
  if (!(solid_density > 0.0) || !(fluid_density > 0.0)) throw InvalidInput("densities must be positive");
  if (!(porosity > 0.0 && porosity < 1.0)) throw InvalidInput("porosity must lie in (0, 1)");
  if (!(conductivity > 0.0)) throw InvalidInput("hydraulic conductivity must be positive");
  if (!(gravity > 0.0)) throw InvalidInput("gravitational acceleration must be positive");
}

// ---------------------------------------------------------------------------
// Load histories

LoadHistory LoadHistory::ramp(double rise) {
  if (!(rise > 0.0)) throw InvalidInput("ramp rise time must be positive");
  LoadHistory h;
  h.kind = Kind::ramp;
  h.rise_time = rise;
  return h;
}

LoadHistory LoadHistory::table(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) throw InvalidInput("load table needs at least one sample");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].first > samples[i - 1].first)) {
      throw InvalidInput("load table times must be strictly increasing");
    }
  }
  LoadHistory h;
  h.kind = Kind::table;
  h.samples = std::move(samples);
  return h;
}

double LoadHistory::operator()(double t) const {
  if (t < 0.0) throw InvalidInput(fmt::format("load history evaluated at negative time {}", t));
  switch (kind) {
    case Kind::step: return 1.0;
    case Kind::ramp: return std::min(1.0, t / rise_time);
    case Kind::table: {
      const double slack = 1e-12 * std::max(1.0, std::abs(samples.back().first));
      if (t < samples.front().first - slack || t > samples.back().first + slack) {
        throw InvalidInput(fmt::format("time {} outside tabulated load history [{}, {}]", t,
                                       samples.front().first, samples.back().first));
      }
      if (samples.size() == 1) return samples.front().second;
      auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                                 [](const auto& s, double v) { return s.first < v; });
      if (hi == samples.begin()) return hi->second;
      if (hi == samples.end()) return samples.back().second;
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return (1.0 - w) * lo->second + w * hi->second;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Boundary classification

namespace {

double along(const Point& x, Side side) {
  return (side == Side::left || side == Side::right) ? x.y() : x.x();
}

bool edge_in(const Mesh& mesh, int edge, const SideRange& r) {
  const auto& e = mesh.edges()[edge];
  if (!mesh.is_boundary_edge(edge) || !mesh.node_on(e[0], r.side) || !mesh.node_on(e[1], r.side)) {
    return false;
  }
  const double tol = 1e-9 * std::hypot(mesh.width(), mesh.height());
  const double s = along(mesh.edge_midpoint(edge), r.side);
  return s >= r.from - tol && s <= r.to + tol;
}

template <class Segment>
std::vector<int> segment_of_edges(const Mesh& mesh, const std::vector<Segment>& segments,
                                  std::string_view what) {
  std::vector<int> owner(mesh.num_edges(), -1);
  for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
    if (!mesh.is_boundary_edge(j)) continue;
    int count = 0;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (edge_in(mesh, static_cast<int>(j), segments[s].where)) {
        owner[j] = static_cast<int>(s);
        ++count;
      }
    }
    if (count != 1) {
      const Point mid = mesh.edge_midpoint(j);
      throw InvalidInput(fmt::format("boundary edge {} at ({:g}, {:g}) is covered by {} {} conditions (need exactly 1)",
                                     j, mid.x(), mid.y(), count, what));
    }
  }
  return owner;
}

}  // namespace

std::array<int, 6> DofMap::element_nodes(const Mesh& mesh, std::size_t m) const {
  const auto& t = mesh.triangles()[m];
  std::array<int, 6> out{t[0], t[1], t[2], -1, -1, -1};
  if (kind == ElementKind::P2RT0) {
    const auto& e = mesh.tri_edges(m);
    for (int i = 0; i < 3; ++i) out[3 + i] = disp_node_of_edge(e[i]);
  }
  return out;
}

Point DofMap::node_position(const Mesh& mesh, int node) const {
  if (node < num_vertices) return mesh.nodes()[node];
  return mesh.edge_midpoint(node - num_vertices);
}

DofMap build_dofmap(const Mesh& mesh, ElementKind kind, const BCSpec& bc) {
  const auto skel_owner = segment_of_edges(mesh, bc.skeleton, "skeleton");
  const auto fluid_owner = segment_of_edges(mesh, bc.fluid, "fluid");

  DofMap d;
  d.kind = kind;
  d.num_vertices = static_cast<int>(mesh.num_nodes());
  d.num_disp_nodes = d.num_vertices + (kind == ElementKind::P2RT0 ? static_cast<int>(mesh.num_edges()) : 0);

  std::vector<char> fixed(2 * d.num_disp_nodes, 0);
  for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
    if (skel_owner[j] < 0) continue;
    const auto& seg = bc.skeleton[skel_owner[j]];
    std::array<bool, 2> comp{false, false};
    if (seg.condition == SkeletonCondition::fully_fixed) {
      comp = {true, true};
    } else if (seg.condition == SkeletonCondition::normal_fixed) {
      const bool vertical_side = seg.where.side == Side::left || seg.where.side == Side::right;
      comp = {vertical_side, !vertical_side};
    } else {
      continue;
    }
    std::vector<int> nodes{mesh.edges()[j][0], mesh.edges()[j][1]};
    if (kind == ElementKind::P2RT0) nodes.push_back(d.disp_node_of_edge(static_cast<int>(j)));
    for (int n : nodes) {
      for (int c = 0; c < 2; ++c) {
        if (comp[c]) fixed[2 * n + c] = 1;
      }
    }
  }

  d.disp.assign(fixed.size(), -1);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (!fixed[i]) d.disp[i] = d.n_disp++;
  }
  d.vel.assign(mesh.num_edges(), -1);
  for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
    const bool closed = fluid_owner[j] >= 0 && bc.fluid[fluid_owner[j]].condition == FluidCondition::impermeable;
    if (!closed) d.vel[j] = d.n_vel++;
  }
  d.n_pres = static_cast<int>(mesh.num_triangles());
  return d;
}

// ---------------------------------------------------------------------------
// Element matrices and lumping

std::vector<double> lumping_fractions(NodalKind kind, const Eigen::MatrixXd& element_mass, LumpMethod method) {
  const int n = num_nodal_functions(kind);
  if (element_mass.rows() != 2 * n || element_mass.cols() != 2 * n) {
    throw InvalidInput("element mass matrix size does not match the nodal kind");
  }
  std::vector<double> frac(n);
  switch (method) {
    case LumpMethod::lobatto:
      // Nodal quadrature: vertices for P1; on P2 the only positive rule on the
      // six nodes that is exact for quadratics puts all weight on the midpoints.
      for (int k = 0; k < n; ++k) frac[k] = (kind == NodalKind::P1 || k >= 3) ? 1.0 / 3.0 : 0.0;
      break;
    case LumpMethod::hinton: {
      double diag = 0.0;
      for (int k = 0; k < n; ++k) diag += element_mass(2 * k, 2 * k);
      for (int k = 0; k < n; ++k) frac[k] = element_mass(2 * k, 2 * k) / diag;
      break;
    }
  }
  return frac;
}

Eigen::MatrixXd lump_mass(const Eigen::MatrixXd& element_mass, LumpMethod method, NodalKind kind) {
  const int n = num_nodal_functions(kind);
  const auto frac = lumping_fractions(kind, element_mass, method);
  double total = 0.0;  // x-direction mass
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) total += element_mass(2 * k, 2 * l);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    out(2 * k, 2 * k) = frac[k] * total;
    out(2 * k + 1, 2 * k + 1) = frac[k] * total;
  }
  return out;
}

ElementMatrices element_matrices(ElementKind kind, const TriangleGeometry& geom, const std::array<int, 3>& signs,
                                 const MaterialParams& mat, MassMode mass_mode) {
  const NodalKind nk = nodal_kind(kind);
  const int n = num_nodal_functions(nk);
  const QuadratureRule& rule = quadrature(quadrature_degree(kind));

  const double rho = mat.density();
  const double rho_f = mat.fluid_density;
  const double lam = mat.lame_lambda();
  const double G = mat.shear_modulus();

  ElementMatrices em;
  em.M.setZero(2 * n, 2 * n);
  em.Mf.setZero(2 * n, 3);
  em.A.setZero(3, 3);
  em.K.setZero(2 * n, 2 * n);
  em.Q.setZero(2 * n);
  for (int i = 0; i < 3; ++i) em.B[i] = signs[i] * geom.edge_lengths[i];

  Eigen::Matrix3d C;
  C << lam + 2 * G, lam, 0, lam, lam + 2 * G, 0, 0, 0, G;

  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double w = rule.weights[q] * geom.area;
    const Eigen::Vector3d& l = rule.points[q];
    const Point x = geom.cartesian(l);
    const NodalValues N = eval_nodal(nk, geom, l);
    const Rt0Values W = eval_rt0(geom, signs, x);

    Eigen::MatrixXd Bu = Eigen::MatrixXd::Zero(3, 2 * n);
    for (int k = 0; k < n; ++k) {
      Bu(0, 2 * k) = N.grad[k].x();
      Bu(1, 2 * k + 1) = N.grad[k].y();
      Bu(2, 2 * k) = N.grad[k].y();
      Bu(2, 2 * k + 1) = N.grad[k].x();
    }
    em.K.noalias() += w * Bu.transpose() * C * Bu;
    em.Q += w * (Bu.row(0) + Bu.row(1)).transpose();

    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double m = w * rho * N.value[a] * N.value[b];
        em.M(2 * a, 2 * b) += m;
        em.M(2 * a + 1, 2 * b + 1) += m;
      }
      for (int j = 0; j < 3; ++j) {
        em.Mf(2 * a, j) += w * rho_f * N.value[a] * W.value[j].x();
        em.Mf(2 * a + 1, j) += w * rho_f * N.value[a] * W.value[j].y();
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) em.A(i, j) += w * (rho_f / mat.porosity) * W.value[i].dot(W.value[j]);
    }
  }
  // Exact symmetry, so the global blocks are symmetric bit for bit.
  em.M = (0.5 * (em.M + em.M.transpose())).eval();
  em.K = (0.5 * (em.K + em.K.transpose())).eval();
  em.A = (0.5 * (em.A + em.A.transpose())).eval();

  if (mass_mode != MassMode::consistent) {
    const LumpMethod method = mass_mode == MassMode::lobatto ? LumpMethod::lobatto : LumpMethod::hinton;
    const auto frac = lumping_fractions(nk, em.M, method);
    em.M = lump_mass(em.M, method, nk);
    // Coupled mass uses the same nodal quadrature as the lumped skeleton mass.
    em.Mf.setZero();
    for (int k = 0; k < n; ++k) {
      if (frac[k] == 0.0) continue;
      const Point xk = k < 3 ? geom.vertices[k]
                             : 0.5 * (geom.vertices[(k - 2) % 3] + geom.vertices[(k - 1) % 3]);
      const Rt0Values W = eval_rt0(geom, signs, xk);
      for (int j = 0; j < 3; ++j) {
        em.Mf(2 * k, j) = rho_f * frac[k] * geom.area * W.value[j].x();
        em.Mf(2 * k + 1, j) = rho_f * frac[k] * geom.area * W.value[j].y();
      }
    }
  }
  return em;
}

// ---------------------------------------------------------------------------
// Global assembly

Assembled assemble(const Mesh& mesh, ElementKind kind, const MaterialParams& mat, const BCSpec& bc,
                   MassMode mass_mode) {
  mat.validate();
  Assembled out;
  DofMap& d = out.dofs;
  d = build_dofmap(mesh, kind, bc);

  const std::size_t ne = mesh.num_triangles();
  std::vector<ElementMatrices> local(ne);
  parallel_for(ne, [&](std::size_t m) {
    local[m] = element_matrices(kind, TriangleGeometry::from(mesh.vertices(m)), mesh.tri_signs(m), mat, mass_mode);
  });

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> tM, tMf, tA, tK, tQ, tB;
  const int n = num_nodal_functions(nodal_kind(kind));
  std::vector<int> udof(2 * n);
  for (std::size_t m = 0; m < ne; ++m) {
    const ElementMatrices& em = local[m];
    const auto nodes = d.element_nodes(mesh, m);
    for (int k = 0; k < n; ++k) {
      udof[2 * k] = d.disp[2 * nodes[k]];
      udof[2 * k + 1] = d.disp[2 * nodes[k] + 1];
    }
    const auto& edges = mesh.tri_edges(m);
    std::array<int, 3> vdof{d.vel[edges[0]], d.vel[edges[1]], d.vel[edges[2]]};
    const int pdof = static_cast<int>(m);

    for (int a = 0; a < 2 * n; ++a) {
      if (udof[a] < 0) continue;
      for (int b = 0; b < 2 * n; ++b) {
        if (udof[b] < 0) continue;
        if (em.M(a, b) != 0.0) tM.emplace_back(udof[a], udof[b], em.M(a, b));
        tK.emplace_back(udof[a], udof[b], em.K(a, b));
      }
      for (int j = 0; j < 3; ++j) {
        if (vdof[j] >= 0 && em.Mf(a, j) != 0.0) tMf.emplace_back(udof[a], vdof[j], em.Mf(a, j));
      }
      tQ.emplace_back(udof[a], pdof, em.Q[a]);
    }
    for (int i = 0; i < 3; ++i) {
      if (vdof[i] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        if (vdof[j] >= 0) tA.emplace_back(vdof[i], vdof[j], em.A(i, j));
      }
      tB.emplace_back(vdof[i], pdof, em.B[i]);
    }
  }

  SystemMatrices& s = out.sys;
  const auto build = [](SparseMatrix& target, int rows, int cols, const std::vector<Triplet>& t) {
    target.resize(rows, cols);
    target.setFromTriplets(t.begin(), t.end());
    target.makeCompressed();
  };
  build(s.M, d.n_disp, d.n_disp, tM);
  build(s.Mf, d.n_disp, d.n_vel, tMf);
  build(s.A, d.n_vel, d.n_vel, tA);
  build(s.K, d.n_disp, d.n_disp, tK);
  build(s.Q, d.n_disp, d.n_pres, tQ);
  build(s.B, d.n_vel, d.n_pres, tB);
  s.darcy_damping = mat.darcy_damping();
  s.mass_mode = mass_mode;
  return out;
}

// ---------------------------------------------------------------------------
// Loads

LoadAssembler::LoadAssembler(const Mesh& mesh, const DofMap& dofs, const BCSpec& bc)
    : n_disp_(dofs.n_disp), n_vel_(dofs.n_vel) {
  const auto skel_owner = segment_of_edges(mesh, bc.skeleton, "skeleton");
  const auto fluid_owner = segment_of_edges(mesh, bc.fluid, "fluid");

  for (std::size_t s = 0; s < bc.skeleton.size(); ++s) {
    const auto& seg = bc.skeleton[s];
    if (seg.condition != SkeletonCondition::traction) continue;
    Vector unit = Vector::Zero(n_disp_);
    for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
      if (skel_owner[j] != static_cast<int>(s)) continue;
      const double l = mesh.edge_length(j);
      const auto& e = mesh.edges()[j];
      // Consistent edge loads: linear ends l/2; quadratic ends l/6, midpoint 2l/3.
      std::vector<std::pair<int, double>> shares;
      if (dofs.kind == ElementKind::P1RT0) {
        shares = {{e[0], l / 2.0}, {e[1], l / 2.0}};
      } else {
        shares = {{e[0], l / 6.0}, {e[1], l / 6.0}, {dofs.disp_node_of_edge(static_cast<int>(j)), 2.0 * l / 3.0}};
      }
      for (const auto& [node, share] : shares) {
        for (int c = 0; c < 2; ++c) {
          const int dof = dofs.disp[2 * node + c];
          if (dof >= 0) unit[dof] += share * seg.traction[c];
        }
      }
    }
    traction_terms_.push_back({std::move(unit), seg.history});
  }

  for (std::size_t s = 0; s < bc.fluid.size(); ++s) {
    const auto& seg = bc.fluid[s];
    if (seg.condition != FluidCondition::drained) continue;
    Vector unit = Vector::Zero(n_vel_);
    for (std::size_t j = 0; j < mesh.num_edges(); ++j) {
      if (fluid_owner[j] != static_cast<int>(s) || dofs.vel[j] < 0) continue;
      // W_j has unit normal component on its own boundary edge.
      unit[dofs.vel[j]] -= seg.pressure * mesh.edge_length(j);
    }
    pressure_terms_.push_back({std::move(unit), seg.history});
  }
}

std::pair<Vector, Vector> LoadAssembler::operator()(double t) const {
  Vector P = Vector::Zero(n_disp_);
  Vector F = Vector::Zero(n_vel_);
  for (const auto& term : traction_terms_) P += term.history(t) * term.unit;
  for (const auto& term : pressure_terms_) F += term.history(t) * term.unit;
  return {P, F};
}

std::pair<Vector, Vector> load_vectors(const Mesh& mesh, const DofMap& dofs, const BCSpec& bc, double t) {
  return LoadAssembler(mesh, dofs, bc)(t);
}

}  // namespace poroflow
