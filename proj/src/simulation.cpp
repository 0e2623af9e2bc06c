#include "poroflow/simulation.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "poroflow/errors.hpp"

namespace poroflow {

ProbeKind parse_probe_kind(std::string_view name) {
  if (name == "node_ux" || name == "ux") return ProbeKind::ux;
  if (name == "node_uy" || name == "uy") return ProbeKind::uy;
  if (name == "node_vx" || name == "vx") return ProbeKind::vx;
  if (name == "node_vy" || name == "vy") return ProbeKind::vy;
  if (name == "elem_p" || name == "p") return ProbeKind::p;
  if (name == "elem_wx" || name == "wx") return ProbeKind::wx;
  if (name == "elem_wy" || name == "wy") return ProbeKind::wy;
  throw InvalidInput(fmt::format("unknown probe kind '{}'", name));
}

std::string_view to_string(ProbeKind kind) {
  switch (kind) {
    case ProbeKind::ux: return "node_ux";
    case ProbeKind::uy: return "node_uy";
    case ProbeKind::vx: return "node_vx";
    case ProbeKind::vy: return "node_vy";
    case ProbeKind::p: return "elem_p";
    case ProbeKind::wx: return "elem_wx";
    case ProbeKind::wy: return "elem_wy";
  }
  return "?";
}

Simulation::Simulation(Problem problem)
    : problem_(std::move(problem)),
      mesh_(generate(problem_.mesh)),
      assembled_(assemble(mesh_, problem_.element, problem_.material, problem_.bc, problem_.mass)),
      loads_(mesh_, assembled_.dofs, problem_.bc) {
  if (!(problem_.dt > 0.0) || !std::isfinite(problem_.dt)) {
    throw InvalidInput(fmt::format("time step must be positive (got {})", problem_.dt));
  }
  if (!(problem_.duration >= 0.0)) {
    throw InvalidInput(fmt::format("duration must be non-negative (got {})", problem_.duration));
  }
  state_ = State::zero(assembled_.sys, 0.0);
  std::tie(P_, F_) = loads_(0.0);
  initialize(state_, assembled_.sys, P_, F_, problem_.initial);
  energy_ = stored_energy(assembled_.sys, state_);
}

Simulation::~Simulation() = default;

double Simulation::last_residual() const { return stepper_ ? stepper_->last_residual() : 0.0; }

std::pair<Vector, Vector> Simulation::loads(double t) const { return loads_(t); }

void Simulation::advance() {
  if (!stepper_) stepper_ = std::make_unique<NewmarkStepper>(assembled_.sys, problem_.dt);
  const double t1 = static_cast<double>(steps_ + 1) * problem_.dt;
  auto [P1, F1] = loads_(t1);
  State next = stepper_->step(state_, P1, F1);
  next.t = t1;
  energy_ = advance_ledger(energy_, assembled_.sys, state_, next, P_, F_, P1, F1);
  state_ = std::move(next);
  P_ = std::move(P1);
  F_ = std::move(F1);
  ++steps_;
}

void Simulation::run(double t_end, const std::function<void(const Simulation&)>& observer) {
  if (observer && steps_ == 0) observer(*this);
  const auto target = static_cast<long>(std::llround(t_end / problem_.dt));
  while (steps_ < target) {
    advance();
    if (observer) observer(*this);
  }
}

double Simulation::nodal(const Vector& field, int node, int component) const {
  const int k = assembled_.dofs.disp[2 * node + component];
  return k < 0 ? 0.0 : field[k];
}

Point Simulation::flux(const Vector& q, int m, const Point& x) const {
  const auto geom = TriangleGeometry::from(mesh_.vertices(m));
  const auto rt = eval_rt0(geom, mesh_.tri_signs(m), x);
  Point w = Point::Zero();
  const auto& edges = mesh_.tri_edges(m);
  for (int i = 0; i < 3; ++i) {
    const int k = assembled_.dofs.vel[edges[i]];
    if (k >= 0) w += q[k] * rt.value[i];
  }
  return w;
}

int Simulation::resolve_node(const Point& where) const {
  const DofMap& d = assembled_.dofs;
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int node = 0; node < d.num_disp_nodes; ++node) {
    const double dist = (d.node_position(mesh_, node) - where).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = node;
    }
  }
  const double tol = 1e-6 * std::hypot(mesh_.width(), mesh_.height());
  if (best < 0 || best_dist > tol) {
    throw InvalidInput(fmt::format("no displacement node at ({}, {})", where.x(), where.y()));
  }
  return best;
}

Simulation::BoundProbe Simulation::bind(const ProbeSpec& probe) const {
  BoundProbe b{probe.kind, -1, probe.where};
  switch (probe.kind) {
    case ProbeKind::ux:
    case ProbeKind::uy:
    case ProbeKind::vx:
    case ProbeKind::vy: b.index = resolve_node(probe.where); return b;
    default: break;
  }
  b.index = mesh_.find_triangle(probe.where);
  if (b.index < 0) {
    throw InvalidInput(fmt::format("probe '{}' at ({}, {}) is outside the mesh", probe.label, probe.where.x(),
                                   probe.where.y()));
  }
  return b;
}

double Simulation::sample(const BoundProbe& probe) const {
  switch (probe.kind) {
    case ProbeKind::ux: return nodal(state_.u, probe.index, 0);
    case ProbeKind::uy: return nodal(state_.u, probe.index, 1);
    case ProbeKind::vx: return nodal(state_.v, probe.index, 0);
    case ProbeKind::vy: return nodal(state_.v, probe.index, 1);
    case ProbeKind::p: return state_.p[probe.index];
    case ProbeKind::wx: return flux(state_.q, probe.index, probe.where).x();
    case ProbeKind::wy: return flux(state_.q, probe.index, probe.where).y();
  }
  return 0.0;
}

}  // namespace poroflow
