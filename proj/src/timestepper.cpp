#include "poroflow/timestepper.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace poroflow {

State State::zero(const SystemMatrices& sys, double t) {
  State s;
  s.t = t;
  s.u = s.v = s.a = Vector::Zero(sys.n_disp());
  s.q = s.qdot = Vector::Zero(sys.n_vel());
  s.p = Vector::Zero(sys.n_pres());
  return s;
}

InitialConditionMode parse_ic_mode(std::string_view name) {
  if (name == "consistent") return InitialConditionMode::consistent;
  if (name == "naive") return InitialConditionMode::naive;
  if (name == "zero") return InitialConditionMode::zero;
  throw InvalidInput(fmt::format("unknown initial-condition mode '{}'", name));
}

std::string_view to_string(InitialConditionMode mode) {
  switch (mode) {
    case InitialConditionMode::consistent: return "consistent";
    case InitialConditionMode::naive: return "naive";
    case InitialConditionMode::zero: return "zero";
  }
  return "?";
}

void initialize(State& s, const SystemMatrices& sys, const Vector& P, const Vector& F,
                InitialConditionMode mode) {
  if (mode == InitialConditionMode::zero) {
    s.a = Vector::Zero(sys.n_disp());
    s.qdot = Vector::Zero(sys.n_vel());
    s.p = Vector::Zero(sys.n_pres());
    return;
  }
  const int nu = sys.n_disp();
  const int nq = sys.n_vel();
  const int np = sys.n_pres();
  SaddleSystem blocks{sys.M, sys.Mf, sys.A, sys.Q, sys.B};
  if (mode == InitialConditionMode::naive) {
    blocks.Qbar = SparseMatrix(nu, 0);
    blocks.Bbar = SparseMatrix(nq, 0);
  }
  Factorization lu = factor(blocks, "initial_conditions");
  Vector rhs = Vector::Zero(nu + nq + np);
  rhs.head(nu) = P - sys.K * s.u;
  if (nq > 0) rhs.segment(nu, nq) = F - sys.darcy_damping * (sys.A * s.q);
  const Vector x = lu.solve(rhs.head(lu.size()));
  s.a = x.head(nu);
  s.qdot = x.segment(nu, nq);
  s.p = mode == InitialConditionMode::naive ? Vector::Zero(np) : Vector(x.tail(np));
}

double EnergyLedger::balance_error(double floor) const {
  const double lhs = kinetic_skeleton + kinetic_fluid + strain + dissipated;
  return std::abs(lhs - input) / std::max(std::abs(input), floor);
}

EnergyLedger stored_energy(const SystemMatrices& sys, const State& s) {
  EnergyLedger e;
  e.kinetic_skeleton = 0.5 * s.v.dot(sys.M * s.v);
  if (sys.n_vel() > 0) e.kinetic_fluid = s.v.dot(sys.Mf * s.q) + 0.5 * s.q.dot(sys.A * s.q);
  e.strain = 0.5 * s.u.dot(sys.K * s.u);
  return e;
}

EnergyLedger advance_ledger(const EnergyLedger& prev, const SystemMatrices& sys, const State& s0,
                            const State& s1, const Vector& P0, const Vector& F0, const Vector& P1,
                            const Vector& F1) {
  const double dt = s1.t - s0.t;
  EnergyLedger e = stored_energy(sys, s1);
  const Vector vsum = s1.v + s0.v;
  double input = vsum.dot(P1 + P0);
  double dissipated = 0.0;
  Vector flux = sys.Q.transpose() * vsum;
  if (sys.n_vel() > 0) {
    const Vector qsum = s1.q + s0.q;
    input += qsum.dot(F1 + F0);
    dissipated = 0.25 * sys.darcy_damping * dt * qsum.dot(sys.A * qsum);
    flux += sys.B.transpose() * qsum;
  }
  e.input = prev.input + 0.25 * dt * input;
  e.dissipated = prev.dissipated + dissipated;
  e.constraint = prev.constraint - 0.5 * dt * flux.dot(0.5 * (s0.p + s1.p));
  return e;
}

NewmarkStepper::NewmarkStepper(const SystemMatrices& sys, double dt)
    : sys_(&sys),
      dt_(dt),
      matrix_(SaddleSystem{SparseMatrix(sys.M + (0.25 * dt * dt) * sys.K), sys.Mf,
                           SparseMatrix((1.0 + 0.5 * dt * sys.darcy_damping) * sys.A),
                           SparseMatrix((0.5 * dt) * sys.Q), SparseMatrix((0.5 * dt) * sys.B)}
                  .assemble()),
      lu_(matrix_, "time_step") {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput(fmt::format("time step must be positive (got {})", dt));
}

State NewmarkStepper::step(const State& s, const Vector& P1, const Vector& F1) const {
  const SystemMatrices& sys = *sys_;
  const double h = 0.5 * dt_;
  const int nu = sys.n_disp();
  const int nq = sys.n_vel();
  const int np = sys.n_pres();

  const Vector ut = s.u + h * s.v;
  const Vector at = -(s.a + s.v / h);
  const Vector qt = -(s.qdot + s.q / h);

  Vector rhs = Vector::Zero(nu + nq + np);
  Vector Mat = sys.M * at;
  if (nq > 0) Mat += sys.Mf * qt;
  rhs.head(nu) = h * (P1 - Mat - sys.K * ut);
  if (nq > 0) rhs.segment(nu, nq) = h * (F1 - sys.Mf.transpose() * at - sys.A * qt);

  const Vector x = lu_.solve(rhs);
  last_residual_ = relative_residual(matrix_, x, rhs);
  if (!x.allFinite()) throw NumericalError("time_step", fmt::format("non-finite solution at t = {}", s.t + dt_));

  State n;
  n.t = s.t + dt_;
  n.v = x.head(nu);
  n.q = x.segment(nu, nq);
  n.p = x.tail(np);
  n.u = ut + h * n.v;
  n.a = at + n.v / h;
  n.qdot = qt + n.q / h;
  return n;
}

double wave_speed(const MaterialParams& mat) {
  const double effective = mat.density() - mat.fluid_density * (2.0 - 1.0 / mat.porosity);
  if (!(effective > 0.0)) {
    throw InvalidInput(fmt::format("effective wave density {} kg/m3 is not positive", effective));
  }
  return std::sqrt(mat.constrained_modulus() / effective);
}

double cfl_timestep(const Mesh& mesh, const MaterialParams& mat, double safety) {
  return safety * mesh.min_edge_length() / wave_speed(mat);
}

double drained_settlement(const MaterialParams& mat, double load, double height) {
  return load * height / mat.constrained_modulus();
}

double constraint_residual(const SystemMatrices& sys, const State& s) {
  Vector r = sys.Q.transpose() * s.v;
  // Componentwise operand magnitudes: the size of the terms that cancel.
  Vector scale = sys.Q.cwiseAbs().transpose() * s.v.cwiseAbs();
  if (sys.n_vel() > 0) {
    r += sys.B.transpose() * s.q;
    scale += sys.B.cwiseAbs().transpose() * s.q.cwiseAbs();
  }
  const double d = scale.norm();
  return d > 0.0 ? r.norm() / d : 0.0;
}

}  // namespace poroflow
