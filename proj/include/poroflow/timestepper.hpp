#pragma once

#include <optional>

#include "poroflow/assembly.hpp"
#include "poroflow/linsolve.hpp"

namespace poroflow {

/// Kinematic and pressure state at one time level.
/// u: skeleton displacement, v/a: its first/second time derivatives,
/// q: relative fluid velocity (edge flux coefficients), qdot: its rate,
/// p: elemental pressure.
struct State {
  double t = 0.0;
  Vector u, v, a;
  Vector q, qdot;
  Vector p;

  static State zero(const SystemMatrices& sys, double t = 0.0);
};

/// consistent: accelerations and pressure from the momentum, Darcy and
/// differentiated constraint equations. naive: p = 0, accelerations from the
/// momentum and Darcy equations alone. zero: accelerations and pressure zero.
enum class InitialConditionMode { consistent, naive, zero };

InitialConditionMode parse_ic_mode(std::string_view name);
std::string_view to_string(InitialConditionMode mode);

/// Completes `s` (given u, v, q) with accelerations and pressure per `mode`.
void initialize(State& s, const SystemMatrices& sys, const Vector& P, const Vector& F,
                InitialConditionMode mode);

/// Cumulative energy account. Stored energies are evaluated from the current
/// state; dissipated, input and constraint work are accumulated per step.
struct EnergyLedger {
  double kinetic_skeleton = 0.0;
  double kinetic_fluid = 0.0;
  double strain = 0.0;
  double dissipated = 0.0;
  double input = 0.0;
  double constraint = 0.0;

  double stored() const { return kinetic_skeleton + kinetic_fluid + strain; }
  /// |stored + dissipated - input| / max(input, floor).
  double balance_error(double floor = 1e-300) const;
};

/// Stored-energy terms of `s` (dissipated/input/constraint left at zero).
EnergyLedger stored_energy(const SystemMatrices& sys, const State& s);

/// Ledger after the step s0 -> s1 with boundary loads (P0,F0) at s0.t and (P1,F1) at s1.t.
EnergyLedger advance_ledger(const EnergyLedger& prev, const SystemMatrices& sys, const State& s0,
                            const State& s1, const Vector& P0, const Vector& F0, const Vector& P1,
                            const Vector& F1);

/// Constant-average-acceleration integrator for the coupled index-2 system.
/// The symmetric step matrix is built and factored once.
class NewmarkStepper {
 public:
  NewmarkStepper(const SystemMatrices& sys, double dt);

  double dt() const { return dt_; }
  const SparseMatrix& step_matrix() const { return matrix_; }
  double pivot_ratio() const { return lu_.pivot_ratio(); }

  /// Advances s by dt with boundary loads evaluated at s.t + dt.
  State step(const State& s, const Vector& P1, const Vector& F1) const;

  /// Relative residual of the last linear solve.
  double last_residual() const { return last_residual_; }

 private:
  const SystemMatrices* sys_;
  double dt_;
  SparseMatrix matrix_;
  Factorization lu_;
  mutable double last_residual_ = 0.0;
};

/// Slow dilatational wave speed sqrt((lambda + 2G) / (rho - rho_f (2 - 1/n_f))).
/// Throws InvalidInput when the effective density is not positive.
double wave_speed(const MaterialParams& mat);

/// CFL step: shortest edge length / wave speed, times `safety`.
double cfl_timestep(const Mesh& mesh, const MaterialParams& mat, double safety = 1.0);

/// Long-term one-dimensional settlement f L / (lambda + 2G) of a column under surface load f.
double drained_settlement(const MaterialParams& mat, double load, double height);

/// ||Q^T v + B^T q|| relative to || |Q|^T |v| + |B|^T |q| ||, the size of the
/// cancelling terms (0 when the velocities vanish).
double constraint_residual(const SystemMatrices& sys, const State& s);

}  // namespace poroflow
