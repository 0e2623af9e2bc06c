#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "poroflow/assembly.hpp"
#include "poroflow/mesh.hpp"
#include "poroflow/timestepper.hpp"

namespace poroflow {

/// Everything needed to integrate one boundary-value problem in time.
struct Problem {
  MeshSpec mesh;
  ElementKind element = ElementKind::P1RT0;
  MassMode mass = MassMode::consistent;
  MaterialParams material;
  BCSpec bc;
  double dt = 0.0;
  double duration = 0.0;
  InitialConditionMode initial = InitialConditionMode::consistent;
};

enum class ProbeKind { ux, uy, vx, vy, p, wx, wy };

ProbeKind parse_probe_kind(std::string_view name);
std::string_view to_string(ProbeKind kind);

/// Field sample at a point. Displacement/velocity probes snap to the nearest
/// displacement node; pressure and flux probes use the containing triangle.
struct ProbeSpec {
  std::string label;
  ProbeKind kind = ProbeKind::uy;
  Point where = Point::Zero();
};

/// Time integration of a Problem: assembly, initial conditions, stepping and
/// the energy ledger, with helpers to sample the fields.
class Simulation {
 public:
  explicit Simulation(Problem problem);
  ~Simulation();

  const Problem& problem() const { return problem_; }
  const Mesh& mesh() const { return mesh_; }
  const SystemMatrices& system() const { return assembled_.sys; }
  const DofMap& dofs() const { return assembled_.dofs; }
  const State& state() const { return state_; }
  const EnergyLedger& energy() const { return energy_; }
  long steps_taken() const { return steps_; }
  double last_residual() const;

  /// One time step. Assembles and factors the step matrix on first use.
  void advance();

  /// Steps until t >= t_end (within dt/100), invoking `observer` after every
  /// step and once for the initial state.
  void run(double t_end, const std::function<void(const Simulation&)>& observer = {});

  /// Boundary loads at time t.
  std::pair<Vector, Vector> loads(double t) const;

  /// Value of a displacement node component (0 for constrained DOFs).
  double nodal(const Vector& field, int node, int component) const;
  /// Relative fluid velocity w at x inside triangle m.
  Point flux(const Vector& q, int m, const Point& x) const;

  /// Probe bound to a node (displacement kinds) or triangle (element kinds).
  struct BoundProbe {
    ProbeKind kind = ProbeKind::uy;
    int index = -1;
    Point where = Point::Zero();
  };

  int resolve_node(const Point& where) const;
  /// Throws InvalidInput when the probe location has no node / triangle.
  BoundProbe bind(const ProbeSpec& probe) const;
  double sample(const BoundProbe& probe) const;
  double sample(const ProbeSpec& probe) const { return sample(bind(probe)); }

 private:
  Problem problem_;
  Mesh mesh_;
  Assembled assembled_;
  LoadAssembler loads_;
  std::unique_ptr<NewmarkStepper> stepper_;
  State state_;
  EnergyLedger energy_;
  Vector P_, F_;
  long steps_ = 0;
};

}  // namespace poroflow
