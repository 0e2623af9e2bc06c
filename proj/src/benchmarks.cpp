#include "poroflow/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "poroflow/errors.hpp"

namespace poroflow {

namespace {

MaterialParams ex1_material() { return {14.516e6, 0.3, 2000.0, 1000.0, 0.33, 1e-2}; }
MaterialParams ex2_material(double kh) { return {14.516e6, 0.3, 2700.0, 1000.0, 0.42, kh}; }
MaterialParams ex3_material(double kh) { return {10e3, 0.4, 2667.0, 1000.0, 0.4, kh}; }

void add(BCSpec& bc, SideRange where, SkeletonCondition sk, FluidCondition fl, Point traction = Point::Zero()) {
  bc.skeleton.push_back({where, sk, traction});
  bc.fluid.push_back({where, fl});
}

}  // namespace

BenchmarkCase column_ex1(ElementKind kind, MassMode mass) {
  BenchmarkCase c;
  c.name = "column_ex1";
  c.surface_load = 3000.0;
  Problem& p = c.problem;
  p.mesh = {0.1, 10.0, 1, 100, MeshPattern::crisscross};
  p.element = kind;
  p.mass = mass;
  p.material = ex1_material();
  for (Side s : {Side::left, Side::right, Side::bottom}) {
    add(p.bc, {s}, SkeletonCondition::normal_fixed, FluidCondition::impermeable);
  }
  add(p.bc, {Side::top}, SkeletonCondition::traction, FluidCondition::drained, Point(0.0, -c.surface_load));
  p.dt = 1e-4;
  p.duration = 8.0;
  c.probes = {
      {"top displacement", ProbeKind::uy, Point(0.0, 10.0)},
      {"top velocity", ProbeKind::vy, Point(0.0, 10.0)},
      {"mid velocity", ProbeKind::vy, Point(0.0, 5.0)},
      {"pressure z=9", ProbeKind::p, Point(0.05, 9.02)},
      {"pressure z=5", ProbeKind::p, Point(0.05, 5.02)},
      {"pressure z=0", ProbeKind::p, Point(0.05, 0.02)},
  };
  c.snapshot_times = {0.025, 0.075, 0.15};
  return c;
}

BenchmarkCase block_ex2(const BlockOptions& o) {
  if (o.cells_per_metre < 1) throw InvalidInput("cells_per_metre must be >= 1");
  if (!(o.strip_width > 0.0 && o.strip_width < 2.0)) throw InvalidInput("strip width must lie in (0, 2) m");
  BenchmarkCase c;
  c.name = "block_ex2";
  c.surface_load = 15e3;
  Problem& p = c.problem;
  p.mesh = {2.0, 1.0, 2 * o.cells_per_metre, o.cells_per_metre, o.pattern};
  p.element = o.kind;
  p.mass = o.mass;
  p.material = ex2_material(o.conductivity);
  for (Side s : {Side::left, Side::right, Side::bottom}) {
    add(p.bc, {s}, SkeletonCondition::normal_fixed, FluidCondition::impermeable);
  }
  add(p.bc, {Side::top, 0.0, o.strip_width}, SkeletonCondition::traction, FluidCondition::impermeable,
      Point(0.0, -c.surface_load));
  add(p.bc, {Side::top, o.strip_width, 2.0}, SkeletonCondition::free, FluidCondition::drained);
  p.dt = 5e-3;
  p.duration = o.duration;
  const double e = 0.25 / o.cells_per_metre;
  c.probes = {
      {"corner 1 displacement", ProbeKind::uy, Point(0.0, 1.0)},
      {"corner 2 displacement", ProbeKind::uy, Point(2.0, 1.0)},
      {"corner 1 velocity", ProbeKind::vy, Point(0.0, 1.0)},
      {"corner 1 darcy velocity", ProbeKind::wy, Point(e, 1.0 - e)},
      {"corner 1 pressure", ProbeKind::p, Point(e, 1.0 - e)},
      {"corner 2 pressure", ProbeKind::p, Point(2.0 - e, 1.0 - e)},
  };
  c.snapshot_times = {0.5, 1.0, 2.0};
  return c;
}

BenchmarkCase bracket_ex3(const BracketOptions& o) {
  if (o.cells < 1) throw InvalidInput("cells must be >= 1");
  BenchmarkCase c;
  c.name = "bracket_ex3";
  c.surface_load = 1000.0;
  Problem& p = c.problem;
  p.mesh = {1.0, 1.0, o.cells, o.cells, o.pattern};
  p.element = o.kind;
  p.mass = o.mass;
  p.material = ex3_material(o.conductivity);
  add(p.bc, {Side::left}, SkeletonCondition::fully_fixed, FluidCondition::impermeable);
  add(p.bc, {Side::right}, SkeletonCondition::free, FluidCondition::impermeable);
  add(p.bc, {Side::bottom}, SkeletonCondition::free, FluidCondition::impermeable);
  add(p.bc, {Side::top}, SkeletonCondition::traction, FluidCondition::impermeable, Point(0.0, -c.surface_load));
  p.dt = o.dt;
  p.duration = o.duration;
  const double e = 0.25 / o.cells;
  c.probes = {
      {"tip displacement", ProbeKind::uy, Point(1.0, 1.0)},
      {"tip velocity", ProbeKind::vy, Point(1.0, 1.0)},
      {"root pressure", ProbeKind::p, Point(e, 1.0 - e)},
  };
  c.snapshot_times = {0.3, 2.5, 4.1};
  return c;
}

BenchmarkCase make_case(std::string_view name, ElementKind kind, MassMode mass) {
  if (name == "column_ex1") return column_ex1(kind, mass);
  if (name == "block_ex2") {
    BlockOptions o;
    o.kind = kind;
    o.mass = mass;
    return block_ex2(o);
  }
  if (name == "bracket_ex3") {
    BracketOptions o;
    o.kind = kind;
    o.mass = mass;
    return bracket_ex3(o);
  }
  throw InvalidInput(fmt::format("unknown benchmark case '{}' (expected column_ex1, block_ex2 or bracket_ex3)", name));
}

double RunArtifacts::max_balance_error() const {
  double m = 0.0;
  for (std::size_t i = 1; i < energy.size(); ++i) m = std::max(m, energy[i].balance_error());
  return m;
}

double RunArtifacts::max_constraint_residual() const {
  double m = 0.0;
  for (double r : constraint_residual) m = std::max(m, r);
  return m;
}

std::vector<double> RunArtifacts::series(const std::string& label) const {
  const auto it = std::find(probe_labels.begin(), probe_labels.end(), label);
  if (it == probe_labels.end()) throw InvalidInput(fmt::format("no probe labelled '{}'", label));
  const auto k = static_cast<std::size_t>(it - probe_labels.begin());
  std::vector<double> out;
  out.reserve(probes.size());
  for (const auto& row : probes) out.push_back(row[k]);
  return out;
}

RunArtifacts run(const BenchmarkCase& c, const std::function<void(const Simulation&)>& observer) {
  RunArtifacts out;
  Simulation sim(c.problem);
  std::vector<Simulation::BoundProbe> bound;
  for (const auto& p : c.probes) {
    out.probe_labels.push_back(p.label);
    bound.push_back(sim.bind(p));
  }
  auto snaps = c.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  const double dt = c.problem.dt;
  sim.run(c.problem.duration, [&](const Simulation& s) {
    const State& st = s.state();
    out.times.push_back(st.t);
    std::vector<double> row;
    row.reserve(bound.size());
    for (const auto& b : bound) row.push_back(s.sample(b));
    out.probes.push_back(std::move(row));
    out.energy.push_back(s.energy());
    out.constraint_residual.push_back(s.steps_taken() > 0 ? constraint_residual(s.system(), st) : 0.0);
    out.velocity_norm.push_back(st.v.norm());
    while (next_snap < snaps.size() && st.t >= snaps[next_snap] - 0.01 * dt) {
      out.snapshots.push_back(st);
      ++next_snap;
    }
    if (observer) observer(s);
  });
  return out;
}

ColumnProfile column_profile(const Simulation& sim) {
  ColumnProfile prof;
  prof.t = sim.state().t;
  const Mesh& mesh = sim.mesh();
  auto nodes = mesh.boundary_nodes(Side::left);
  std::sort(nodes.begin(), nodes.end(), [&](int a, int b) { return mesh.nodes()[a].y() < mesh.nodes()[b].y(); });
  for (int n : nodes) {
    const Point& x = mesh.nodes()[n];
    prof.z.push_back(x.y());
    prof.u.push_back(std::abs(sim.nodal(sim.state().u, sim.resolve_node(x), 1)));
  }
  return prof;
}

WavefrontResult measure_wavefront(const std::vector<ColumnProfile>& profiles, double height, double threshold) {
  if (!(threshold > 0.0)) throw InvalidInput("wavefront threshold must be positive");
  WavefrontResult r;
  for (const auto& p : profiles) {
    if (p.z.size() != p.u.size() || p.z.size() < 2) throw InvalidInput("malformed column profile");
    const int n = static_cast<int>(p.z.size());
    // Walk down from the surface while the signal stays above threshold.
    int k = n - 1;
    while (k > 0 && p.u[k - 1] >= threshold) --k;
    if (k == n - 1 && p.u[k] < threshold) {
      throw NumericalError("wavefront", fmt::format("no displacement above threshold at t = {}", p.t));
    }
    double front = p.z[k];
    if (k > 0 && p.u[k - 1] > 0.0) {
      // Log-linear interpolation between the bracketing nodes.
      const double a = std::log(p.u[k - 1]);
      const double b = std::log(p.u[k]);
      const double w = (std::log(threshold) - a) / (b - a);
      front = p.z[k - 1] + w * (p.z[k] - p.z[k - 1]);
    }
    if (!(front < height)) throw NumericalError("wavefront", fmt::format("wave has not left the surface at t = {}", p.t));
    if (!(p.t > 0.0)) throw InvalidInput("wavefront profile time must be positive");
    r.times.push_back(p.t);
    r.fronts.push_back(front);
    r.speeds.push_back((height - front) / p.t);
  }
  return r;
}

std::vector<double> zero_crossings(const std::vector<double>& t, const std::vector<double>& values, double t0,
                                   double t1, double band_fraction) {
  if (t.size() != values.size()) throw InvalidInput("time and value series differ in length");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t0 && t[i] <= t1) idx.push_back(i);
  }
  std::vector<double> out;
  if (idx.size() < 3) return out;

  // Least-squares line through the window, so slow consolidation drift is not counted.
  double st = 0.0, sv = 0.0;
  for (auto i : idx) {
    st += t[i];
    sv += values[i];
  }
  const double n = static_cast<double>(idx.size());
  const double tm = st / n;
  const double vm = sv / n;
  double stt = 0.0, stv = 0.0;
  for (auto i : idx) {
    stt += (t[i] - tm) * (t[i] - tm);
    stv += (t[i] - tm) * (values[i] - vm);
  }
  const double slope = stt > 0.0 ? stv / stt : 0.0;
  std::vector<double> r;
  r.reserve(idx.size());
  double peak = 0.0;
  for (auto i : idx) {
    r.push_back(values[i] - vm - slope * (t[i] - tm));
    peak = std::max(peak, std::abs(r.back()));
  }
  if (!(peak > 0.0)) return out;

  // Schmitt trigger: a crossing counts once the signal clears the band on the other side.
  const double band = band_fraction * peak;
  int state = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const int s = r[k] > band ? 1 : (r[k] < -band ? -1 : 0);
    if (s == 0 || s == state) continue;
    if (state != 0) {
      // Time where the detrended signal passes zero, between the last opposite-side sample and this one.
      std::size_t j = k;
      while (j > 0 && (r[j - 1] > 0.0) == (r[k] > 0.0)) --j;
      const std::size_t a = j > 0 ? j - 1 : j;
      const double w = r[a] == r[j] ? 0.0 : r[a] / (r[a] - r[j]);
      out.push_back(t[idx[a]] + w * (t[idx[j]] - t[idx[a]]));
    }
    state = s;
  }
  return out;
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& values, double t0, double t1,
                          double band_fraction) {
  const auto z = zero_crossings(t, values, t0, t1, band_fraction);
  if (z.size() < 2) return 0.0;
  // Two crossings per period.
  return 0.5 * static_cast<double>(z.size() - 1) / (z.back() - z.front());
}

double pressure_total_variation(const BenchmarkCase& c, InitialConditionMode mode, int steps) {
  Problem p = c.problem;
  p.initial = mode;
  Simulation sim(p);
  Vector prev = sim.state().p;
  double tv = 0.0;
  for (int n = 0; n < steps; ++n) {
    sim.advance();
    tv += (sim.state().p - prev).lpNorm<1>();
    prev = sim.state().p;
  }
  return tv;
}

}  // namespace poroflow
