#pragma once

#include <functional>
#include <string>
#include <vector>

#include "poroflow/simulation.hpp"

namespace poroflow {

/// A fully specified example problem with its probes and snapshot times.
struct BenchmarkCase {
  std::string name;
  Problem problem;
  std::vector<ProbeSpec> probes;
  std::vector<double> snapshot_times;
  double surface_load = 0.0;  // Pa, magnitude of the applied step
};

/// Soil column 0.1 m x 10 m, crisscross, 1 x 100 cells, drained loaded top.
/// Default mass is lumped (HRZ, which equals nodal quadrature for P1).
BenchmarkCase column_ex1(ElementKind kind = ElementKind::P1RT0, MassMode mass = MassMode::hinton);

struct BlockOptions {
  double conductivity = 1e-1;  // m/s
  MeshPattern pattern = MeshPattern::crisscross;
  int cells_per_metre = 16;
  double strip_width = 1.0;  // loaded part of the top, from the symmetry axis
  ElementKind kind = ElementKind::P1RT0;
  MassMode mass = MassMode::consistent;
  double duration = 4.0;
};

/// Half of a 4 m x 1 m soil block (symmetry axis on the left) with a partially
/// loaded, partially drained top.
BenchmarkCase block_ex2(const BlockOptions& options = {});

struct BracketOptions {
  ElementKind kind = ElementKind::P1RT0;
  // criss has no spurious pressure modes but fails the inf-sup test
  MeshPattern pattern = MeshPattern::criss;
  int cells = 16;
  double conductivity = 1e-7;  // m/s
  MassMode mass = MassMode::consistent;
  double dt = 1e-2;
  double duration = 4.1;
};

/// 1 m x 1 m cantilever bracket, left side fully fixed, impermeable, top step load.
BenchmarkCase bracket_ex3(const BracketOptions& options = {});

/// Case by name with default options; throws InvalidInput for unknown names.
BenchmarkCase make_case(std::string_view name, ElementKind kind, MassMode mass);

/// Recorded output of one run.
struct RunArtifacts {
  std::vector<std::string> probe_labels;
  std::vector<double> times;
  std::vector<std::vector<double>> probes;  // [step][probe]
  std::vector<EnergyLedger> energy;
  std::vector<double> constraint_residual;
  std::vector<double> velocity_norm;
  std::vector<State> snapshots;  // at the requested snapshot times

  double max_balance_error() const;
  double max_constraint_residual() const;
  /// Probe history by label; throws InvalidInput for unknown labels.
  std::vector<double> series(const std::string& label) const;
};

/// Runs a case to problem.duration. `observer` sees the simulation after every step.
RunArtifacts run(const BenchmarkCase& c, const std::function<void(const Simulation&)>& observer = {});

/// Displacement magnitude profile along the column axis at one time.
struct ColumnProfile {
  double t = 0.0;
  std::vector<double> z;  // increasing
  std::vector<double> u;  // |u_y| at z
};

/// Vertical displacement along the left side (x = 0) of the current state.
ColumnProfile column_profile(const Simulation& sim);

struct WavefrontResult {
  std::vector<double> times;
  std::vector<double> fronts;  // depth coordinate z of the front
  std::vector<double> speeds;  // (height - front) / t, measured from the loaded surface
};

/// Front = lowest z above which |u| stays >= threshold, located by log-linear
/// interpolation between nodes. Throws NumericalError if the wave has not left the surface.
WavefrontResult measure_wavefront(const std::vector<ColumnProfile>& profiles, double height, double threshold);

/// Front-detection threshold as a fraction of the long-term settlement.
inline constexpr double wavefront_threshold = 1e-5;

/// Hysteresis band for counting crossings, as a fraction of the peak detrended amplitude.
inline constexpr double crossing_band = 0.1;

/// Interpolated zero-crossing times of the linearly detrended signal over [t0, t1].
/// A crossing is counted only after the signal leaves the band +-band_fraction*peak
/// on the opposite side, so small numerical chatter does not register.
std::vector<double> zero_crossings(const std::vector<double>& t, const std::vector<double>& values, double t0, double t1,
                                   double band_fraction = crossing_band);

/// Half the crossing rate over [t0, t1]; 0 if fewer than two crossings.
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& values, double t0, double t1,
                          double band_fraction = crossing_band);

/// Sum over steps of the L1 change in the pressure vector, for steps 1..steps.
double pressure_total_variation(const BenchmarkCase& c, InitialConditionMode mode, int steps);

}  // namespace poroflow
