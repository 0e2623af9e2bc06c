#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "poroflow/simulation.hpp"

namespace poroflow {

enum class Dimension { none, length, time, pressure, density, velocity, acceleration };

/// Parses "<number> <unit>" into SI, e.g. "3 kN/m2" -> 3000. Dimensionless
/// quantities take a bare number. Throws InvalidInput on a missing or wrong unit.
double parse_quantity(std::string_view text, Dimension dim);

/// Whitespace/comma separated numbers followed by one unit, e.g. "0.3 2.5 4.1 s".
std::vector<double> parse_quantity_list(std::string_view text, Dimension dim);

/// A fully resolved simulate run.
struct RunConfig {
  Problem problem;
  bool auto_cfl = false;
  double cfl_safety = 1.0;  // (0, 1], only with auto_cfl
  std::vector<ProbeSpec> probes;
  std::vector<double> snapshot_times;
  std::string output_dir;  // empty unless given in the file
  std::string origin;      // file name, for messages
};

/// INI layout:
///   [mesh] width height nx ny pattern
///   [model] element mass initial
///   [material] youngs_modulus poisson solid_density fluid_density porosity conductivity gravity
///   [time] dt (quantity or "auto-cfl") cfl_safety duration
///   [bc.<side>] or [bc.<side>.<tag>]: skeleton traction_x traction_y fluid pressure
///        from to history rise_time table_times table_values
///   [probe.<tag>] label kind x y
///   [output] snapshots directory
/// Unknown sections or keys are errors. Comments take whole lines (';' or '#').
/// Throws InvalidInput.
RunConfig parse_config(std::istream& in, std::string_view origin = "<config>");
RunConfig load_config(const std::string& path);

/// Replaces an auto-CFL time step with safety * h_min / C0 on the configured mesh.
void resolve(RunConfig& cfg);

}  // namespace poroflow
