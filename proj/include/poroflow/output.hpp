#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "poroflow/benchmarks.hpp"
#include "poroflow/config.hpp"

namespace poroflow {

/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(std::string_view s);

/// Columns: t, one per probe, E_Ks, E_Kf, E_S, E_D, E_In, E_C, balance_error.
void write_timehistory(std::ostream& os, const RunArtifacts& run);

/// One row per triangle: element, x, y (centroid), p, wx, wy (RT0 interpolant at the centroid).
void write_snapshot(std::ostream& os, const Simulation& sim, const State& state);

struct SimulateSummary {
  double dt = 0.0;
  long steps = 0;
  double max_balance_error = 0.0;
  double max_constraint_residual = 0.0;
  std::vector<std::filesystem::path> files;
};

/// Runs a resolved configuration and writes timehistory.csv, snapshot_<k>.csv
/// per snapshot time and manifest.json into `dir` (created if needed).
SimulateSummary simulate_to_directory(const RunConfig& cfg, const std::filesystem::path& dir);

/// JSON echo of the resolved configuration plus run statistics.
std::string manifest_json(const RunConfig& cfg, const SimulateSummary& summary);

}  // namespace poroflow
