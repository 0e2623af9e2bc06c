#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poroflow/benchmarks.hpp"

namespace poroflow {

/// One quantitative check against a threshold.
struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string requirement;  // human-readable threshold
  std::string detail;
};

/// Checks for one benchmark case plus the runs they were computed from.
struct CaseReport {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, RunArtifacts>> runs;  // tag, artifacts

  bool passed() const;
  const Check& check(std::string_view name) const;  // throws InvalidInput if absent
};

inline constexpr double balance_tolerance = 1e-6;
inline constexpr double constraint_tolerance = 1e-9;

/// Settlement, wavefront speeds and threshold sensitivity, energy balance, constraint.
CaseReport verify_column(const BenchmarkCase& c);

/// Runs the block at K_h = 1e-1 and 1e-4 (other options from `base`) plus the
/// coarse criss / fine crisscross pair at K_h = 1e-4. Dissipation ordering,
/// frequency agreement, phase opposition, mesh sensitivity, balance, constraint.
CaseReport verify_block(const BlockOptions& base);

/// P1RT0 against P2RT0 on `base` and on a mesh with half the cells:
/// checkerboard ratio at the snapshot times and the refinement trend.
CaseReport verify_bracket(const BracketOptions& base);

/// Case by name with default options; `kind`/`mass` apply where the case uses them.
CaseReport verify_case(std::string_view name, ElementKind kind, MassMode mass);

/// Balance and constraint checks over a set of runs, named with `suffix`.
void add_conservation_checks(CaseReport& report, const std::string& suffix);

/// Pearson correlation of two series over the samples with t in [t0, t1].
double correlation(const std::vector<double>& t, const std::vector<double>& a, const std::vector<double>& b, double t0,
                   double t1);

/// Index of the sample closest to time t.
std::size_t sample_at(const std::vector<double>& times, double t);

}  // namespace poroflow
