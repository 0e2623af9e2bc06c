#include "poroflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "poroflow/errors.hpp"
#include "poroflow/parallel.hpp"
#include "poroflow/stability.hpp"

namespace poroflow {

namespace {

Check make(std::string name, bool passed, double value, std::string requirement, std::string detail = {}) {
  return {std::move(name), passed, value, std::move(requirement), std::move(detail)};
}

double rms_detrended(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1) {
  double st = 0.0, sv = 0.0, n = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    st += t[i];
    sv += v[i];
    n += 1.0;
  }
  if (n < 3.0) return 0.0;
  const double tm = st / n, vm = sv / n;
  double stt = 0.0, stv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    stt += (t[i] - tm) * (t[i] - tm);
    stv += (t[i] - tm) * (v[i] - vm);
  }
  const double slope = stt > 0.0 ? stv / stt : 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    const double r = v[i] - vm - slope * (t[i] - tm);
    ss += r * r;
  }
  return std::sqrt(ss / n);
}

}  // namespace

bool CaseReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check& CaseReport::check(std::string_view n) const {
  for (const auto& c : checks) {
    if (c.name == n) return c;
  }
  throw InvalidInput(fmt::format("report '{}' has no check '{}'", name, n));
}

std::size_t sample_at(const std::vector<double>& times, double t) {
  if (times.empty()) throw InvalidInput("empty time series");
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return best;
}

double correlation(const std::vector<double>& t, const std::vector<double>& a, const std::vector<double>& b, double t0,
                   double t1) {
  if (t.size() != a.size() || t.size() != b.size()) throw InvalidInput("series differ in length");
  double n = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    n += 1.0;
    sa += a[i];
    sb += b[i];
  }
  if (n < 2.0) throw InvalidInput("correlation window holds fewer than two samples");
  const double ma = sa / n, mb = sb / n;
  double cab = 0.0, caa = 0.0, cbb = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || t[i] > t1) continue;
    cab += (a[i] - ma) * (b[i] - mb);
    caa += (a[i] - ma) * (a[i] - ma);
    cbb += (b[i] - mb) * (b[i] - mb);
  }
  if (caa == 0.0 || cbb == 0.0) return 0.0;
  return cab / std::sqrt(caa * cbb);
}

void add_conservation_checks(CaseReport& report, const std::string& suffix) {
  double balance = 0.0, residual = 0.0, work = 0.0;
  for (const auto& [tag, run] : report.runs) {
    balance = std::max(balance, run.max_balance_error());
    residual = std::max(residual, run.max_constraint_residual());
    for (const auto& e : run.energy) {
      if (e.input > 0.0) work = std::max(work, std::abs(e.constraint) / e.input);
    }
  }
  report.checks.push_back(make("energy_balance" + suffix, balance <= balance_tolerance, balance,
                               fmt::format("max relative balance error <= {:g}", balance_tolerance)));
  report.checks.push_back(make("constraint" + suffix, residual <= constraint_tolerance && work <= constraint_tolerance,
                               std::max(residual, work),
                               fmt::format("max constraint residual and |E_C|/E_In <= {:g}", constraint_tolerance),
                               fmt::format("residual {:.3e}, constraint work ratio {:.3e}", residual, work)));
}

CaseReport verify_column(const BenchmarkCase& c) {
  CaseReport report;
  report.name = c.name;
  const double height = c.problem.mesh.height;
  auto snaps = c.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::vector<ColumnProfile> profiles;
  std::size_t next = 0;
  RunArtifacts run = poroflow::run(c, [&](const Simulation& sim) {
    while (next < snaps.size() && sim.state().t >= snaps[next] - 0.01 * c.problem.dt) {
      profiles.push_back(column_profile(sim));
      ++next;
    }
  });

  const double settlement = drained_settlement(c.problem.material, c.surface_load, height);
  const double top = std::abs(run.series("top displacement").back());
  const double rel = std::abs(top - settlement) / settlement;
  report.checks.push_back(make("terzaghi", rel <= 0.05, rel, "|u_top(end) - fL/(lambda+2G)| / settlement <= 0.05",
                               fmt::format("top {:.6e} m vs drained settlement {:.6e} m at t = {:g} s", top,
                                           settlement, run.times.back())));

  try {
    const auto wf = measure_wavefront(profiles, height, wavefront_threshold * settlement);
    bool ok = wf.speeds.size() >= 2;
    std::string speeds;
    for (std::size_t i = 0; i < wf.speeds.size(); ++i) {
      ok = ok && wf.speeds[i] >= 50.0 && wf.speeds[i] <= 95.0;
      if (i > 0) ok = ok && wf.speeds[i] < wf.speeds[i - 1];
      speeds += fmt::format("{}{:.1f}", i ? "/" : "", wf.speeds[i]);
    }
    report.checks.push_back(make("wavefront", ok, wf.speeds.front(), "window speeds in [50, 95] m/s, decreasing",
                                 fmt::format("speeds {} m/s", speeds)));
    const double first = wf.speeds.front();
    report.checks.push_back(make("wavefront_first_window", first >= 80.0 && first <= 95.0, first,
                                 "first window speed in [80, 95] m/s"));
    const auto half = measure_wavefront(profiles, height, 0.5 * wavefront_threshold * settlement);
    const double change = std::abs(half.speeds.front() - first) / first;
    report.checks.push_back(make("wavefront_threshold_sensitivity", change < 0.10, change,
                                 "halving the threshold moves the first speed by < 10%",
                                 fmt::format("{:.2f} vs {:.2f} m/s", first, half.speeds.front())));
  } catch (const NumericalError& e) {
    report.checks.push_back(make("wavefront", false, 0.0, "window speeds in [50, 95] m/s, decreasing", e.what()));
  }

  report.runs.emplace_back(to_string(c.problem.element), std::move(run));
  add_conservation_checks(report, "");
  return report;
}

CaseReport verify_block(const BlockOptions& base) {
  CaseReport report;
  report.name = "block_ex2";
  constexpr double t_check = 2.0;
  if (base.duration < t_check) throw InvalidInput("block verification needs a duration of at least 2 s");

  struct Variant {
    std::string tag;
    BlockOptions options;
  };
  std::vector<Variant> variants;
  BlockOptions high = base, low = base, coarse = base, fine = base;
  high.conductivity = 1e-1;
  low.conductivity = 1e-4;
  coarse.conductivity = fine.conductivity = 1e-4;
  coarse.pattern = MeshPattern::criss;
  coarse.cells_per_metre = 4;
  fine.pattern = MeshPattern::crisscross;
  fine.cells_per_metre = 16;
  coarse.duration = fine.duration = t_check;
  variants = {{"kh=1e-1", high}, {"kh=1e-4", low}, {"kh=1e-4 criss N=4", coarse}, {"kh=1e-4 crisscross N=16", fine}};

  std::vector<RunArtifacts> runs(variants.size());
  parallel_for(variants.size(), [&](std::size_t i) { runs[i] = run(block_ex2(variants[i].options)); });

  const auto& rh = runs[0];
  const auto& rl = runs[1];
  const double ed_high = rh.energy[sample_at(rh.times, t_check)].dissipated;
  const double ed_low = rl.energy[sample_at(rl.times, t_check)].dissipated;
  report.checks.push_back(make("damping_order", ed_high > ed_low, ed_high / ed_low,
                               "E_D(t=2 s) larger for K_h = 1e-1 than for 1e-4",
                               fmt::format("E_D {:.4e} J vs {:.4e} J", ed_high, ed_low)));

  const std::string probe = "corner 1 displacement";
  const double f_high = dominant_frequency(rh.times, rh.series(probe), 0.0, t_check);
  const double f_low = dominant_frequency(rl.times, rl.series(probe), 0.0, t_check);
  const double fdiff = std::abs(f_high - f_low) / std::max(f_high, f_low);
  report.checks.push_back(make("frequency_match", fdiff <= 0.10, fdiff,
                               "zero-crossing frequencies over 0-2 s agree within 10%",
                               fmt::format("{:.2f} Hz (K_h=1e-1) vs {:.2f} Hz (K_h=1e-4)", f_high, f_low)));

  // One oscillation period of the low-conductivity response, ending at t_check.
  const double period = f_low > 0.0 ? 1.0 / f_low : t_check;
  const double corr = correlation(rl.times, rl.series("corner 1 velocity"), rl.series("corner 1 darcy velocity"),
                                  t_check - period, t_check);
  report.checks.push_back(make("phase_opposition", corr < 0.0, corr,
                               "skeleton and Darcy velocity at the loaded corner anti-correlated (K_h = 1e-4)",
                               fmt::format("correlation over [{:.3f}, {:.3f}] s", t_check - period, t_check)));

  const auto& rc = runs[2];
  const auto& rf = runs[3];
  const double frac_coarse = rc.energy.back().dissipated / rc.energy.back().input;
  const double frac_fine = rf.energy.back().dissipated / rf.energy.back().input;
  report.checks.push_back(make("mesh_sensitivity_damping", frac_coarse > 1.1 * frac_fine, frac_coarse / frac_fine,
                               "E_D/E_In at 2 s: coarse criss exceeds fine crisscross by > 10%",
                               fmt::format("{:.4f} vs {:.4f}", frac_coarse, frac_fine)));
  const auto uf = rf.series(probe);
  const double early = rms_detrended(rf.times, uf, 0.0, 0.5);
  const double late = rms_detrended(rf.times, uf, t_check - 0.5, t_check);
  report.checks.push_back(make("mesh_sensitivity_persistence", late >= 0.5 * early, late / early,
                               "fine crisscross oscillation RMS over the last 0.5 s >= half the first 0.5 s"));

  for (std::size_t i = 0; i < variants.size(); ++i) report.runs.emplace_back(variants[i].tag, std::move(runs[i]));
  add_conservation_checks(report, "");
  return report;
}

CaseReport verify_bracket(const BracketOptions& base) {
  CaseReport report;
  report.name = "bracket_ex3";
  if (base.cells < 2 || base.cells % 2) throw InvalidInput("bracket verification needs an even cell count >= 2");

  struct Variant {
    std::string tag;
    BracketOptions options;
  };
  std::vector<Variant> variants;
  for (ElementKind kind : {ElementKind::P1RT0, ElementKind::P2RT0}) {
    for (int cells : {base.cells, base.cells / 2}) {
      BracketOptions o = base;
      o.kind = kind;
      o.cells = cells;
      variants.push_back({fmt::format("{} N={}", to_string(kind), cells), o});
    }
  }
  std::vector<RunArtifacts> runs(variants.size());
  std::vector<std::vector<double>> index(variants.size());
  parallel_for(variants.size(), [&](std::size_t i) {
    const BenchmarkCase c = bracket_ex3(variants[i].options);
    runs[i] = run(c);
    const Mesh mesh = generate(c.problem.mesh);
    for (const auto& s : runs[i].snapshots) index[i].push_back(checkerboard_metric(mesh, s.p));
  });

  // variants: 0 P1 fine, 1 P1 coarse, 2 P2 fine, 3 P2 coarse
  const std::vector<double> times = bracket_ex3(base).snapshot_times;
  if (index[0].size() != times.size() || index[2].size() != times.size()) {
    throw NumericalError("bracket", "missing pressure snapshots");
  }
  double worst = std::numeric_limits<double>::infinity();
  std::string ratios;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double r = index[0][k] / index[2][k];
    worst = std::min(worst, r);
    ratios += fmt::format("{}t={:g}s: {:.1f}", k ? ", " : "", times[k], r);
  }
  report.checks.push_back(make("checkerboard_ratio", worst >= 10.0, worst,
                               "P1RT0 / P2RT0 checkerboard index >= 10 at every snapshot", ratios));

  bool p2_decays = true, p1_persists = true;
  std::string trend;
  for (std::size_t k = 0; k < times.size(); ++k) {
    p2_decays = p2_decays && index[2][k] < index[3][k];
    p1_persists = p1_persists && index[0][k] >= index[1][k];
    trend += fmt::format("{}t={:g}s: P1 {:.3g}->{:.3g}, P2 {:.3g}->{:.3g}", k ? "; " : "", times[k], index[1][k],
                         index[0][k], index[3][k], index[2][k]);
  }
  report.checks.push_back(make("refinement_trend", p2_decays && p1_persists, 0.0,
                               "halving h lowers the P2RT0 index and does not lower the P1RT0 index", trend));

  for (std::size_t i = 0; i < variants.size(); ++i) report.runs.emplace_back(variants[i].tag, std::move(runs[i]));
  add_conservation_checks(report, "");
  return report;
}

CaseReport verify_case(std::string_view name, ElementKind kind, MassMode mass) {
  if (name == "column_ex1") return verify_column(column_ex1(kind, mass));
  if (name == "block_ex2") {
    BlockOptions o;
    o.kind = kind;
    o.mass = mass;
    o.duration = 2.0;
    return verify_block(o);
  }
  if (name == "bracket_ex3") {
    BracketOptions o;
    o.mass = mass;
    return verify_bracket(o);
  }
  throw InvalidInput(fmt::format("unknown benchmark case '{}' (expected column_ex1, block_ex2 or bracket_ex3)", name));
}

}  // namespace poroflow
