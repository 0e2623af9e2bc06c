// Acceptance run: one PASS/FAIL line per criterion. Criteria listed in
// `documented_failures` are known not to be reproducible here (see README);
// they are still evaluated and reported but do not set the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "poroflow/benchmarks.hpp"
#include "poroflow/errors.hpp"
#include "poroflow/stability.hpp"
#include "poroflow/verification.hpp"

using namespace poroflow;

namespace {

const std::set<int> documented_failures{10, 11};

struct Outcome {
  int id;
  bool passed;
  std::string summary;
};

std::vector<Outcome> outcomes;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, bool passed, const std::string& summary) {
  outcomes.push_back({id, passed, summary});
  const bool known = !passed && documented_failures.count(id);
  fmt::print("criterion {:>2}: {}  {}{}\n", id, passed ? "PASS" : "FAIL", summary,
             known ? "  [known failure, documented]" : "");
  std::fflush(stdout);
}

std::string describe(const Check& c) {
  return fmt::format("{} = {:.4g} ({}){}", c.name, c.value, c.requirement, c.passed ? "" : " not met");
}

MaterialParams example1() { return column_ex1().problem.material; }

void criterion_1() {
  const double c0 = wave_speed(example1());
  report(1, std::abs(c0 - 85.1) <= 0.1, fmt::format("wave speed {:.3f} m/s, expected 85.1 +- 0.1", c0));
}

void criterion_2() {
  const auto c = column_ex1();
  const double dt = cfl_timestep(generate(c.problem.mesh), c.problem.material);
  report(2, std::abs(dt / 8.3e-4 - 1.0) <= 0.02, fmt::format("CFL step {:.4e} s, expected 8.3e-4 s +- 2%", dt));
}

// Criteria 3 to 6 share the column run; 5 and 6 also use the block runs.
void criteria_3_to_6(const CaseReport& column, double column_seconds, const CaseReport& block) {
  const auto& terzaghi = column.check("terzaghi");
  report(3, terzaghi.passed && column_seconds <= 120.0,
         fmt::format("{}, run {:.1f} s of wall time", describe(terzaghi), column_seconds));

  const auto& wave = column.check("wavefront");
  report(4, wave.passed, fmt::format("{}; {}", describe(wave), wave.detail));

  const auto& b1 = column.check("energy_balance");
  const auto& b2 = block.check("energy_balance");
  report(5, b1.passed && b2.passed,
         fmt::format("max balance error: column {:.2e}, block {:.2e} (<= 1e-6)", b1.value, b2.value));

  const auto& c1 = column.check("constraint");
  const auto& c2 = block.check("constraint");
  report(6, c1.passed && c2.passed,
         fmt::format("column: {}; block: {}", c1.detail.empty() ? describe(c1) : c1.detail,
                     c2.detail.empty() ? describe(c2) : c2.detail));
}

void criterion_7() {
  const auto c = column_ex1();
  const double naive = pressure_total_variation(c, InitialConditionMode::naive, 50);
  const double consistent = pressure_total_variation(c, InitialConditionMode::consistent, 50);
  const double ratio = naive / std::max(consistent, 1e-300);
  report(7, ratio >= 10.0,
         fmt::format("pressure total variation over 50 steps: naive {:.4e}, consistent {:.4e}, ratio {:.1f} (>= 10)",
                     naive, consistent, ratio));
}

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<MeshPattern> patterns{MeshPattern::criss, MeshPattern::crisscross, MeshPattern::union_jack};
  const auto table = stability_table({ElementKind::P1RT0, ElementKind::P2RT0}, patterns);
  const double elapsed = seconds_since(t0);

  // columns A (local), B (global), C (inf-sup)
  auto expected = [](ElementKind k, MeshPattern p) -> std::array<bool, 3> {
    if (k == ElementKind::P2RT0) return {true, true, true};
    switch (p) {
      case MeshPattern::criss: return {true, true, false};
      case MeshPattern::crisscross: return {false, false, false};
      case MeshPattern::union_jack: return {true, false, false};
    }
    return {};
  };
  bool ok = elapsed <= 300.0;
  std::string rows;
  for (const auto& r : table) {
    const std::array<bool, 3> got{r.local_modes == 0, r.global_modes == 0, r.verdict == Verdict::passes};
    const auto want = expected(r.kind, r.pattern);
    const bool c_ok = want[2] ? r.verdict == Verdict::passes : r.verdict == Verdict::fails;
    ok = ok && got[0] == want[0] && got[1] == want[1] && c_ok;
    rows += fmt::format(" {}/{}:{}{}{}", to_string(r.kind), to_string(r.pattern), got[0] ? "ok" : "X",
                        got[1] ? "ok" : "X", r.verdict == Verdict::passes ? "ok" : (r.verdict == Verdict::fails ? "X" : "?"));
    if (r.kind == ElementKind::P1RT0 && r.pattern == MeshPattern::crisscross) ok = ok && r.local_modes == 1;
  }
  report(8, ok, fmt::format("stability table{}; {:.1f} s", rows, elapsed));
}

void criterion_9(const CaseReport& bracket) {
  const auto& ratio = bracket.check("checkerboard_ratio");
  const auto& trend = bracket.check("refinement_trend");
  report(9, ratio.passed && trend.passed,
         fmt::format("{} [{}]; refinement trend {} [{}]", describe(ratio), ratio.detail, trend.passed ? "ok" : "not met",
                     trend.detail));
}

void criterion_10() {
  const auto t0 = std::chrono::steady_clock::now();
  auto lobatto = column_ex1(ElementKind::P2RT0, MassMode::lobatto);
  std::string start = "consistent start";
  try {
    Simulation probe(lobatto.problem);
  } catch (const SingularMatrixError& e) {
    // Massless vertices make the consistent start singular; fall back to rest.
    start = fmt::format("consistent start singular ({}), started from rest", e.stage());
    lobatto.problem.initial = InitialConditionMode::zero;
  }
  auto consistent = column_ex1(ElementKind::P2RT0, MassMode::consistent);
  double vmax[2] = {0.0, 0.0};
  int k = 0;
  for (const auto* c : {&lobatto, &consistent}) {
    const auto r = run(*c);
    for (double v : r.velocity_norm) vmax[k] = std::max(vmax[k], std::isfinite(v) ? v : INFINITY);
    ++k;
  }
  const double ratio = vmax[0] / vmax[1];
  report(10, ratio > 1e3,
         fmt::format("P2 over {:g} s: max |v| lobatto {:.4e}, consistent {:.4e}, ratio {:.3g} (> 1e3); {}; {:.0f} s",
                     consistent.problem.duration, vmax[0], vmax[1], ratio, start, seconds_since(t0)));
}

void criterion_11(const CaseReport& block) {
  const auto& damping = block.check("damping_order");
  const auto& freq = block.check("frequency_match");
  report(11, damping.passed && freq.passed,
         fmt::format("{} [{}]; {} [{}]", describe(damping), damping.detail, describe(freq), freq.detail));
}

void criterion_12() {
  const auto c = bracket_ex3({});
  const auto mesh = generate(c.problem.mesh);
  const auto a = assemble(mesh, ElementKind::P1RT0, c.problem.material, c.problem.bc, MassMode::consistent);
  SystemMatrices sys;
  sys.M = a.sys.M;
  sys.K = a.sys.K;
  sys.Mf = SparseMatrix(sys.M.rows(), 0);
  sys.A = SparseMatrix(0, 0);
  sys.Q = SparseMatrix(sys.M.rows(), 0);
  sys.B = SparseMatrix(0, 0);
  const double dt = cfl_timestep(mesh, c.problem.material);
  const NewmarkStepper stepper(sys, dt);

  State s = State::zero(sys);
  s.u = Vector::LinSpaced(sys.n_disp(), -1e-3, 1e-3);
  s.v = Vector::LinSpaced(sys.n_disp(), 1e-2, 0.0);
  const Vector P = Vector::Zero(sys.n_disp()), F = Vector::Zero(0);
  initialize(s, sys, P, F, InitialConditionMode::consistent);
  const double e0 = stored_energy(sys, s).stored();
  double drift = 0.0;
  for (int n = 0; n < 10000; ++n) {
    s = stepper.step(s, P, F);
    drift = std::max(drift, std::abs(stored_energy(sys, s).stored() - e0) / e0);
  }
  report(12, drift <= 1e-10, fmt::format("elastodynamic energy drift over 1e4 steps {:.2e} (<= 1e-10)", drift));
}

}  // namespace

int main() {
  try {
    criterion_1();
    criterion_2();

    auto t0 = std::chrono::steady_clock::now();
    const CaseReport column = verify_column(column_ex1());
    const double column_seconds = seconds_since(t0);
    BlockOptions block_options;
    block_options.duration = 2.0;
    const CaseReport block = verify_block(block_options);
    criteria_3_to_6(column, column_seconds, block);

    criterion_7();
    criterion_8();
    criterion_9(verify_bracket(BracketOptions{}));
    criterion_10();
    criterion_11(block);
    criterion_12();
  } catch (const std::exception& e) {
    fmt::print("acceptance aborted: {}\n", e.what());
    return 1;
  }

  std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  int passed = 0;
  bool unexpected = false;
  for (const auto& o : outcomes) {
    passed += o.passed;
    if (!o.passed && !documented_failures.count(o.id)) unexpected = true;
  }
  fmt::print("{} of {} criteria pass", passed, outcomes.size());
  if (passed != static_cast<int>(outcomes.size())) {
    fmt::print("; failing:");
    for (const auto& o : outcomes) {
      if (!o.passed) fmt::print(" {}{}", o.id, documented_failures.count(o.id) ? " (documented)" : " (UNEXPECTED)");
    }
  }
  fmt::print("\n");
  return unexpected ? 1 : 0;
}
