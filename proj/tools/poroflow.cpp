#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "poroflow/config.hpp"
#include "poroflow/errors.hpp"
#include "poroflow/output.hpp"
#include "poroflow/stability.hpp"
#include "poroflow/verification.hpp"

namespace fs = std::filesystem;
using namespace poroflow;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_acceptance = 4;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string file_tag(std::string_view tag) {
  std::string out;
  for (char c : tag) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  return out;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string element;
  std::string mass;
};

int cmd_simulate(const SimulateArgs& a) {
  RunConfig cfg = load_config(a.config);
  if (!a.element.empty()) cfg.problem.element = parse_element(a.element);
  if (!a.mass.empty()) cfg.problem.mass = parse_mass_mode(a.mass);
  resolve(cfg);
  const fs::path dir = !a.out.empty() ? fs::path(a.out) : !cfg.output_dir.empty() ? fs::path(cfg.output_dir) : fs::path("out");
  fmt::print("simulate: {} {} mass, dt = {:.6g} s{}, duration {:g} s\n", to_string(cfg.problem.element),
             to_string(cfg.problem.mass), cfg.problem.dt,
             cfg.auto_cfl ? fmt::format(" (auto-CFL, safety {:g})", cfg.cfl_safety) : "", cfg.problem.duration);
  const SimulateSummary s = simulate_to_directory(cfg, dir);
  fmt::print("{} steps, max balance error {:.3e}, max constraint residual {:.3e}\n", s.steps, s.max_balance_error,
             s.max_constraint_residual);
  for (const auto& f : s.files) fmt::print("wrote {}\n", f.string());
  return exit_ok;
}

struct InfsupArgs {
  std::vector<std::string> elements{"p1rt0", "p2rt0"};
  std::vector<std::string> patterns{"criss", "crisscross", "unionjack"};
  std::vector<int> levels{1, 2, 4, 8, 16};
  std::string out = "infsup";
};

int cmd_infsup(const InfsupArgs& a) {
  std::vector<ElementKind> kinds;
  for (const auto& e : a.elements) kinds.push_back(parse_element(e));
  std::vector<MeshPattern> patterns;
  for (const auto& p : a.patterns) patterns.push_back(parse_pattern(p));
  for (int n : a.levels) {
    if (n < 1) throw InvalidInput(fmt::format("levels must be >= 1 (got {})", n));
  }
  const auto reports = stability_table(kinds, patterns, a.levels);
  write_table_text(std::cout, reports);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "infsup_table.txt");
    write_table_text(out, reports);
  }
  {
    auto out = open_out(dir / "infsup_table.csv");
    write_table_csv(out, reports);
  }
  auto out = open_out(dir / "infsup_eigenvalues.csv");
  write_levels_csv(out, reports);
  fmt::print("wrote {}/infsup_table.txt, infsup_table.csv, infsup_eigenvalues.csv\n", dir.string());
  return exit_ok;
}

struct BenchmarkArgs {
  std::string name;
  std::string element = "p1rt0";
  std::string mass;
  std::string out;
};

int cmd_benchmark(const BenchmarkArgs& a) {
  const ElementKind kind = parse_element(a.element);
  // Example 1 defaults to the lumped mass it is reported with; the others to consistent mass.
  const MassMode mass = !a.mass.empty() ? parse_mass_mode(a.mass)
                                        : (a.name == "column_ex1" ? MassMode::hinton : MassMode::consistent);
  const CaseReport report = verify_case(a.name, kind, mass);

  const fs::path dir = a.out.empty() ? fs::path("benchmark_" + a.name) : fs::path(a.out);
  fs::create_directories(dir);
  nlohmann::json verdict;
  verdict["case"] = report.name;
  verdict["element"] = to_string(kind);
  verdict["mass"] = to_string(mass);
  verdict["passed"] = report.passed();
  nlohmann::json checks = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"status", c.passed ? "pass" : "fail"},
                      {"value", c.value},
                      {"requirement", c.requirement},
                      {"detail", c.detail}});
    summary.push_back(fmt::format("{}: {}", c.name, c.passed ? "pass" : "fail"));
    fmt::print("{}: {}  ({:.6g}; {}){}\n", c.name, c.passed ? "pass" : "FAIL", c.value, c.requirement,
               c.detail.empty() ? "" : "  " + c.detail);
  }
  verdict["checks"] = checks;
  verdict["summary"] = summary;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [tag, run] : report.runs) {
    const std::string name = fmt::format("timehistory_{}.csv", file_tag(tag));
    auto out = open_out(dir / name);
    write_timehistory(out, run);
    files.push_back(name);
  }
  verdict["files"] = files;
  {
    auto out = open_out(dir / "verdict.json");
    out << verdict.dump(2) << '\n';
  }
  fmt::print("{}: {} (verdict in {})\n", report.name, report.passed() ? "all checks pass" : "some checks FAIL",
             (dir / "verdict.json").string());
  return report.passed() ? exit_ok : exit_acceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poroflow: dynamic poroelasticity with P1/P2 skeleton and RT0 fluid elements"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run one configuration and write CSV histories and snapshots");
  s->add_option("--config", sim.config, "INI run configuration")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sim.out, "output directory (default: [output] directory, else ./out)");
  s->add_option("--element", sim.element, "override element: p1rt0 | p2rt0");
  s->add_option("--mass", sim.mass, "override mass: consistent | lobatto | hinton");

  InfsupArgs inf;
  auto* i = app.add_subcommand("infsup", "spurious-mode counts and inf-sup test on the square bracket");
  i->add_option("--element", inf.elements, "element kinds (p1rt0, p2rt0)")->delimiter(',');
  i->add_option("--pattern", inf.patterns, "mesh patterns (criss, crisscross, unionjack)")->delimiter(',');
  i->add_option("--levels", inf.levels, "macroelements per side, e.g. 1,2,4,8,16")->delimiter(',');
  i->add_option("--out", inf.out, "output directory");

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "run a named example and evaluate its acceptance checks");
  b->add_option("case", bench.name, "column_ex1 | block_ex2 | bracket_ex3")->required();
  b->add_option("--element", bench.element, "p1rt0 | p2rt0 (ignored by bracket_ex3, which runs both)");
  b->add_option("--mass", bench.mass, "consistent | lobatto | hinton");
  b->add_option("--out", bench.out, "output directory (default ./benchmark_<case>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim);
    if (i->parsed()) return cmd_infsup(inf);
    if (b->parsed()) return cmd_benchmark(bench);
  } catch (const SingularMatrixError& e) {
    fmt::print(std::cerr, "error [{}]: {} (unknown {})\n", e.stage(), e.what(), e.dof());
    return exit_numerical;
  } catch (const NumericalError& e) {
    fmt::print(std::cerr, "error [{}]: {}\n", e.stage(), e.what());
    return exit_numerical;
  } catch (const InvalidInput& e) {
    fmt::print(std::cerr, "error [config]: {}\n", e.what());
    return exit_config;
  } catch (const fs::filesystem_error& e) {
    fmt::print(std::cerr, "error [output]: {}\n", e.what());
    return exit_config;
  }
  return exit_config;
}
