#include "poroflow/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "poroflow/errors.hpp"

namespace poroflow {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::string_view to_string(SkeletonCondition c) {
  switch (c) {
    case SkeletonCondition::free: return "free";
    case SkeletonCondition::normal_fixed: return "normal_fixed";
    case SkeletonCondition::fully_fixed: return "fully_fixed";
    case SkeletonCondition::traction: return "traction";
  }
  return "?";
}

json range_json(const SideRange& r) {
  json j = {{"side", to_string(r.side)}};
  if (std::isfinite(r.from)) j["from_m"] = r.from;
  if (std::isfinite(r.to)) j["to_m"] = r.to;
  return j;
}

json history_json(const LoadHistory& h) {
  switch (h.kind) {
    case LoadHistory::Kind::step: return {{"kind", "step"}};
    case LoadHistory::Kind::ramp: return {{"kind", "ramp"}, {"rise_time_s", h.rise_time}};
    case LoadHistory::Kind::table: {
      json samples = json::array();
      for (const auto& [t, v] : h.samples) samples.push_back({t, v});
      return {{"kind", "table"}, {"samples_s_factor", samples}};
    }
  }
  return {};
}

}  // namespace

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_timehistory(std::ostream& os, const RunArtifacts& run) {
  os << "t";
  for (const auto& label : run.probe_labels) os << ',' << csv_field(label);
  os << ",E_Ks,E_Kf,E_S,E_D,E_In,E_C,balance_error\n";
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const EnergyLedger& e = run.energy[i];
    fmt::print(os, "{:.15g}", run.times[i]);
    for (double v : run.probes[i]) fmt::print(os, ",{:.15g}", v);
    fmt::print(os, ",{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g}\n", e.kinetic_skeleton, e.kinetic_fluid,
               e.strain, e.dissipated, e.input, e.constraint, i == 0 ? 0.0 : e.balance_error());
  }
}

void write_snapshot(std::ostream& os, const Simulation& sim, const State& state) {
  const Mesh& mesh = sim.mesh();
  os << "element,x,y,p,wx,wy\n";
  for (std::size_t m = 0; m < mesh.num_triangles(); ++m) {
    const Point c = mesh.centroid(m);
    const Point w = sim.flux(state.q, static_cast<int>(m), c);
    fmt::print(os, "{},{:.15g},{:.15g},{:.15g},{:.15g},{:.15g}\n", m, c.x(), c.y(), state.p[static_cast<Eigen::Index>(m)],
               w.x(), w.y());
  }
}

SimulateSummary simulate_to_directory(const RunConfig& cfg, const std::filesystem::path& dir) {
  if (cfg.auto_cfl && !(cfg.problem.dt > 0.0)) throw InvalidInput("auto-CFL time step has not been resolved");
  if (!(cfg.problem.dt > 0.0)) throw InvalidInput("time step must be positive");

  BenchmarkCase c;
  c.name = "simulate";
  c.problem = cfg.problem;
  c.probes = cfg.probes;
  c.snapshot_times = cfg.snapshot_times;

  SimulateSummary summary;
  summary.dt = cfg.problem.dt;

  auto times = cfg.snapshot_times;
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (t < 0.0 || t > cfg.problem.duration + 0.01 * summary.dt) {
      throw InvalidInput(fmt::format("snapshot time {} s lies outside [0, {}] s", t, cfg.problem.duration));
    }
  }
  std::filesystem::create_directories(dir);
  std::size_t next = 0;
  const auto observer = [&](const Simulation& sim) {
    const double t = sim.state().t;
    while (next < times.size() && t >= times[next] - 0.01 * summary.dt) {
      const auto path = dir / fmt::format("snapshot_{}.csv", next);
      auto out = open_out(path);
      write_snapshot(out, sim, sim.state());
      summary.files.push_back(path);
      ++next;
    }
  };
  const RunArtifacts run = poroflow::run(c, observer);
  summary.steps = static_cast<long>(run.times.size()) - 1;
  summary.max_balance_error = run.max_balance_error();
  summary.max_constraint_residual = run.max_constraint_residual();

  const auto th = dir / "timehistory.csv";
  {
    auto out = open_out(th);
    write_timehistory(out, run);
  }
  summary.files.insert(summary.files.begin(), th);

  const auto manifest = dir / "manifest.json";
  summary.files.push_back(manifest);
  auto out = open_out(manifest);
  out << manifest_json(cfg, summary) << '\n';
  return summary;
}

std::string manifest_json(const RunConfig& cfg, const SimulateSummary& summary) {
  const Problem& p = cfg.problem;
  const MaterialParams& m = p.material;
  json j;
  j["config"] = cfg.origin;
  j["mesh"] = {{"width_m", p.mesh.width},
               {"height_m", p.mesh.height},
               {"nx", p.mesh.nx},
               {"ny", p.mesh.ny},
               {"pattern", to_string(p.mesh.pattern)}};
  j["model"] = {{"element", to_string(p.element)}, {"mass", to_string(p.mass)}, {"initial", to_string(p.initial)}};
  j["material"] = {{"youngs_modulus_Pa", m.youngs_modulus}, {"poisson", m.poisson},
                   {"solid_density_kg_m3", m.solid_density}, {"fluid_density_kg_m3", m.fluid_density},
                   {"porosity", m.porosity}, {"conductivity_m_s", m.conductivity},
                   {"gravity_m_s2", m.gravity}};
  j["time"] = {{"dt_s", summary.dt},
               {"auto_cfl", cfg.auto_cfl},
               {"duration_s", p.duration},
               {"steps", summary.steps}};
  if (cfg.auto_cfl) j["time"]["cfl_safety"] = cfg.cfl_safety;
  json bc = json::array();
  for (std::size_t i = 0; i < p.bc.skeleton.size(); ++i) {
    const auto& s = p.bc.skeleton[i];
    json e = {{"where", range_json(s.where)}, {"skeleton", to_string(s.condition)}};
    if (s.condition == SkeletonCondition::traction) {
      e["traction_Pa"] = {s.traction.x(), s.traction.y()};
      e["skeleton_history"] = history_json(s.history);
    }
    if (i < p.bc.fluid.size()) {
      const auto& f = p.bc.fluid[i];
      e["fluid"] = f.condition == FluidCondition::drained ? "drained" : "impermeable";
      if (f.condition == FluidCondition::drained) {
        e["pressure_Pa"] = f.pressure;
        e["fluid_history"] = history_json(f.history);
      }
    }
    bc.push_back(e);
  }
  j["boundary"] = bc;
  json probes = json::array();
  for (const auto& pr : cfg.probes) {
    probes.push_back({{"label", pr.label}, {"kind", to_string(pr.kind)}, {"x_m", pr.where.x()}, {"y_m", pr.where.y()}});
  }
  j["probes"] = probes;
  j["snapshot_times_s"] = cfg.snapshot_times;
  j["results"] = {{"max_balance_error", summary.max_balance_error},
                  {"max_constraint_residual", summary.max_constraint_residual}};
  json files = json::array();
  for (const auto& f : summary.files) files.push_back(f.filename().string());
  j["files"] = files;
  return j.dump(2);
}

}  // namespace poroflow
