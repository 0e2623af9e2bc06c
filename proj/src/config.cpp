#include "poroflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "poroflow/errors.hpp"

namespace poroflow {

namespace {

namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string normalize_unit(std::string_view u) {
  std::string out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto c = static_cast<unsigned char>(u[i]);
    if (c == '^' || std::isspace(c)) continue;
    // UTF-8 superscript two and three
    if (c == 0xC2 && i + 1 < u.size()) {
      const auto d = static_cast<unsigned char>(u[i + 1]);
      if (d == 0xB2 || d == 0xB3) {
        out += d == 0xB2 ? '2' : '3';
        ++i;
        continue;
      }
    }
    out += static_cast<char>(c);
  }
  return out;
}

const std::map<std::string, double>& units(Dimension dim) {
  static const std::map<Dimension, std::map<std::string, double>> table = {
      {Dimension::none, {{"", 1.0}}},
      {Dimension::length, {{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"km", 1e3}}},
      {Dimension::time, {{"s", 1.0}, {"ms", 1e-3}}},
      {Dimension::pressure,
       {{"Pa", 1.0}, {"N/m2", 1.0}, {"kPa", 1e3}, {"kN/m2", 1e3}, {"MPa", 1e6}, {"MN/m2", 1e6}, {"GPa", 1e9}}},
      {Dimension::density, {{"kg/m3", 1.0}, {"g/cm3", 1e3}, {"t/m3", 1e3}}},
      {Dimension::velocity, {{"m/s", 1.0}, {"cm/s", 1e-2}, {"mm/s", 1e-3}}},
      {Dimension::acceleration, {{"m/s2", 1.0}}},
  };
  return table.at(dim);
}

std::string_view dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::none: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::pressure: return "pressure";
    case Dimension::density: return "density";
    case Dimension::velocity: return "velocity";
    case Dimension::acceleration: return "acceleration";
  }
  return "?";
}

double unit_factor(std::string_view unit, Dimension dim, std::string_view text) {
  const auto& table = units(dim);
  const auto it = table.find(normalize_unit(unit));
  if (it != table.end()) return it->second;
  if (dim != Dimension::none && trim(unit).empty()) {
    throw InvalidInput(fmt::format("'{}' needs a {} unit", text, dimension_name(dim)));
  }
  std::string known;
  for (const auto& [name, f] : table) known += (known.empty() ? "" : ", ") + (name.empty() ? "<none>" : name);
  throw InvalidInput(fmt::format("'{}': unit '{}' is not a {} unit (accepted: {})", text, trim(unit),
                                 dimension_name(dim), known));
}

// Reads one number from the front of s; advances s past it.
double take_number(std::string_view& s, std::string_view text) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr == s.data()) throw InvalidInput(fmt::format("'{}' is not a number", text));
  s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
  return v;
}

bool starts_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return false;
  const char c = s.front();
  return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Access to one INI section that tracks which keys were consumed.
class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  bool has(const std::string& key) const { return tree_.find(key) != tree_.not_found(); }

  std::string text(const std::string& key) {
    const auto it = tree_.find(key);
    if (it == tree_.not_found()) throw InvalidInput(fmt::format("[{}] is missing '{}'", name_, key));
    used_.insert(key);
    return std::string(trim(it->second.data()));
  }
  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  double quantity(const std::string& key, Dimension dim) { return wrap(key, [&] { return parse_quantity(text(key), dim); }); }
  double quantity(const std::string& key, Dimension dim, double fallback) {
    return has(key) ? quantity(key, dim) : fallback;
  }

  int integer(const std::string& key) {
    return wrap(key, [&] {
      const std::string s = text(key);
      int v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidInput(fmt::format("'{}' is not an integer", s));
      return v;
    });
  }

  template <class Fn>
  auto wrap(const std::string& key, Fn&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const InvalidInput& e) {
      throw InvalidInput(fmt::format("[{}] {}: {}", name_, key, e.what()));
    }
  }

  void finish() const {
    for (const auto& [key, value] : tree_) {
      if (!used_.count(key)) throw InvalidInput(fmt::format("[{}] has unknown key '{}'", name_, key));
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

SkeletonCondition parse_skeleton(std::string_view s) {
  if (s == "free") return SkeletonCondition::free;
  if (s == "normal_fixed" || s == "roller") return SkeletonCondition::normal_fixed;
  if (s == "fully_fixed" || s == "fixed") return SkeletonCondition::fully_fixed;
  if (s == "traction") return SkeletonCondition::traction;
  throw InvalidInput(fmt::format("unknown skeleton condition '{}' (free, normal_fixed, fully_fixed, traction)", s));
}

FluidCondition parse_fluid(std::string_view s) {
  if (s == "impermeable") return FluidCondition::impermeable;
  if (s == "drained") return FluidCondition::drained;
  throw InvalidInput(fmt::format("unknown fluid condition '{}' (impermeable, drained)", s));
}

LoadHistory parse_history(Section& sec) {
  const std::string kind = sec.text("history", "step");
  if (kind == "step") return LoadHistory::step();
  if (kind == "ramp") return LoadHistory::ramp(sec.quantity("rise_time", Dimension::time));
  if (kind == "table") {
    const auto times = sec.wrap("table_times", [&] { return parse_quantity_list(sec.text("table_times"), Dimension::time); });
    const auto values =
        sec.wrap("table_values", [&] { return parse_quantity_list(sec.text("table_values"), Dimension::none); });
    if (times.size() != values.size()) {
      throw InvalidInput(fmt::format("[{}] table_times and table_values differ in length", sec.name()));
    }
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < times.size(); ++i) samples.emplace_back(times[i], values[i]);
    return sec.wrap("table_times", [&] { return LoadHistory::table(std::move(samples)); });
  }
  throw InvalidInput(fmt::format("[{}] unknown history '{}' (step, ramp, table)", sec.name(), kind));
}

void parse_bc(Section& sec, Side side, BCSpec& bc) {
  SideRange where{side};
  where.from = sec.quantity("from", Dimension::length, where.from);
  where.to = sec.quantity("to", Dimension::length, where.to);
  if (!(where.from < where.to)) throw InvalidInput(fmt::format("[{}] needs from < to", sec.name()));
  const LoadHistory history = parse_history(sec);

  SkeletonSegment sk;
  sk.where = where;
  sk.condition = sec.wrap("skeleton", [&] { return parse_skeleton(sec.text("skeleton")); });
  if (sk.condition == SkeletonCondition::traction) {
    sk.traction = Point(sec.quantity("traction_x", Dimension::pressure, 0.0),
                        sec.quantity("traction_y", Dimension::pressure, 0.0));
    sk.history = history;
  }
  FluidSegment fl;
  fl.where = where;
  fl.condition = sec.wrap("fluid", [&] { return parse_fluid(sec.text("fluid")); });
  if (fl.condition == FluidCondition::drained) {
    fl.pressure = sec.quantity("pressure", Dimension::pressure, 0.0);
    fl.history = history;
  }
  bc.skeleton.push_back(sk);
  bc.fluid.push_back(fl);
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim) {
  std::string_view s = text;
  const double v = take_number(s, text);
  return v * unit_factor(s, dim, text);
}

std::vector<double> parse_quantity_list(std::string_view text, Dimension dim) {
  std::vector<double> values;
  std::string_view s = text;
  for (;;) {
    s = trim(s);
    if (!s.empty() && s.front() == ',') s.remove_prefix(1);
    if (!starts_number(s)) break;
    values.push_back(take_number(s, text));
  }
  if (values.empty()) throw InvalidInput(fmt::format("'{}' holds no numbers", text));
  const double f = unit_factor(s, dim, text);
  for (double& v : values) v *= f;
  return values;
}

RunConfig parse_config(std::istream& in, std::string_view origin) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidInput(fmt::format("{}: line {}: {}", origin, e.line(), e.message()));
  }

  RunConfig cfg;
  cfg.origin = std::string(origin);
  Problem& p = cfg.problem;
  bool have_mesh = false, have_material = false, have_time = false;

  try {
    for (const auto& [name, body] : tree) {
      if (!body.data().empty() && body.empty()) {
        throw InvalidInput(fmt::format("key '{}' appears outside any section", name));
      }
      Section sec(name, body);
      const std::string_view n = name;
      if (n == "mesh") {
        have_mesh = true;
        p.mesh.width = sec.quantity("width", Dimension::length);
        p.mesh.height = sec.quantity("height", Dimension::length);
        p.mesh.nx = sec.integer("nx");
        p.mesh.ny = sec.integer("ny");
        p.mesh.pattern = sec.wrap("pattern", [&] { return parse_pattern(sec.text("pattern")); });
      } else if (n == "model") {
        p.element = sec.wrap("element", [&] { return parse_element(lower(sec.text("element", "p1rt0"))); });
        p.mass = sec.wrap("mass", [&] { return parse_mass_mode(lower(sec.text("mass", "consistent"))); });
        p.initial = sec.wrap("initial", [&] { return parse_ic_mode(lower(sec.text("initial", "consistent"))); });
      } else if (n == "material") {
        have_material = true;
        MaterialParams& m = p.material;
        m.youngs_modulus = sec.quantity("youngs_modulus", Dimension::pressure);
        m.poisson = sec.quantity("poisson", Dimension::none);
        m.solid_density = sec.quantity("solid_density", Dimension::density);
        m.fluid_density = sec.quantity("fluid_density", Dimension::density);
        m.porosity = sec.quantity("porosity", Dimension::none);
        m.conductivity = sec.quantity("conductivity", Dimension::velocity);
        m.gravity = sec.quantity("gravity", Dimension::acceleration, m.gravity);
      } else if (n == "time") {
        have_time = true;
        const std::string dt = lower(sec.text("dt"));
        if (dt == "auto-cfl" || dt == "auto_cfl" || dt == "auto") {
          cfg.auto_cfl = true;
          cfg.cfl_safety = sec.quantity("cfl_safety", Dimension::none, 1.0);
          if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) {
            throw InvalidInput(fmt::format("[time] cfl_safety must lie in (0, 1] (got {})", cfg.cfl_safety));
          }
        } else {
          p.dt = sec.wrap("dt", [&] { return parse_quantity(dt, Dimension::time); });
          if (!(p.dt > 0.0)) throw InvalidInput(fmt::format("[time] dt must be positive (got {})", p.dt));
        }
        p.duration = sec.quantity("duration", Dimension::time);
        if (!(p.duration >= 0.0)) throw InvalidInput("[time] duration must be non-negative");
      } else if (n.rfind("bc.", 0) == 0) {
        const auto rest = n.substr(3);
        const auto dot = rest.find('.');
        const Side side = sec.wrap("section name", [&] { return parse_side(rest.substr(0, dot)); });
        parse_bc(sec, side, p.bc);
      } else if (n.rfind("probe.", 0) == 0) {
        ProbeSpec probe;
        probe.label = sec.text("label", std::string(n.substr(6)));
        probe.kind = sec.wrap("kind", [&] { return parse_probe_kind(sec.text("kind")); });
        probe.where = Point(sec.quantity("x", Dimension::length), sec.quantity("y", Dimension::length));
        for (const auto& other : cfg.probes) {
          if (other.label == probe.label) throw InvalidInput(fmt::format("duplicate probe label '{}'", probe.label));
        }
        cfg.probes.push_back(probe);
      } else if (n == "output") {
        if (sec.has("snapshots")) {
          cfg.snapshot_times =
              sec.wrap("snapshots", [&] { return parse_quantity_list(sec.text("snapshots"), Dimension::time); });
        }
        cfg.output_dir = sec.text("directory", "");
      } else {
        throw InvalidInput(fmt::format("unknown section [{}]", name));
      }
      sec.finish();
    }
    if (!have_mesh) throw InvalidInput("missing [mesh] section");
    if (!have_material) throw InvalidInput("missing [material] section");
    if (!have_time) throw InvalidInput("missing [time] section");
    if (p.bc.skeleton.empty()) throw InvalidInput("no [bc.<side>] sections");
    p.material.validate();
  } catch (const InvalidInput& e) {
    throw InvalidInput(fmt::format("{}: {}", origin, e.what()));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(fmt::format("cannot open config '{}'", path));
  return parse_config(in, path);
}

void resolve(RunConfig& cfg) {
  if (!cfg.auto_cfl) return;
  const Mesh mesh = generate(cfg.problem.mesh);
  cfg.problem.dt = cfl_timestep(mesh, cfg.problem.material, cfg.cfl_safety);
}

}  // namespace poroflow
