#include "rayflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace rayflow {

namespace {

struct Item {
  std::string section;
  std::string key;
  std::string value;
  int line;
  int section_ordinal;  // distinguishes repeated [source] blocks
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<Item> tokenize(const std::string& text, const std::string& name) {
  std::vector<Item> items;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0, ordinal = -1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', Err::ConfigError,
              name + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      ++ordinal;
      continue;
    }
    const std::size_t eq = line.find('=');
    require(eq != std::string::npos, Err::ConfigError,
            name + ":" + std::to_string(lineno) + ": expected key = value");
    items.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                     lineno, ordinal});
  }
  return items;
}

double to_double(const Item& it, const std::string& name) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(it.value, &pos);
    require(pos == it.value.size(), Err::ConfigError, "");
    return v;
  } catch (...) {
    fail(Err::ConfigError, name + ":" + std::to_string(it.line) + ": key '" + it.key +
                               "' needs a number, got '" + it.value + "'");
  }
}

int to_int(const Item& it, const std::string& name) {
  const double v = to_double(it, name);
  require(v == std::floor(v), Err::ConfigError,
          name + ":" + std::to_string(it.line) + ": key '" + it.key + "' needs an integer");
  return static_cast<int>(v);
}

bool to_bool(const Item& it, const std::string& name) {
  if (it.value == "on" || it.value == "true" || it.value == "1") return true;
  if (it.value == "off" || it.value == "false" || it.value == "0") return false;
  fail(Err::ConfigError, name + ":" + std::to_string(it.line) + ": key '" + it.key +
                             "' needs on/off");
}

std::vector<double> to_doubles(const Item& it, const std::string& name) {
  std::istringstream in(it.value);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  require(!out.empty() && in.eof(), Err::ConfigError,
          name + ":" + std::to_string(it.line) + ": key '" + it.key +
              "' needs a list of numbers");
  return out;
}

Vec3 to_vec3(const Item& it, const std::string& name) {
  const auto v = to_doubles(it, name);
  require(v.size() == 2 || v.size() == 3, Err::ConfigError,
          name + ":" + std::to_string(it.line) + ": key '" + it.key +
              "' needs 2 or 3 coordinates");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  RunConfig cfg;
  cfg.source_path = name;
  const std::vector<Item> items = tokenize(text, name);

  // Sources are per repeated [source] block.
  std::vector<int> source_ordinals;
  for (const Item& it : items) {
    if (it.section == "source" &&
        std::find(source_ordinals.begin(), source_ordinals.end(), it.section_ordinal) ==
            source_ordinals.end())
      source_ordinals.push_back(it.section_ordinal);
  }
  cfg.sources.resize(source_ordinals.size());

  for (const Item& it : items) {
    const std::string ctx = name + ":" + std::to_string(it.line);
    if (it.section == "geometry") {
      if (it.key == "mesh") cfg.mesh_path = it.value;
      else if (it.key == "unit_square_grid") cfg.unit_square_grid = to_int(it, name);
      else if (it.key == "match_tol") cfg.match_tol = to_double(it, name);
      else if (it.key == "polygon") {
        const auto v = to_doubles(it, name);
        require(v.size() >= 6 && v.size() % 2 == 0, Err::ConfigError,
                ctx + ": polygon needs x y pairs (at least 3)");
        std::vector<Vec2> poly;
        for (std::size_t i = 0; i < v.size(); i += 2) poly.push_back({v[i], v[i + 1]});
        cfg.polygons.push_back(std::move(poly));
      } else
        fail(Err::ConfigError, ctx + ": unknown geometry key '" + it.key + "'");
    } else if (it.section == "physics") {
      if (it.key == "model") {
        if (it.value == "helmholtz") cfg.model = RunConfig::Model::Helmholtz;
        else if (it.value == "biharmonic") cfg.model = RunConfig::Model::Biharmonic;
        else fail(Err::ConfigError, ctx + ": model must be helmholtz or biharmonic");
      } else if (it.key == "c") cfg.c = to_double(it, name);
      else if (it.key == "eta") cfg.eta_explicit = to_double(it, name);
      else if (it.key == "omega") cfg.omega = to_double(it, name);
      else if (it.key == "omega_pi") cfg.omega = to_double(it, name) * kPi;
      else if (it.key == "mu") cfg.mu = to_double(it, name);
      else if (it.key == "mu_pi") cfg.mu = to_double(it, name) * kPi;
      else if (it.key == "hysteretic_loss") cfg.hysteretic_loss = to_double(it, name);
      else if (it.key == "thickness") cfg.thickness = to_double(it, name);
      else if (it.key == "youngs") cfg.youngs = to_double(it, name);
      else if (it.key == "density") cfg.density = to_double(it, name);
      else if (it.key == "poisson") cfg.poisson = to_double(it, name);
      else fail(Err::ConfigError, ctx + ": unknown physics key '" + it.key + "'");
    } else if (it.section == "discretization") {
      if (it.key == "L") cfg.L = to_int(it, name);
      else if (it.key == "offset_directions") cfg.offset_directions = to_bool(it, name);
      else if (it.key == "target_h") cfg.target_h = to_double(it, name);
      else if (it.key == "angles_pi") {
        for (double a : to_doubles(it, name)) cfg.custom_angles.push_back(a * kPi);
      } else
        fail(Err::ConfigError, ctx + ": unknown discretization key '" + it.key + "'");
    } else if (it.section == "source") {
      const std::size_t idx =
          std::find(source_ordinals.begin(), source_ordinals.end(), it.section_ordinal) -
          source_ordinals.begin();
      SourceConfig& src = cfg.sources[idx];
      if (it.key == "type") {
        if (it.value == "line") src.kind = SourceConfig::Kind::Line;
        else if (it.value == "point") src.kind = SourceConfig::Kind::Point;
        else if (it.value == "shell_point") src.kind = SourceConfig::Kind::ShellPoint;
        else fail(Err::ConfigError, ctx + ": source type must be line|point|shell_point");
      } else if (it.key == "theta0_pi") src.theta0 = to_double(it, name) * kPi;
      else if (it.key == "amplitude") src.amplitude = to_double(it, name);
      else if (it.key == "line_point") src.line_point = to_vec3(it, name);
      else if (it.key == "line_dir") src.line_dir = to_vec3(it, name);
      else if (it.key == "position") src.position = to_vec3(it, name);
      else if (it.key == "fluid_density") src.fluid_density = to_double(it, name);
      else fail(Err::ConfigError, ctx + ": unknown source key '" + it.key + "'");
    } else if (it.section == "interfaces") {
      if (it.key == "reflect") cfg.reflect = to_double(it, name);
      else if (it.key == "transmit") cfg.transmit = to_double(it, name);
      else if (it.key == "free_reflect") cfg.free_reflect = to_double(it, name);
      else if (it.key == "curvature_reflections") cfg.curvature_reflections = to_bool(it, name);
      else if (it.key == "ky_max") cfg.ky_max = to_double(it, name);
      else if (it.key == "threshold_angle_pi") cfg.threshold_angle = to_double(it, name) * kPi;
      else if (it.key == "rings") cfg.rings = to_int(it, name);
      else fail(Err::ConfigError, ctx + ": unknown interfaces key '" + it.key + "'");
    } else if (it.section == "solver") {
      if (it.key == "method") {
        if (it.value == "auto") cfg.solver.method = SolveMethod::Auto;
        else if (it.value == "direct") cfg.solver.method = SolveMethod::Direct;
        else if (it.value == "iterative") cfg.solver.method = SolveMethod::Iterative;
        else fail(Err::ConfigError, ctx + ": method must be auto|direct|iterative");
      } else if (it.key == "tol") cfg.solver.tol = to_double(it, name);
      else if (it.key == "max_iter") cfg.solver.max_iter = to_int(it, name);
      else if (it.key == "diag_precondition") cfg.solver.diag_precondition = to_bool(it, name);
      else fail(Err::ConfigError, ctx + ": unknown solver key '" + it.key + "'");
    } else if (it.section == "output") {
      if (it.key == "points") cfg.points = it.value;
      else if (it.key == "out_dir") cfg.out_dir = it.value;
      else if (it.key == "log10") cfg.log10_column = to_bool(it, name);
      else if (it.key == "dump_matrix") cfg.dump_matrix_path = it.value;
      else fail(Err::ConfigError, ctx + ": unknown output key '" + it.key + "'");
    } else if (it.section == "oracle") {
      if (it.key == "kind") cfg.oracle = it.value;
      else if (it.key == "order") cfg.oracle_order = to_int(it, name);
      else fail(Err::ConfigError, ctx + ": unknown oracle key '" + it.key + "'");
    } else {
      fail(Err::ConfigError, ctx + ": unknown section '" + it.section + "'");
    }
  }

  // Structural checks surfaced before any assembly starts.
  int geoms = 0;
  if (!cfg.mesh_path.empty()) ++geoms;
  if (cfg.unit_square_grid > 0) ++geoms;
  if (!cfg.polygons.empty()) ++geoms;
  require(geoms == 1, Err::ConfigError,
          name + ": exactly one of geometry.mesh / unit_square_grid / polygon required");
  require(cfg.L >= 3 || !cfg.custom_angles.empty(), Err::ConfigError,
          name + ": discretization needs L >= 3 or an explicit angle list");
  require(!cfg.sources.empty(), Err::ConfigError, name + ": at least one [source] required");

  const bool damped = cfg.mu > 0.0 || cfg.hysteretic_loss > 0.0;
  const bool absorbing = cfg.free_reflect < 1.0 || (cfg.reflect + cfg.transmit < 1.0);
  require(damped || absorbing, Err::ConfigError,
          name + ": unsolvable configuration; (I - B) is singular without damping "
                 "(mu > 0) or boundary absorption (free_reflect < 1 or R + T < 1)");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Err::ConfigError, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace rayflow
