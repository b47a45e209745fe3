#include "thinspectra/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "thinspectra/errors.hpp"

namespace thinspectra {

namespace pt = boost::property_tree;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void config_error(std::string_view key, std::string_view what) {
  throw Error(ErrorCode::ConfigError, fmt::format("{}: {}", key, what));
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"geometry", {"dim", "omega"}},
      {"regime", {"kind", "q"}},
      {"schedule", {"r0", "rho", "first", "count"}},
      {"study", {"K"}},
      {"mesh", {"min_cells", "exponent_offset", "max_cells", "grading_ratio", "grade_to_r"}},
      {"solver", {"block_size", "tol", "max_iter", "seed", "subspace"}},
      {"tolerances", {"final_relative_error", "window", "bound_slack"}},
      {"output", {"dir", "emit_svg"}},
  };
  return keys;
}

}  // namespace

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    config_error(key, fmt::format("'{}' is not a number", text));
  }
  return v;
}

int parse_int(std::string_view text, std::string_view key) {
  text = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    config_error(key, fmt::format("'{}' is not an integer", text));
  }
  return v;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  config_error(key, fmt::format("'{}' is not a boolean", text));
}

OmegaSpec parse_omega(int dim, std::string_view text, std::string_view key) {
  text = trim(text);
  if (text.empty()) config_error(key, "required");
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) config_error(key, fmt::format("expected two comma-separated numbers, got '{}'", text));
  const double a = parse_double(text.substr(0, comma), key);
  const double b = parse_double(text.substr(comma + 1), key);
  if (dim == 2) return Interval{a, b};
  if (dim == 3) return Rect{a, b};
  config_error("dim", fmt::format("{} is not 2 or 3", dim));
}

RegimeSpec parse_regime(std::string_view kind, double q, std::string_view key) {
  kind = trim(kind);
  if (kind == "finite") {
    if (!(q > 0.0)) config_error("q", fmt::format("finite regime needs q > 0, got {}", q));
    return RegimeSpec::finite(q);
  }
  if (kind == "zero") return RegimeSpec::zero();
  if (kind == "infinite") return RegimeSpec::infinite();
  config_error(key, fmt::format("unknown regime '{}' (finite|zero|infinite)", kind));
}

StudyConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, fmt::format("line {}: {}", e.line(), e.message()));
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.empty()) config_error(section, "unknown section");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) config_error(section + "." + key, "unknown key");
    }
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  };

  StudyConfig c;
  if (auto v = get("geometry.dim")) c.dim = parse_int(*v, "geometry.dim");
  if (c.dim != 2 && c.dim != 3) config_error("geometry.dim", fmt::format("{} is not 2 or 3", c.dim));
  const auto omega = get("geometry.omega");
  if (!omega) config_error("geometry.omega", "required");
  c.omega = parse_omega(c.dim, *omega, "geometry.omega");

  double q = 1.0;
  if (auto v = get("regime.q")) q = parse_double(*v, "regime.q");
  c.regime = parse_regime(get("regime.kind").value_or("finite"), q, "regime.kind");

  if (auto v = get("schedule.r0")) c.r0 = parse_double(*v, "schedule.r0");
  if (auto v = get("schedule.rho")) c.rho = parse_double(*v, "schedule.rho");
  if (auto v = get("schedule.first")) c.first = parse_int(*v, "schedule.first");
  if (auto v = get("schedule.count")) c.count = parse_int(*v, "schedule.count");
  if (c.count < 1) config_error("schedule.count", fmt::format("{} must be >= 1", c.count));
  if (!(c.r0 > 0.0 && c.r0 <= 1.0)) config_error("schedule.r0", "must lie in (0,1]");
  if (!(c.rho > 0.0 && c.rho < 1.0)) config_error("schedule.rho", "must lie in (0,1)");
  if (c.first < 0) config_error("schedule.first", "must be >= 0");

  if (auto v = get("study.K")) c.K = parse_int(*v, "study.K");
  if (c.K < 1) config_error("study.K", "must be >= 1");

  if (auto v = get("mesh.min_cells")) c.mesh.min_cells = parse_int(*v, "mesh.min_cells");
  if (auto v = get("mesh.exponent_offset")) c.mesh.exponent_offset = parse_int(*v, "mesh.exponent_offset");
  if (auto v = get("mesh.max_cells")) c.mesh.max_cells = parse_int(*v, "mesh.max_cells");
  if (auto v = get("mesh.grading_ratio")) c.mesh.grading_ratio = parse_double(*v, "mesh.grading_ratio");
  if (auto v = get("mesh.grade_to_r")) c.mesh.grade_to_r = parse_bool(*v, "mesh.grade_to_r");
  if (c.mesh.min_cells < 1) config_error("mesh.min_cells", "must be >= 1");
  if (!(c.mesh.grading_ratio > 0.0 && c.mesh.grading_ratio <= 1.0)) config_error("mesh.grading_ratio", "must lie in (0,1]");

  if (auto v = get("solver.block_size")) c.solver.block_size = parse_int(*v, "solver.block_size");
  if (auto v = get("solver.tol")) c.solver.tol = parse_double(*v, "solver.tol");
  if (auto v = get("solver.max_iter")) c.solver.max_iter = parse_int(*v, "solver.max_iter");
  if (auto v = get("solver.seed")) {
    std::uint64_t s = 0;
    const std::string_view t = trim(*v);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), s);
    if (ec != std::errc() || ptr != t.data() + t.size()) config_error("solver.seed", "not an unsigned integer");
    c.solver.seed = s;
  }
  if (auto v = get("solver.subspace")) c.solver.subspace = parse_int(*v, "solver.subspace");
  if (c.solver.block_size < 1) config_error("solver.block_size", "must be >= 1");
  if (!(c.solver.tol > 0.0)) config_error("solver.tol", "must be positive");
  if (c.solver.max_iter < 1) config_error("solver.max_iter", "must be >= 1");

  if (auto v = get("tolerances.final_relative_error")) {
    c.tolerances.final_relative_error = parse_double(*v, "tolerances.final_relative_error");
  }
  if (auto v = get("tolerances.window")) c.tolerances.window = parse_double(*v, "tolerances.window");
  if (auto v = get("tolerances.bound_slack")) c.tolerances.bound_slack = parse_double(*v, "tolerances.bound_slack");

  if (auto v = get("output.dir")) c.output_dir = std::string(trim(*v));
  if (auto v = get("output.emit_svg")) c.emit_svg = parse_bool(*v, "output.emit_svg");
  return c;
}

StudyConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("config", fmt::format("cannot open '{}'", path));
  return parse_config(in);
}

std::string serialize_config(const StudyConfig& c) {
  std::string out;
  auto line = [&](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  out += "[geometry]\n";
  line("dim", c.dim);
  if (const auto* iv = std::get_if<Interval>(&c.omega)) {
    line("omega", fmt::format("{},{}", iv->c, iv->d));
  } else {
    const Rect& rc = std::get<Rect>(c.omega);
    line("omega", fmt::format("{},{}", rc.half_width, rc.half_height));
  }
  out += "\n[regime]\n";
  line("kind", to_string(c.regime.kind));
  line("q", c.regime.q);
  out += "\n[schedule]\n";
  line("r0", c.r0);
  line("rho", c.rho);
  line("first", c.first);
  line("count", c.count);
  out += "\n[study]\n";
  line("K", c.K);
  out += "\n[mesh]\n";
  line("min_cells", c.mesh.min_cells);
  line("exponent_offset", c.mesh.exponent_offset);
  line("max_cells", c.mesh.max_cells);
  line("grading_ratio", c.mesh.grading_ratio);
  line("grade_to_r", c.mesh.grade_to_r);
  out += "\n[solver]\n";
  line("block_size", c.solver.block_size);
  line("tol", c.solver.tol);
  line("max_iter", c.solver.max_iter);
  line("seed", c.solver.seed);
  line("subspace", c.solver.subspace);
  out += "\n[tolerances]\n";
  line("final_relative_error", c.tolerances.final_relative_error);
  line("window", c.tolerances.window);
  line("bound_slack", c.tolerances.bound_slack);
  out += "\n[output]\n";
  line("dir", c.output_dir);
  line("emit_svg", c.emit_svg);
  return out;
}

}  // namespace thinspectra
