#include "dronegame/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <variant>

namespace dronegame {

namespace {

using json = nlohmann::json;

using ParamRef = std::variant<double ModelParams::*, int ModelParams::*, bool ModelParams::*>;

const std::vector<std::pair<std::string, ParamRef>>& param_fields() {
  static const std::vector<std::pair<std::string, ParamRef>> fields = {
      {"alpha", &ModelParams::alpha},
      {"beta0", &ModelParams::beta0},
      {"beta1", &ModelParams::beta1},
      {"d0", &ModelParams::d0},
      {"d1", &ModelParams::d1},
      {"eta", &ModelParams::eta},
      {"horizon_T", &ModelParams::horizon_T},
      {"dt", &ModelParams::dt},
      {"control_period", &ModelParams::control_period},
      {"relaxation_a", &ModelParams::relaxation_a},
      {"eps", &ModelParams::eps},
      {"max_iters", &ModelParams::max_iters},
      {"arrival_radius", &ModelParams::arrival_radius},
      {"braking_time", &ModelParams::braking_time},
      {"d_min", &ModelParams::d_min},
      {"warm_start", &ModelParams::warm_start},
  };
  return fields;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {
      {"R", "d0"}, {"T", "horizon_T"}, {"a", "relaxation_a"}};
  return a;
}

const std::vector<std::string> kScenarioKeys = {"scenario", "n_total", "per_group",
                                                "perturbation", "v0", "t_max"};

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(text) +
                      "'");
  }
  return v;
}

long long parse_int(std::string_view key, std::string_view text) {
  long long v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("'" + std::string(key) + "' expects true or false, got '" +
                    std::string(text) + "'");
}

std::string canonical_key(std::string_view key) {
  const auto it = aliases().find(std::string(key));
  return it == aliases().end() ? std::string(key) : it->second;
}

const ParamRef* find_param(const std::string& key) {
  for (const auto& [name, ref] : param_fields()) {
    if (name == key) return &ref;
  }
  return nullptr;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string(what) + " must be an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string axis_name(Axis a) { return a == Axis::X ? "x" : a == Axis::Y ? "y" : "z"; }

Axis axis_from(const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw ConfigError("cross-section axis must be x, y or z, got '" + s + "'");
}

// Shortest decimal that round-trips, so files are stable across runs.
std::string num(double v) {
  v += 0.0;  // no "-0"
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::vector<std::string> override_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, ref] : param_fields()) keys.push_back(name);
  for (const auto& [alias, target] : aliases()) keys.push_back(alias);
  keys.insert(keys.end(), kScenarioKeys.begin(), kScenarioKeys.end());
  return keys;
}

void apply_override(RunConfig& config, std::string_view raw_key, std::string_view value) {
  const std::string key = canonical_key(raw_key);
  if (const ParamRef* ref = find_param(key)) {
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(config.params.*member)>;
          if constexpr (std::is_same_v<T, double>) {
            config.params.*member = parse_double(key, value);
          } else if constexpr (std::is_same_v<T, int>) {
            config.params.*member = static_cast<int>(parse_int(key, value));
          } else {
            config.params.*member = parse_bool(key, value);
          }
        },
        *ref);
    return;
  }
  ScenarioSelector& s = config.scenario;
  if (key == "scenario") {
    s.name = std::string(value);
  } else if (key == "n_total") {
    s.n_total = static_cast<int>(parse_int(key, value));
  } else if (key == "per_group") {
    s.per_group = parse_bool(key, value);
  } else if (key == "perturbation") {
    s.perturbation = parse_double(key, value);
  } else if (key == "v0") {
    s.v0 = parse_double(key, value);
  } else if (key == "t_max") {
    s.t_max = parse_double(key, value);
  } else {
    throw ConfigError("unknown parameter '" + std::string(raw_key) + "'");
  }
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override must look like key=value, got '" + std::string(assignment) + "'");
  }
  apply_override(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

json to_json(const ModelParams& p) {
  json j = json::object();
  for (const auto& [name, ref] : param_fields()) {
    std::visit([&](auto member) { j[name] = p.*member; }, ref);
  }
  return j;
}

ModelParams params_from_json(const json& j, ModelParams base) {
  if (!j.is_object()) throw ConfigError("'params' must be an object");
  for (const auto& [raw_key, value] : j.items()) {
    const std::string key = canonical_key(raw_key);
    const ParamRef* ref = find_param(key);
    if (!ref) throw ConfigError("unknown parameter '" + raw_key + "'");
    try {
      std::visit([&](auto member) { base.*member = value.get<std::remove_reference_t<
                                        decltype(base.*member)>>(); },
                 *ref);
    } catch (const json::exception&) {
      throw ConfigError("parameter '" + raw_key + "' has the wrong type");
    }
  }
  return base;
}

json to_json(const ScenarioConfig& sc) {
  json drones = json::array();
  for (const DroneSpec& d : sc.drones) {
    drones.push_back({{"id", d.id},
                      {"group", d.group},
                      {"position", vec_json(d.initial.position)},
                      {"velocity", vec_json(d.initial.velocity)},
                      {"target", vec_json(d.target)},
                      {"desired_speed", d.desired_speed}});
  }
  json obstacles = json::array();
  for (const Obstacle& o : sc.obstacles) {
    if (o.kind == Obstacle::Kind::VerticalCylinder) {
      obstacles.push_back(
          {{"type", "cylinder"}, {"x", o.center_x}, {"y", o.center_y}, {"radius", o.radius}});
    } else {
      obstacles.push_back(
          {{"type", "half_space"}, {"normal", vec_json(o.normal)}, {"offset", o.offset}});
    }
  }
  return {{"name", sc.name},
          {"t_max", sc.t_max},
          {"cross_section",
           {{"axis", axis_name(sc.cross_section.axis)}, {"offset", sc.cross_section.offset}}},
          {"drones", drones},
          {"obstacles", obstacles}};
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig sc;
  try {
    sc.name = j.value("name", std::string("custom"));
    sc.t_max = j.value("t_max", sc.t_max);
    if (j.contains("cross_section")) {
      const json& c = j.at("cross_section");
      sc.cross_section.axis = axis_from(c.value("axis", std::string("x")));
      sc.cross_section.offset = c.value("offset", 0.0);
    }
    int next_id = 0;
    for (const json& d : j.value("drones", json::array())) {
      DroneSpec s;
      s.id = d.value("id", next_id);
      next_id = s.id + 1;
      s.group = d.value("group", 0);
      s.initial.position = vec_from(d.at("position"), "drone position");
      s.initial.velocity =
          d.contains("velocity") ? vec_from(d.at("velocity"), "drone velocity") : Vec3{};
      s.target = vec_from(d.at("target"), "drone target");
      s.desired_speed = d.value("desired_speed", 1.0);
      sc.drones.push_back(s);
    }
    for (const json& o : j.value("obstacles", json::array())) {
      const std::string type = o.at("type").get<std::string>();
      if (type == "cylinder") {
        sc.obstacles.push_back(Obstacle::cylinder(o.at("x").get<double>(), o.at("y").get<double>(),
                                                  o.at("radius").get<double>()));
      } else if (type == "half_space") {
        sc.obstacles.push_back(
            Obstacle::half_space(vec_from(o.at("normal"), "obstacle normal"),
                                 o.at("offset").get<double>()));
      } else {
        throw ConfigError("unknown obstacle type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  sc.validate();
  return sc;
}

RunConfig parse_config(const json& doc, RunConfig base) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "scenario" && key != "params" && key != "drones" && key != "obstacles" &&
        key != "seed" && key != "t_max" && key != "name" && key != "cross_section") {
      throw ConfigError("unknown config section '" + key + "'");
    }
  }
  try {
    if (doc.contains("seed")) base.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("params")) base.params = params_from_json(doc.at("params"), base.params);
    if (doc.contains("scenario")) {
      const json& s = doc.at("scenario");
      if (s.is_string()) {
        base.scenario.name = s.get<std::string>();
      } else {
        for (const auto& [key, value] : s.items()) {
          apply_override(base, key == "name" ? "scenario" : key,
                         value.is_string() ? value.get<std::string>() : value.dump());
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (doc.contains("drones")) {
    json sc = json::object();
    for (const char* key : {"name", "t_max", "cross_section", "drones", "obstacles"}) {
      if (doc.contains(key)) sc[key] = doc.at(key);
    }
    base.custom = scenario_from_json(sc);
  } else if (doc.contains("obstacles")) {
    throw ConfigError("'obstacles' without 'drones' is not supported");
  }
  return base;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, std::move(base));
}

ScenarioConfig build_scenario(const RunConfig& config) {
  ScenarioConfig sc;
  if (config.custom) {
    sc = *config.custom;
  } else {
    const ScenarioSelector& s = config.scenario;
    const int total = s.per_group ? 2 * s.n_total : s.n_total;
    if (s.name == "one_on_one") {
      sc = gen_one_on_one(s.perturbation, config.seed, s.v0);
    } else if (s.name == "head_on") {
      sc = gen_head_on(total, config.seed, false, s.v0);
    } else if (s.name == "bottleneck") {
      sc = gen_head_on(total, config.seed, true, s.v0);
    } else if (s.name == "crossing") {
      sc = gen_crossing(total, config.seed, s.v0);
    } else {
      throw ConfigError("unknown scenario '" + s.name +
                        "' (one_on_one, head_on, bottleneck, crossing)");
    }
  }
  if (config.scenario.t_max) sc.t_max = *config.scenario.t_max;
  sc.validate();
  return sc;
}

json to_json(const CheckReport& r) {
  return {{"name", r.name},
          {"max_relative_error", r.max_relative_error},
          {"tolerance", r.tolerance},
          {"passed", r.passed},
          {"samples", r.samples}};
}

json run_metadata(const std::string& scenario, const ModelParams& params, std::uint64_t seed) {
  return {{"artifact", "dronegame"},
          {"version", std::string(kArtifactVersion)},
          {"scenario", scenario},
          {"seed", seed},
          {"params", to_json(params)}};
}

void write_csv_metadata(std::ostream& os, const json& meta) {
  for (const auto& [key, value] : meta.items()) {
    os << "# " << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump())
       << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const SimulationLog& log, const json& meta) {
  write_csv_metadata(os, meta);
  os << "t,drone_id,group,x,y,z,vx,vy,vz,ux,uy,uz\n";
  for (std::size_t i = 0; i < log.tracks.size(); ++i) {
    const DroneSpec& d = log.specs[i];
    for (const Sample& s : log.tracks[i]) {
      os << num(s.t) << ',' << d.id << ',' << d.group << ',' << num(s.r.x) << ',' << num(s.r.y)
         << ',' << num(s.r.z) << ',' << num(s.v.x) << ',' << num(s.v.y) << ',' << num(s.v.z)
         << ',' << num(s.u.x) << ',' << num(s.u.y) << ',' << num(s.u.z) << '\n';
    }
  }
}

void write_crossings_csv(std::ostream& os, const std::vector<CrossingPoint>& points,
                         const CrossSection& plane, const json& meta) {
  write_csv_metadata(os, meta);
  os << "# plane=" << axis_name(plane.axis) << '=' << num(plane.offset) << '\n';
  const char* c1 = plane.axis == Axis::X ? "y" : "x";
  const char* c2 = plane.axis == Axis::Z ? "y" : "z";
  os << "drone_id,group,t," << c1 << ',' << c2 << '\n';
  for (const CrossingPoint& p : points) {
    os << p.drone_id << ',' << p.group << ',' << num(p.t) << ',' << num(p.c1) << ',' << num(p.c2)
       << '\n';
  }
}

json metrics_json(const MetricsReport& m, const SimulationLog& log, const json& meta) {
  int nonconverged = 0;
  for (const SolveSummary& s : log.solves) nonconverged += s.converged ? 0 : 1;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"meta", meta},
          {"drones", m.drones},
          {"arrived", m.arrived},
          {"min_pairwise_distance", opt(m.min_pairwise_distance)},
          {"min_intergroup_distance", opt(m.min_intergroup_distance)},
          {"min_obstacle_distance", opt(m.min_obstacle_distance)},
          {"avg_directed_speed", m.avg_directed_speed},
          {"lane_separation_index", opt(m.lane_separation)},
          {"crossings", m.crossings.size()},
          {"solves", log.solves.size()},
          {"nonconverged_solves", nonconverged},
          {"failed", log.failed},
          {"failure", log.failure}};
}

json solves_json(const SimulationLog& log, const json& meta) {
  json rows = json::array();
  for (const SolveSummary& s : log.solves) {
    rows.push_back({{"t", s.t},
                    {"active", s.active},
                    {"iterations", s.iterations},
                    {"final_error", s.final_error},
                    {"converged", s.converged}});
  }
  return {{"meta", meta}, {"solves", rows}};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace dronegame
