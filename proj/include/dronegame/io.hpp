// Run configuration, config-file parsing and the files written by the CLI.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dronegame/core.hpp"
#include "dronegame/engine.hpp"
#include "dronegame/oracle.hpp"
#include "dronegame/scenarios.hpp"

namespace dronegame {

inline constexpr std::string_view kArtifactVersion = "0.1.0";

/// Built-in scenario generator and its knobs.
struct ScenarioSelector {
  std::string name = "one_on_one";  // one_on_one | head_on | bottleneck | crossing
  int n_total = 100;
  bool per_group = false;  // read n_total as the size of each group
  double perturbation = 0.01;
  double v0 = 1.0;
  std::optional<double> t_max;
};

struct RunConfig {
  ScenarioSelector scenario;
  std::optional<ScenarioConfig> custom;  // drones/obstacles given in a config file
  ModelParams params;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "results";
  bool strict = false;
};

/// Names accepted by apply_override: every ModelParams field, the aliases
/// R (d0), T (horizon_T) and a (relaxation_a), and the scenario knobs.
std::vector<std::string> override_keys();

/// Applies one `key=value` override. Throws ConfigError for unknown keys
/// or unparsable values.
void apply_override(RunConfig& config, std::string_view key, std::string_view value);

/// Splits "key=value" and applies it.
void apply_override(RunConfig& config, std::string_view assignment);

/// Reads a JSON config with optional sections `scenario`, `params`,
/// `drones`, `obstacles` and an optional `seed` over `base`.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_config(const nlohmann::json& doc, RunConfig base = {});

/// The scenario a config describes, generated with the config's seed.
ScenarioConfig build_scenario(const RunConfig& config);

nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j, ModelParams base = {});
nlohmann::json to_json(const ScenarioConfig& sc);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CheckReport& r);

/// Provenance block embedded in every output file.
nlohmann::json run_metadata(const std::string& scenario, const ModelParams& params,
                            std::uint64_t seed);

/// `# key=value` lines for CSV outputs.
void write_csv_metadata(std::ostream& os, const nlohmann::json& meta);

void write_trajectory_csv(std::ostream& os, const SimulationLog& log, const nlohmann::json& meta);
void write_crossings_csv(std::ostream& os, const std::vector<CrossingPoint>& points,
                         const CrossSection& plane, const nlohmann::json& meta);
nlohmann::json metrics_json(const MetricsReport& m, const SimulationLog& log,
                            const nlohmann::json& meta);
nlohmann::json solves_json(const SimulationLog& log, const nlohmann::json& meta);

/// Writes `text` to `path`, creating parent directories. Throws
/// std::runtime_error naming the path on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dronegame
