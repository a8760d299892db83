#include "dronegame/cli.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "dronegame/cost.hpp"

namespace dronegame {

namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int count_nonconverged(const SimulationLog& log) {
  int n = 0;
  for (const SolveSummary& s : log.solves) n += s.converged ? 0 : 1;
  return n;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

RunOutcome run_once(const RunConfig& config) {
  config.params.validate();
  RunOutcome o;
  o.scenario = build_scenario(config);
  o.log = simulate(o.scenario, config.params, config.seed);
  o.metrics = compute_metrics(o.log, o.scenario);
  o.meta = run_metadata(o.scenario.name, config.params, config.seed);
  return o;
}

void write_run_outputs(const RunOutcome& o, const std::filesystem::path& dir,
                       bool with_trajectory) {
  if (with_trajectory) {
    std::ostringstream traj;
    write_trajectory_csv(traj, o.log, o.meta);
    write_file(dir / "trajectory.csv", traj.str());
  }
  std::ostringstream cross;
  write_crossings_csv(cross, o.metrics.crossings, o.scenario.cross_section, o.meta);
  write_file(dir / "crossings.csv", cross.str());
  write_file(dir / "metrics.json", metrics_json(o.metrics, o.log, o.meta).dump(2) + "\n");
  write_file(dir / "solves.json", solves_json(o.log, o.meta).dump(2) + "\n");
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  RunOutcome o;
  try {
    o = run_once(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    write_run_outputs(o, config.out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  const MetricsReport& m = o.metrics;
  out << "scenario " << o.scenario.name << ", seed " << config.seed << ", " << m.drones
      << " drones, " << m.arrived << " arrived\n";
  if (m.min_pairwise_distance) {
    out << "min_pairwise_distance " << fixed(*m.min_pairwise_distance, 4) << '\n';
  }
  if (m.min_intergroup_distance) {
    out << "min_intergroup_distance " << fixed(*m.min_intergroup_distance, 4) << '\n';
  }
  if (m.min_obstacle_distance) {
    out << "min_obstacle_distance " << fixed(*m.min_obstacle_distance, 4) << '\n';
  }
  out << "avg_directed_speed " << fixed(m.avg_directed_speed, 4) << '\n';
  if (m.lane_separation) out << "lane_separation_index " << fixed(*m.lane_separation, 4) << '\n';
  out << "outputs in " << config.out_dir.string() << '\n';

  if (o.log.failed) {
    err << "error: NonConvergence: the fixed-point iteration diverged (" << o.log.failure
        << ")\n";
    return kExitFailure;
  }
  const int nc = count_nonconverged(o.log);
  if (nc > 0) {
    err << "warning: NonConvergence in " << nc << " of " << o.log.solves.size() << " solves\n";
    if (config.strict) return kExitNonConvergence;
  }
  return kExitOk;
}

SweepAxis parse_sweep_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("sweep axis must look like key=v1,v2,..., got '" + std::string(text) + "'");
  }
  SweepAxis axis{std::string(text.substr(0, eq)), {}};
  const std::string_view list = text.substr(eq + 1);
  if (list.empty()) throw ConfigError("sweep axis '" + axis.key + "' has no values");
  for (std::string& v : split(list, ',')) {
    if (v.empty()) throw ConfigError("sweep axis '" + axis.key + "' has an empty value");
    axis.values.push_back(std::move(v));
  }
  return axis;
}

std::vector<SweepCell> run_sweep(const RunConfig& base, const SweepOptions& options) {
  if (options.axes.empty()) throw ConfigError("sweep needs at least one parameter");
  if (options.repetitions < 1) throw ConfigError("sweep needs at least one repetition");
  std::size_t n_cells = 1;
  for (const SweepAxis& a : options.axes) {
    if (a.values.empty()) throw ConfigError("sweep axis '" + a.key + "' has no values");
    n_cells *= a.values.size();
  }

  // Cell configs, first axis varying slowest; validated before any run.
  std::vector<SweepCell> cells(n_cells);
  std::vector<RunConfig> configs(n_cells, base);
  for (std::size_t c = 0; c < n_cells; ++c) {
    std::size_t rem = c;
    std::vector<std::size_t> idx(options.axes.size());
    for (std::size_t k = options.axes.size(); k-- > 0;) {
      idx[k] = rem % options.axes[k].values.size();
      rem /= options.axes[k].values.size();
    }
    for (std::size_t k = 0; k < options.axes.size(); ++k) {
      const std::string& value = options.axes[k].values[idx[k]];
      apply_override(configs[c], options.axes[k].key, value);
      cells[c].assignment.emplace_back(options.axes[k].key, value);
    }
    configs[c].params.validate();
    build_scenario(configs[c]);
    cells[c].reports.resize(options.repetitions);
  }

  struct Task {
    std::size_t cell;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < n_cells; ++c) {
    for (int r = 0; r < options.repetitions; ++r) tasks.push_back({c, r});
  }
  std::vector<std::optional<RunOutcome>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      RunConfig cfg = configs[tasks[t].cell];
      cfg.seed = base.seed + static_cast<std::uint64_t>(tasks[t].rep);
      try {
        RunOutcome o = run_once(cfg);
        if (options.write_files) {
          const auto dir = base.out_dir / ("cell_" + std::to_string(tasks[t].cell)) /
                           ("rep_" + std::to_string(tasks[t].rep));
          write_run_outputs(o, dir, options.write_trajectories);
        }
        o.log.tracks.clear();  // keep memory flat on big sweeps
        results[t] = std::move(o);
      } catch (const std::exception&) {
        // Left empty: counted as a failed run.
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  struct Sums {
    double dist = 0.0, speed = 0.0, lane = 0.0;
    int n_dist = 0, n_ok = 0, n_lane = 0;
  };
  std::vector<Sums> sums(n_cells);
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    SweepCell& cell = cells[tasks[t].cell];
    Sums& s = sums[tasks[t].cell];
    ++cell.runs;
    if (!results[t] || results[t]->log.failed) {
      ++cell.failed;
      continue;
    }
    const MetricsReport& m = results[t]->metrics;
    cell.reports[tasks[t].rep] = m;
    cell.nonconverged_solves += count_nonconverged(results[t]->log);
    ++s.n_ok;
    s.speed += m.avg_directed_speed;
    if (m.min_pairwise_distance) {
      s.dist += *m.min_pairwise_distance;
      ++s.n_dist;
    }
    if (m.lane_separation) {
      s.lane += *m.lane_separation;
      ++s.n_lane;
    }
  }
  for (std::size_t c = 0; c < n_cells; ++c) {
    const Sums& s = sums[c];
    if (s.n_ok > 0) cells[c].avg_directed_speed = s.speed / s.n_ok;
    if (s.n_dist > 0) cells[c].min_pairwise_distance = s.dist / s.n_dist;
    if (s.n_lane > 0) cells[c].lane_separation = s.lane / s.n_lane;
  }
  return cells;
}

std::string format_sweep_table(const std::vector<SweepCell>& cells,
                               const std::vector<SweepAxis>& axes) {
  std::ostringstream os;
  os << "cell";
  for (const SweepAxis& a : axes) os << ',' << a.key;
  os << ",runs,failed,min_pairwise_distance,avg_directed_speed,lane_separation_index,"
        "nonconverged_solves\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const SweepCell& cell = cells[c];
    os << c;
    for (const auto& [key, value] : cell.assignment) os << ',' << value;
    os << ',' << cell.runs << ',' << cell.failed << ','
       << (cell.min_pairwise_distance ? fixed(*cell.min_pairwise_distance, 4) : "") << ','
       << fixed(cell.avg_directed_speed, 4) << ','
       << (cell.lane_separation ? fixed(*cell.lane_separation, 4) : "") << ','
       << cell.nonconverged_solves << '\n';
  }
  return os.str();
}

int cmd_sweep(const RunConfig& base, const SweepOptions& options, std::ostream& out,
              std::ostream& err) {
  std::vector<SweepCell> cells;
  try {
    cells = run_sweep(base, options);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string table = format_sweep_table(cells, options.axes);
  out << table;
  int failed = 0;
  for (const SweepCell& c : cells) failed += c.failed;
  if (options.write_files) {
    std::ostringstream doc;
    json meta = run_metadata(build_scenario(base).name, base.params, base.seed);
    meta["repetitions"] = options.repetitions;
    write_csv_metadata(doc, meta);
    doc << table;
    try {
      write_file(base.out_dir / "summary.csv", doc.str());
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }
  if (failed > 0) err << "warning: " << failed << " runs failed\n";
  return kExitOk;
}

std::vector<ConvergenceTrace> run_convergence(const RunConfig& config,
                                              std::span<const double> a_values) {
  if (a_values.empty()) throw ConfigError("convergence needs at least one value of a");
  const ScenarioConfig sc = build_scenario(config);
  if (sc.drones.empty()) throw ConfigError("convergence needs at least one drone");
  std::vector<DroneState> initial;
  for (const DroneSpec& d : sc.drones) initial.push_back(d.initial);
  std::vector<ConvergenceTrace> out;
  for (double a : a_values) {
    ModelParams p = config.params;
    p.relaxation_a = a;
    p.validate();
    const HorizonGrid grid = make_grid(0.0, p.horizon_T, p.dt);
    out.push_back({a, trace_fixed_point(sc.drones, initial, sc.obstacles, grid, p)});
  }
  return out;
}

int cmd_convergence(const RunConfig& config, const std::vector<double>& a_values,
                    std::ostream& out, std::ostream& err) {
  std::vector<ConvergenceTrace> traces;
  try {
    traces = run_convergence(config, a_values);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const json meta = run_metadata(build_scenario(config).name, config.params, config.seed);
  std::ostringstream csv;
  write_csv_metadata(csv, meta);
  csv << "a,iteration,error\n";
  json summary = json::array();
  for (const ConvergenceTrace& t : traces) {
    for (std::size_t k = 0; k < t.result.trace.size(); ++k) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", t.result.trace[k]);
      csv << t.a << ',' << k + 1 << ',' << buf << '\n';
    }
    const double last = t.result.trace.empty() ? INFINITY : t.result.trace.back();
    summary.push_back({{"a", t.a},
                       {"iterations", t.result.trace.size()},
                       {"final_error", last},
                       {"converged", t.result.converged},
                       {"blew_up", t.result.blew_up}});
    out << "a=" << t.a << " iterations=" << t.result.trace.size() << " final_error=" << last
        << (t.result.converged ? " converged" : " NONCONVERGED")
        << (t.result.blew_up ? " (blowup)" : "") << '\n';
  }
  try {
    write_file(config.out_dir / "convergence.csv", csv.str());
    write_file(config.out_dir / "convergence.json",
               json{{"meta", meta}, {"traces", summary}}.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_check(std::uint64_t seed, int gradient_samples, bool negative_control,
              const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
              std::ostream& err) {
  if (gradient_samples < 1) {
    err << "config error: --samples must be >= 1\n";
    return kExitConfig;
  }
  std::vector<CheckReport> reports;
  if (negative_control) {
    const PositionGradient flipped = [](std::size_t i, std::span<const Vec3> pos,
                                        std::span<const Obstacle> obs, const ModelParams& p) {
      return -grad_running_cost_r(i, pos, obs, p);
    };
    reports.push_back(fd_cost_gradients(seed, gradient_samples, ModelParams{}, flipped));
    reports.back().name += ":sign_flipped";
  } else {
    reports = run_all_checks(seed, gradient_samples);
  }
  bool all = true;
  json doc = json::array();
  for (const CheckReport& r : reports) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e (tol %.1e)", r.max_relative_error, r.tolerance);
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " max_error=" << buf
        << " samples=" << r.samples << '\n';
    all = all && r.passed;
    doc.push_back(to_json(r));
  }
  if (out_dir) {
    try {
      write_file(*out_dir / "check.json",
                 json{{"artifact", "dronegame"},
                      {"version", std::string(kArtifactVersion)},
                      {"seed", seed},
                      {"reports", doc}}
                         .dump(2) + "\n");
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitFailure;
    }
  }
  return all ? kExitOk : kExitFailure;
}

}  // namespace dronegame
