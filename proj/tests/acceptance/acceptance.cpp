// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dronegame/cli.hpp"
#include "dronegame/io.hpp"
#include "dronegame/oracle.hpp"
#include "dronegame/scenarios.hpp"
#include "dronegame/solver.hpp"

#ifndef DRONEGAME_CLI
#error "DRONEGAME_CLI must name the dronegame executable"
#endif

using namespace dronegame;

namespace {

struct Verdict {
  bool passed = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    passed = passed && ok;
  }
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

double wall_seconds(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void runtime(Verdict& v, double seconds, double limit) {
  v.require(seconds < limit, "runtime " + num(seconds, 1) + " s < " + num(limit, 0) + " s");
}

void report(Verdict& v, const CheckReport& r) {
  v.require(r.passed, r.name + ": max error " + sci(r.max_relative_error) + " <= " +
                          sci(r.tolerance) + " over " + std::to_string(r.samples) + " samples");
}

Verdict gradient_oracle() {
  Verdict v;
  CheckReport r;
  runtime(v, wall_seconds([&] { r = fd_cost_gradients(1, 1000, ModelParams{}); }), 10);
  report(v, r);
  v.require(r.samples == 1000, "1000 random configurations");
  return v;
}

Verdict adjoint_oracle() {
  Verdict v;
  ModelParams p;
  p.dt = 0.01;
  p.control_period = 0.01;
  p.horizon_T = 1.0;
  std::vector<CheckReport> reports;
  const double s = wall_seconds([&] {
    for (const AdjointCase& c :
         {adjoint_case_cruising(), adjoint_case_off_speed(), adjoint_case_near_miss()}) {
      reports.push_back(fd_adjoint_check(c, p));
    }
  });
  for (const CheckReport& r : reports) report(v, r);
  runtime(v, s, 30);
  return v;
}

Verdict nash_stationarity() {
  Verdict v;
  ModelParams p;
  p.dt = 0.1;
  p.control_period = 1.0;
  p.horizon_T = 10;
  p.eps = 1e-8;
  p.max_iters = 20000;
  CheckReport r;
  runtime(v, wall_seconds([&] { r = nash_stationarity_check(1, 20, p); }), 60);
  report(v, r);
  v.require(r.samples == 20, "20 perturbation directions");
  return v;
}

Verdict brute_force() {
  Verdict v;
  std::vector<CheckReport> reports;
  const double s = wall_seconds([&] {
    for (const NashInstance& inst :
         {nash_instance_single(), nash_instance_head_on(), nash_instance_far_pair()}) {
      reports.push_back(brute_force_comparison(inst, 0.1));
    }
  });
  for (const CheckReport& r : reports) report(v, r);
  runtime(v, s, 60);
  return v;
}

Verdict convergence() {
  Verdict v;
  RunConfig c;
  c.scenario.name = "one_on_one";
  c.seed = 1;
  c.params.horizon_T = 10;
  c.params.eps = 1e-6;
  c.params.max_iters = 200;
  const std::vector<double> as{0.01, 0.02, 0.04, 0.05};
  std::vector<ConvergenceTrace> traces;
  const double s = wall_seconds([&] { traces = run_convergence(c, as); });
  for (const ConvergenceTrace& t : traces) {
    const auto& e = t.result.trace;
    int increases = 0;
    int late_increases = 0;
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (e[k] > e[k - 1]) {
        ++increases;
        if (k >= 5) ++late_increases;
      }
    }
    const std::string tag = "a=" + num(t.a, 2) + ": " + std::to_string(e.size()) +
                            " iterations, last error " + sci(e.empty() ? NAN : e.back()) +
                            (t.result.blew_up ? " (blew up)" : "") + ", " +
                            std::to_string(increases) + " increases";
    if (t.a < 0.045) {
      v.require(t.result.converged && late_increases == 0,
                tag + "; needs eps 1e-6 within 200 and monotone after 5");
    } else {
      v.require(increases > 0, tag + "; needs a non-monotone trace");
    }
  }
  runtime(v, s, 30);
  return v;
}

SweepOptions sweep_of(const std::string& axis, int reps) {
  SweepOptions o;
  o.axes = {parse_sweep_axis(axis)};
  o.repetitions = reps;
  o.jobs = jobs();
  o.write_files = false;
  return o;
}

std::vector<double> mean_min_distance(const std::vector<SweepCell>& cells) {
  std::vector<double> out;
  for (const SweepCell& c : cells) out.push_back(c.min_pairwise_distance.value_or(NAN));
  return out;
}

// Closest approach between drones of different groups, averaged over runs.
std::vector<double> mean_intergroup(const std::vector<SweepCell>& cells) {
  std::vector<double> out;
  for (const SweepCell& c : cells) {
    double sum = 0.0;
    int n = 0;
    for (const MetricsReport& m : c.reports) {
      if (!m.min_intergroup_distance) continue;
      sum += *m.min_intergroup_distance;
      ++n;
    }
    out.push_back(n ? sum / n : NAN);
  }
  return out;
}

std::vector<double> mean_speed(const std::vector<SweepCell>& cells) {
  std::vector<double> out;
  for (const SweepCell& c : cells) out.push_back(c.avg_directed_speed);
  return out;
}

bool strictly_increasing(const std::vector<double>& x) {
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) return false;
  }
  return true;
}

bool strictly_decreasing(const std::vector<double>& x) {
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] < x[k - 1])) return false;
  }
  return true;
}

std::string list(const std::vector<double>& x, int digits = 3) {
  std::string s;
  for (std::size_t k = 0; k < x.size(); ++k) s += (k ? " / " : "") + num(x[k], digits);
  return s;
}

void within(Verdict& v, const std::string& label, const std::vector<double>& got,
            const std::vector<double>& want, double tol) {
  bool ok = got.size() == want.size();
  for (std::size_t k = 0; ok && k < got.size(); ++k) ok = std::fabs(got[k] - want[k]) <= tol;
  v.require(ok, label + " " + list(got) + " within " + num(tol, 2) + " of " + list(want, 2));
}

int failed_runs(const std::vector<SweepCell>& cells) {
  int n = 0;
  for (const SweepCell& c : cells) n += c.failed;
  return n;
}

int nonconverged(const std::vector<SweepCell>& cells) {
  int n = 0;
  for (const SweepCell& c : cells) n += c.nonconverged_solves;
  return n;
}

Verdict table1() {
  Verdict v;
  RunConfig base;
  base.scenario.name = "one_on_one";
  base.seed = 1;
  std::vector<SweepCell> t, r, b;
  const double s = wall_seconds([&] {
    t = run_sweep(base, sweep_of("T=2.5,5,10", 20));
    r = run_sweep(base, sweep_of("R=0.05,0.1,0.2", 20));
    b = run_sweep(base, sweep_of("beta0=1,10,100", 20));
  });
  const auto dt = mean_min_distance(t), dr = mean_min_distance(r), db = mean_min_distance(b);
  v.require(strictly_increasing(dt), "min distance increasing in T: " + list(dt));
  const double ratio = dr[2] / dr[0];
  v.require(ratio >= 3.0 && ratio <= 5.0, "min distance ratio R=0.2 / R=0.05 = " + num(ratio, 3) +
                                              " in [3, 5]");
  v.require(strictly_increasing(db), "min distance increasing in beta0: " + list(db));
  within(v, "T cells", dt, {0.21, 0.34, 0.41}, 0.1);
  within(v, "R cells", dr, {0.18, 0.34, 0.68}, 0.1);
  within(v, "beta0 cells", db, {0.16, 0.34, 0.55}, 0.1);
  v.notes.push_back("info failed runs " + std::to_string(failed_runs(t) + failed_runs(r) +
                                                         failed_runs(b)));
  runtime(v, s, 300);
  return v;
}

// Shared by criteria 7 and 9: the head-on default cell.
std::vector<SweepCell> head_on_default;

RunConfig head_on_base(const std::string& name) {
  RunConfig base;
  base.scenario.name = name;
  base.scenario.n_total = 100;
  base.seed = 1;
  return base;
}

Verdict table2() {
  Verdict v;
  const RunConfig base = head_on_base("head_on");
  std::vector<SweepCell> t, r, b;
  const double s = wall_seconds([&] {
    t = run_sweep(base, sweep_of("T=2.5,5,10", 5));
    r = run_sweep(base, sweep_of("R=0.05,0.2", 5));
    b = run_sweep(base, sweep_of("beta0=1,100", 5));
  });
  head_on_default = {t[1]};
  r.insert(r.begin() + 1, t[1]);
  b.insert(b.begin() + 1, t[1]);
  std::vector<double> speeds = mean_speed(t);
  for (const auto* cells : {&r, &b}) {
    for (double x : mean_speed(*cells)) speeds.push_back(x);
  }
  const double slowest = *std::min_element(speeds.begin(), speeds.end());
  v.require(slowest >= 0.95, "avg directed speed >= 0.95 in every cell (T, R, beta0 rows): " +
                                 list(speeds));
  const auto dt = mean_min_distance(t), dr = mean_min_distance(r), db = mean_min_distance(b);
  within(v, "T cells", dt, {0.33, 0.44, 0.46}, 0.15);
  within(v, "R cells", dr, {0.22, 0.42, 0.85}, 0.15);
  within(v, "beta0 cells", db, {0.27, 0.47, 0.59}, 0.15);
  v.require(strictly_increasing(dr), "min distance increasing in R: " + list(dr));
  v.require(strictly_increasing(db), "min distance increasing in beta0: " + list(db));
  v.notes.push_back("info inter-group min distance T cells " + list(mean_intergroup(t)) +
                    ", R cells " + list(mean_intergroup(r)) + ", beta0 cells " +
                    list(mean_intergroup(b)));
  v.notes.push_back("info failed runs " + std::to_string(failed_runs(t) + failed_runs(r) +
                                                         failed_runs(b)) +
                    ", non-converged solves " +
                    std::to_string(nonconverged(t) + nonconverged(r) + nonconverged(b)));
  runtime(v, s, 1800);
  return v;
}

Verdict table4() {
  Verdict v;
  const RunConfig base = head_on_base("bottleneck");
  std::vector<SweepCell> r, b;
  const double s = wall_seconds([&] {
    r = run_sweep(base, sweep_of("R=0.05,0.1,0.2", 5));
    b = run_sweep(base, sweep_of("beta0=1,100", 5));
  });
  b.insert(b.begin() + 1, r[1]);
  const auto sr = mean_speed(r), sb = mean_speed(b);
  v.require(strictly_decreasing(sb), "avg directed speed decreasing in beta0: " + list(sb));
  v.require(strictly_decreasing(sr), "avg directed speed decreasing in R: " + list(sr));
  within(v, "R speeds", sr, {0.98, 0.92, 0.73}, 0.1);
  within(v, "beta0 speeds", sb, {0.99, 0.86, 0.62}, 0.1);
  v.notes.push_back("info min distance R cells " + list(mean_min_distance(r)) +
                    ", beta0 cells " + list(mean_min_distance(b)));
  v.notes.push_back("info inter-group min distance R cells " + list(mean_intergroup(r)) +
                    ", beta0 cells " + list(mean_intergroup(b)));
  v.notes.push_back("info failed runs " + std::to_string(failed_runs(r) + failed_runs(b)) +
                    ", non-converged solves " + std::to_string(nonconverged(r) + nonconverged(b)));
  runtime(v, s, 1800);
  return v;
}

Verdict self_organization() {
  Verdict v;
  if (head_on_default.empty()) {
    const double s = wall_seconds(
        [&] { head_on_default = run_sweep(head_on_base("head_on"), sweep_of("T=5", 5)); });
    v.notes.push_back("info ran the default head-on cell in " + num(s, 1) + " s");
  }
  int above = 0;
  std::vector<double> values;
  for (const MetricsReport& m : head_on_default[0].reports) {
    values.push_back(m.lane_separation.value_or(NAN));
    if (m.lane_separation && *m.lane_separation > 1.0) ++above;
  }
  v.require(above >= 4, "lane separation > 1 in " + std::to_string(above) + " of " +
                            std::to_string(values.size()) + " seeds: " + list(values));
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DRONEGAME_CLI + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Verdict determinism() {
  Verdict v;
  const auto root = std::filesystem::temp_directory_path() / "dronegame_acceptance_determinism";
  std::filesystem::remove_all(root);
  const std::string run_args =
      "run --scenario head_on --set n_total=20 --set t_max=20 --seed 7 ";
  for (const char* tag : {"a", "b", "c"}) {
    const std::string j = tag[0] == 'c' ? "4" : "1";
    const int rc = run_cli(run_args + "--jobs " + j + " --out \"" + (root / tag).string() + "\"");
    v.require(rc == 0, std::string("run ") + tag + " (--jobs " + j + ") exit status 0");
  }
  const std::string a = slurp(root / "a" / "trajectory.csv");
  v.require(!a.empty(), "trajectory.csv written (" + std::to_string(a.size()) + " bytes)");
  v.require(a == slurp(root / "b" / "trajectory.csv"), "repeated run byte-identical");
  v.require(a == slurp(root / "c" / "trajectory.csv"), "--jobs 4 run byte-identical");

  const std::string sweep_args =
      "sweep --scenario one_on_one --vary beta0=1,10 --reps 3 --trajectories --seed 2 ";
  run_cli(sweep_args + "--jobs 1 --out \"" + (root / "s1").string() + "\"");
  run_cli(sweep_args + "--jobs 3 --out \"" + (root / "s3").string() + "\"");
  int files = 0;
  bool same = true;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root / "s1")) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), root / "s1");
    ++files;
    same = same && slurp(e.path()) == slurp(root / "s3" / rel);
  }
  v.require(files >= 7 && same, "sweep outputs byte-identical for --jobs 1 and 3 (" +
                                    std::to_string(files) + " files)");
  std::filesystem::remove_all(root);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient oracle", gradient_oracle},
      {"adjoint oracle", adjoint_oracle},
      {"Nash stationarity", nash_stationarity},
      {"brute-force equivalence", brute_force},
      {"convergence behaviour", convergence},
      {"one-on-one sensitivity trends", table1},
      {"head-on 100-drone sensitivity", table2},
      {"bottleneck speed trends", table4},
      {"lane formation proxy", self_organization},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("threw: ") + e.what());
    }
    for (const std::string& n : v.notes) std::printf("    %s\n", n.c_str());
    std::printf("%s criterion %d: %s\n", v.passed ? "PASS" : "FAIL", id,
                criteria[i].first.c_str());
    std::fflush(stdout);
    failures += v.passed ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
