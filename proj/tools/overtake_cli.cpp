// Copyright 2026 The overtake Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// overtake: closed-loop runs, speed sweeps, solver and GP benchmarks.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "overtake/batch.hpp"
#include "overtake/common.hpp"
#include "overtake/config.hpp"
#include "overtake/ptc_qp.hpp"
#include "overtake/race_sim.hpp"
#include "overtake/sgp.hpp"

namespace fs = std::filesystem;
using namespace overtake;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAcceptance = 3;

struct Stats {
  double mean = 0.0, std = 0.0, p99 = 0.0, max = 0.0;
};

Stats summarize(std::vector<double> v) {
  Stats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(v.size()));
  const auto k = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(v.size()))) - 1;
  s.p99 = v[std::min(k, v.size() - 1)];
  s.max = v.back();
  return s;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  return out;
}

/// Solve-time histogram with log-spaced bins, for plotting.
void write_histogram(std::ostream& out, const std::vector<double>& ptc,
                     const std::vector<double>& oracle) {
  out << "bin_lo_us,bin_hi_us,ptc_count,oracle_count\n";
  double lo = 1.0;
  for (int b = 0; b < 40; ++b) {
    const double hi = lo * std::pow(10.0, 0.125);
    auto count = [&](const std::vector<double>& v) {
      return std::count_if(v.begin(), v.end(), [&](double x) {
        return (b == 0 || x >= lo) && (b == 39 || x < hi);
      });
    };
    out << lo << ',' << hi << ',' << count(ptc) << ',' << count(oracle) << '\n';
    lo = hi;
  }
}

void print_stats(const char* name, const Stats& s) {
  std::printf("%-8s mean %10.2f us  std %10.2f us  p99 %10.2f us  max %10.2f us\n", name,
              s.mean, s.std, s.p99, s.max);
}

struct Common {
  std::string config_path;
  std::string track_path;
};

SimConfig load(const Common& c) {
  SimConfig cfg = c.config_path.empty() ? SimConfig{} : load_config(c.config_path);
  if (!c.track_path.empty()) cfg.track = c.track_path;
  return cfg;
}

// Relative track paths fall back to the source tree so the binary runs from
// any working directory.
TrackMap open_track(const SimConfig& cfg) {
  fs::path path = cfg.track;
  if (path.is_relative() && !fs::exists(path)) {
    const fs::path fallback = fs::path(OVERTAKE_SOURCE_DIR) / path;
    if (fs::exists(fallback)) path = fallback;
  }
  return load_track(path.string());
}

int cmd_run(const Common& c, const std::string& scenario_name, std::uint64_t seed,
            std::optional<double> speed, const fs::path& out_dir, bool plans, bool shadow,
            const std::string& tracking, int dump_qps) {
  SimConfig cfg = load(c);
  if (shadow) cfg.sim.shadow = true;
  if (tracking == "pure_pursuit") cfg.controller.tracking = TrackingMode::kPurePursuit;
  const TrackMap track = open_track(cfg);
  const Scenario sc = make_scenario(scenario_name, track, speed.value_or(cfg.opponent_speed));
  TrialOptions opts;
  opts.record_plans = plans;
  opts.harvest_qps = dump_qps > 0;
  opts.harvest_stride = std::max(1, dump_qps);
  const TrialResult r = run_trial(sc, track, cfg, seed, opts);

  fs::create_directories(out_dir);
  open_out(out_dir / "metrics.json") << metrics_to_json(r);
  {
    auto f = open_out(out_dir / "cycles.csv");
    write_cycles_csv(f, r.cycles);
  }
  {
    auto f = open_out(out_dir / "timing.csv");
    write_timing_csv(f, r.timings);
  }
  std::vector<double> ptc_us, oracle_us;
  for (const CycleTiming& t : r.timings) {
    if (t.ptc_us > 0.0) ptc_us.push_back(t.ptc_us);
    if (t.oracle_us > 0.0) oracle_us.push_back(t.oracle_us);
  }
  {
    auto f = open_out(out_dir / "timing_hist.csv");
    write_histogram(f, ptc_us, oracle_us);
  }
  if (plans) {
    auto f = open_out(out_dir / "plans.jsonl");
    for (const std::string& p : r.plans) f << p << '\n';
  }
  if (dump_qps > 0) {
    fs::create_directories(out_dir / "qps");
    for (std::size_t i = 0; i < r.harvested.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "qp_%05zu.txt", i);
      auto f = open_out(out_dir / "qps" / name);
      write_qp_dump(f, r.harvested[i], cfg.ptc);
    }
  }
  const RunMetrics& m = r.metrics;
  std::printf("%s seed %llu: %d/%d overtakes, %d collisions, R_otc %.1f%%, sigma_T %.2f s, "
              "%s\n",
              sc.name.c_str(), static_cast<unsigned long long>(seed), m.successes, m.attempts,
              m.collisions, m.success_rate, m.maneuver_time,
              m.complete ? "complete" : "incomplete");
  print_stats("ptc", summarize(ptc_us));
  if (!oracle_us.empty()) print_stats("oracle", summarize(oracle_us));
  return m.complete && m.collisions == 0 && m.unflagged_failures == 0 ? kExitOk
                                                                      : kExitAcceptance;
}

int cmd_sweep(const Common& c, const std::string& scenario_name, std::uint64_t seed,
              int trials, const fs::path& out_dir) {
  const SimConfig cfg = load(c);
  const TrackMap track = open_track(cfg);
  const Scenario sc = make_scenario(scenario_name, track, cfg.opponent_speed);
  const SweepResult r = sweep_smax(sc, track, cfg, seed, trials);
  nlohmann::json probes = nlohmann::json::array();
  for (const SweepProbe& p : r.probes) {
    probes.push_back({{"scaler", p.scaler}, {"success", p.success}, {"seeds", p.seeds}});
  }
  nlohmann::json j{{"scenario", sc.name},
                   {"probes", probes},
                   {"monotonicity_violations", r.monotonicity_violations}};
  if (r.s_max) {
    j["S_max"] = 100.0 * *r.s_max;
    std::printf("%s S_max = %.1f%%\n", sc.name.c_str(), 100.0 * *r.s_max);
  } else {
    j["S_max"] = "< 40%";
    std::printf("%s S_max < 40%%\n", sc.name.c_str());
  }
  if (r.monotonicity_violations > 0) {
    std::printf("flaky: %d monotonicity violations\n", r.monotonicity_violations);
  }
  fs::create_directories(out_dir);
  open_out(out_dir / "sweep.json") << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_bench_qp(const Common& c, int n, int m, int count, std::uint64_t seed,
                 const fs::path& out_dir, const std::string& source) {
  const SimConfig cfg = load(c);
  std::vector<DenseQp> qps;
  if (source == "random") {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dn(2, n);
    std::uniform_int_distribution<int> dm(1, m);
    for (int i = 0; i < count; ++i) {
      const int ni = dn(rng);
      qps.push_back(random_qp(rng, ni, dm(rng), 1e3, 0));
    }
  } else {
    const TrackMap track = open_track(cfg);
    TrialOptions opts;
    opts.harvest_qps = true;
    const TrialResult r =
        run_trial(make_scenario(source, track, cfg.opponent_speed), track, cfg, seed, opts);
    qps = r.harvested;
    if (count > 0 && static_cast<std::size_t>(count) < qps.size()) {
      qps.resize(static_cast<std::size_t>(count));
    }
  }
  fs::create_directories(out_dir);
  auto f = open_out(out_dir / "qp_bench.csv");
  f << "index,n,m,ptc_us,oracle_us,ptc_status,oracle_status,ptc_iterations,"
       "objective_rel_gap,ptc_violation\n";
  std::vector<double> ptc_us, oracle_us;
  int disagree = 0;
  for (std::size_t i = 0; i < qps.size(); ++i) {
    const DenseQp& qp = qps[i];
    PtcSolver solver(cfg.ptc);
    auto t0 = std::chrono::steady_clock::now();
    const QpSolution a = solver.solve(qp);
    const double ta =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    t0 = std::chrono::steady_clock::now();
    const QpSolution b = oracle_solve(qp);
    const double tb =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    const double gap =
        std::abs(a.objective - b.objective) / std::max(1.0, std::abs(b.objective));
    if (b.status == QpStatus::kConverged && gap > 1e-4) ++disagree;
    ptc_us.push_back(ta);
    oracle_us.push_back(tb);
    f << i << ',' << qp.n() << ',' << qp.m() << ',' << ta << ',' << tb << ','
      << to_string(a.status) << ',' << to_string(b.status) << ',' << a.iterations << ','
      << gap << ',' << qp.max_violation(a.z) << '\n';
  }
  std::printf("%zu problems (%s)\n", qps.size(), source.c_str());
  print_stats("ptc", summarize(ptc_us));
  print_stats("oracle", summarize(oracle_us));
  std::printf("objective disagreements > 1e-4: %d\n", disagree);
  auto h = open_out(out_dir / "qp_hist.csv");
  write_histogram(h, ptc_us, oracle_us);
  return kExitOk;
}

int cmd_bench_gp(const std::vector<int>& sizes, int inducing, int queries, int repeats,
                 std::uint64_t seed, const fs::path& out_dir) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> us(0.0, 60.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  fs::create_directories(out_dir);
  auto f = open_out(out_dir / "gp_bench.csv");
  f << "n,m,sparse_us,exact_us,speedup,max_mean_diff\n";
  std::printf("%6s %4s %12s %12s %8s\n", "N", "M", "sparse_us", "exact_us", "speedup");
  const SgpHyper hyper = SgpHyper::defaults(TargetKind::kLateral);
  for (int n : sizes) {
    std::vector<Observation> obs;
    for (int i = 0; i < n; ++i) {
      const double s = us(rng);
      obs.push_back({s, 0.5 * std::sin(0.3 * s) + noise(rng), hyper.noise_std});
    }
    std::vector<double> q(static_cast<std::size_t>(queries));
    for (double& x : q) x = us(rng);
    std::vector<double> mean(q.size()), var(q.size()), exact_mean(q.size());
    SgpFitOptions opts;
    opts.inducing = inducing;
    opts.hyper = hyper;
    double sparse_us = 0.0, exact_us = 0.0;
    for (int r = 0; r < repeats; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      const SgpModel model = fit(obs, inducing, TargetKind::kLateral, opts);
      predict(model, q, mean, var);
      sparse_us += std::chrono::duration<double, std::micro>(
                       std::chrono::steady_clock::now() - t0).count();
      t0 = std::chrono::steady_clock::now();
      const ExactGp exact(obs, hyper);
      for (std::size_t i = 0; i < q.size(); ++i) exact_mean[i] = exact.predict(q[i]).mean;
      exact_us += std::chrono::duration<double, std::micro>(
                      std::chrono::steady_clock::now() - t0).count();
    }
    sparse_us /= repeats;
    exact_us /= repeats;
    double diff = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      diff = std::max(diff, std::abs(mean[i] - exact_mean[i]));
    }
    f << n << ',' << inducing << ',' << sparse_us << ',' << exact_us << ','
      << exact_us / sparse_us << ',' << diff << '\n';
    std::printf("%6d %4d %12.1f %12.1f %8.2f\n", n, inducing, sparse_us, exact_us,
                exact_us / sparse_us);
  }
  return kExitOk;
}

int cmd_replay(const std::string& path, bool oracle) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read QP dump '" + path + "'");
  PtcConfig cfg;
  const DenseQp qp = read_qp_dump(in, &cfg);
  PtcSolver solver(cfg);
  const QpSolution a = solver.solve(qp);
  std::printf("fingerprint %016llx  n %ld  m %ld\n",
              static_cast<unsigned long long>(fingerprint(qp)), static_cast<long>(qp.n()),
              static_cast<long>(qp.m()));
  std::printf("ptc     %-13s iterations %3d  residual %.3e  objective %.12g  violation %.3e\n",
              to_string(a.status), a.iterations, a.residual, a.objective,
              qp.max_violation(a.z));
  if (oracle) {
    const QpSolution b = oracle_solve(qp);
    std::printf("oracle  %-13s iterations %3d  objective %.12g  violation %.3e\n",
                to_string(b.status), b.iterations, b.objective, qp.max_violation(b.z));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"overtake: multi-opponent overtaking planner simulator"};
  app.require_subcommand(0, 1);
  Common common;
  bool dump = false;
  app.add_flag("--dump-config", dump, "Print the full default configuration and exit");
  app.add_option("--config", common.config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--track", common.track_path, "Track CSV (overrides the config)");

  std::string scenario = "SMP";
  std::uint64_t seed = 42;
  std::string out = "out";
  std::optional<double> speed;
  bool plans = false, shadow = false;
  std::string tracking = "mpc";
  int dump_qps = 0;
  auto* run = app.add_subcommand("run", "Simulate one trial");
  run->add_option("--scenario", scenario, "SMP, DSL, TSO or ONT")
      ->check(CLI::IsMember({"SMP", "DSL", "TSO", "ONT"}));
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--speed", speed, "Opponent speed scaler in (0, 1]")
      ->check(CLI::Range(1e-6, 1.0));
  run->add_option("--out", out, "Output directory");
  run->add_flag("--plans", plans, "Write per-cycle plan diagnostics (plans.jsonl)");
  run->add_flag("--shadow", shadow, "Solve every MPC problem with the oracle as well");
  run->add_option("--tracking", tracking, "mpc or pure_pursuit")
      ->check(CLI::IsMember({"mpc", "pure_pursuit"}));
  run->add_option("--dump-qps", dump_qps, "Write every k-th condensed QP to out/qps");

  int trials = 3;
  auto* sweep = app.add_subcommand("sweep", "Largest opponent speed scaler still passed");
  sweep->add_option("--scenario", scenario)->check(CLI::IsMember({"SMP", "DSL", "TSO", "ONT"}));
  sweep->add_option("--seed", seed);
  sweep->add_option("--trials", trials, "Trials per probe")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out);

  int n = 40, m = 80, count = 1000;
  std::string source = "random";
  auto* bqp = app.add_subcommand("bench-qp", "PTC versus oracle solve times");
  bqp->add_option("--n", n, "Largest variable count")->check(CLI::Range(2, 4096));
  bqp->add_option("--m", m, "Largest constraint count")->check(CLI::Range(1, 8192));
  bqp->add_option("--count", count, "Number of problems")->check(CLI::NonNegativeNumber);
  bqp->add_option("--seed", seed);
  bqp->add_option("--source", source, "random, or a scenario to harvest MPC problems from")
      ->check(CLI::IsMember({"random", "SMP", "DSL", "TSO", "ONT"}));
  bqp->add_option("--out", out);

  std::vector<int> sizes{50, 100, 200, 400, 800};
  int inducing = 30, queries = 100, repeats = 5;
  auto* bgp = app.add_subcommand("bench-gp", "Sparse versus exact GP latency");
  bgp->add_option("--sizes", sizes, "Training set sizes")->check(CLI::PositiveNumber);
  bgp->add_option("--inducing", inducing)->check(CLI::PositiveNumber);
  bgp->add_option("--queries", queries)->check(CLI::PositiveNumber);
  bgp->add_option("--repeats", repeats)->check(CLI::PositiveNumber);
  bgp->add_option("--seed", seed);
  bgp->add_option("--out", out);

  std::string dump_path;
  bool with_oracle = true;
  auto* replay = app.add_subcommand("replay-qp", "Re-solve a QP dump");
  replay->add_option("dump", dump_path, "QP dump file")->required();
  replay->add_flag("!--no-oracle", with_oracle, "Skip the oracle solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (dump) {
      std::cout << dump_config(load(common));
      return kExitOk;
    }
    if (*run) return cmd_run(common, scenario, seed, speed, out, plans, shadow, tracking, dump_qps);
    if (*sweep) return cmd_sweep(common, scenario, seed, trials, out);
    if (*bqp) return cmd_bench_qp(common, n, m, count, seed, out, source);
    if (*bgp) return cmd_bench_gp(sizes, inducing, queries, repeats, seed, out);
    if (*replay) return cmd_replay(dump_path, with_oracle);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
