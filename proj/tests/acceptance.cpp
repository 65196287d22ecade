// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance [--workdir DIR] [--cli PATH]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bandit.hpp"
#include "support.hpp"
#include "teamnav/checkpoint.hpp"
#include "teamnav/recording.hpp"
#include "teamnav/run.hpp"

namespace fs = std::filesystem;
using namespace teamnav;
using namespace teamnav::testing;

namespace {

fs::path g_work;
std::string g_cli = TEAMNAV_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs the CLI from `cwd`, capturing stdout and stderr into files named after `tag`.
int cli(const std::string& args, const std::string& tag, const fs::path& cwd = g_work) {
  const auto cmd = fmt::format("cd '{}' && '{}' {} > '{}' 2> '{}'", cwd.string(), g_cli, args,
                               (g_work / (tag + ".out")).string(), (g_work / (tag + ".err")).string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Row {
  std::string domain;
  std::uint64_t seed = 0;
  std::string planner;
  int index = 0;
  long collisions = 0;
  long targets = 0;
  std::string score_text;
  double score = 0.0;
};

std::vector<Row> read_benchmark(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  if (line != "domain,seed,planner,problem_index,n_collisions,n_targets,score,steps_executed")
    throw std::runtime_error(fmt::format("{}: unexpected header", path.string()));
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error(fmt::format("{}: malformed row '{}'", path.string(), line));
    Row r;
    r.domain = f[0];
    r.seed = std::stoull(f[1]);
    r.planner = f[2];
    r.index = std::stoi(f[3]);
    r.collisions = std::stol(f[4]);
    r.targets = std::stol(f[5]);
    r.score_text = f[6];
    r.score = std::strtod(f[6].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct CellMeans {
  double collisions = 0.0;
  double targets = 0.0;
  double score = 0.0;
  int n = 0;
};

std::map<std::tuple<std::string, std::uint64_t, std::string>, CellMeans> cell_means(const std::vector<Row>& rows) {
  std::map<std::tuple<std::string, std::uint64_t, std::string>, CellMeans> cells;
  for (const auto& r : rows) {
    auto& c = cells[{r.domain, r.seed, r.planner}];
    c.collisions += static_cast<double>(r.collisions);
    c.targets += static_cast<double>(r.targets);
    c.score += r.score;
    ++c.n;
  }
  for (auto& [key, c] : cells) {
    c.collisions /= c.n;
    c.targets /= c.n;
    c.score /= c.n;
  }
  return cells;
}

// ---------------------------------------------------------------------------

Outcome reward_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  double worst = 0.0;
  int evaluations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto w = random_world(rng);
    const auto env = random_env(rng, w);
    RewardConfig rc;
    if (trial % 2) rc = {rng.uniform(1, 20), rng.uniform(0, 3), rng.uniform(10, 200)};
    for (const auto& a : w.agents) {
      const double want =
          brute_force_reward(w, a.id, env.n_observed_obstacles, env.far_sentinel(), rc.alpha, rc.beta1, rc.beta2);
      const double got = reward(w, a.id, env, rc);
      worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
      ++evaluations;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 5.0,
          fmt::format("10000 random states ({} agent evaluations), max deviation {:.3g} (tol 1e-12), {:.2f} s (limit 5 s)",
                      evaluations, worst, secs)};
}

Outcome gradcheck() {
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli("gradcheck --trials 100", "gradcheck");
  const double secs = seconds_since(t0);
  const auto out = slurp(g_work / "gradcheck.out");
  double err = NAN;
  if (const auto at = out.find("max_rel_error "); at != std::string::npos)
    err = std::strtod(out.c_str() + at + 14, nullptr);
  return {code == 0 && err < 1e-6 && secs < 30.0,
          fmt::format("gradcheck --trials 100: exit {}, max relative error {:.3g} (tol 1e-6), {:.1f} s (limit 30 s)",
                      code, err, secs)};
}

Outcome score_exactness(const std::vector<fs::path>& csvs) {
  std::size_t rows = 0, bad = 0;
  for (const auto& p : csvs)
    for (const auto& r : read_benchmark(p)) {
      ++rows;
      if (r.score != 10.0 * static_cast<double>(r.targets) - static_cast<double>(r.collisions)) ++bad;
    }
  return {rows > 0 && bad == 0, fmt::format("{} CSV rows across {} files, {} violate score = 10 n_targets - n_collisions",
                                            rows, csvs.size(), bad)};
}

Outcome baseline_completeness() {
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli("eval --planner baseline --domain static-simple --seed 10 --seed 11 --seed 12 --count 100 "
                       "--out baseline_static.csv",
                       "baseline_static");
  const double secs = seconds_since(t0);
  if (code != 0) return {false, fmt::format("eval exited {}", code)};
  std::map<std::uint64_t, int> complete;
  for (const auto& r : read_benchmark(g_work / "baseline_static.csv")) complete[r.seed] += r.targets == 3;
  const bool ok = complete[10] == 100 && complete[11] == 100 && complete[12] == 100 && secs < 60.0;
  return {ok, fmt::format("all 3 targets reached on {}/100, {}/100, {}/100 problems (seeds 10/11/12), {:.2f} s (limit 60 s)",
                          complete[10], complete[11], complete[12], secs)};
}

struct TrainedRun {
  fs::path dir;
  fs::path final_checkpoint;
  fs::path benchmark;
  double train_seconds = 0.0;
  int train_exit = -1;
  int eval_exit = -1;
};

TrainedRun train_and_benchmark(const std::string& name, int threads) {
  TrainedRun run;
  run.dir = g_work / name;
  fs::remove_all(run.dir);
  fs::create_directories(run.dir);
  const auto t0 = std::chrono::steady_clock::now();
  run.train_exit = cli(fmt::format("train --seed 10 --out run --threads {}", threads), name + "_train", run.dir);
  run.train_seconds = seconds_since(t0);
  run.final_checkpoint = run.dir / "run" / checkpoint_filename(TrainConfig{}.total_updates);
  run.benchmark = run.dir / "benchmark.csv";
  run.eval_exit = cli(fmt::format("eval --checkpoint run/{} --planner baseline --out benchmark.csv --threads {}",
                                  checkpoint_filename(TrainConfig{}.total_updates), threads),
                      name + "_eval", run.dir);
  return run;
}

Outcome learning_progress(const TrainedRun& run) {
  if (run.train_exit != 0 || run.eval_exit != 0)
    return {false, fmt::format("train exit {}, eval exit {}", run.train_exit, run.eval_exit)};
  const int code = cli(fmt::format("eval --checkpoint '{}' --domain static-simple --seed 10 --count 100 --out update0.csv",
                                   (run.dir / "run" / checkpoint_filename(0)).string()),
                       "update0");
  if (code != 0) return {false, fmt::format("update-0 eval exited {}", code)};
  const auto final_cells = cell_means(read_benchmark(run.benchmark));
  const auto& trained = final_cells.at({"static-simple", 10, "policy"});
  const auto initial = cell_means(read_benchmark(g_work / "update0.csv")).at({"static-simple", 10, "policy"});

  // Batch-return trend from the training log, reported for context.
  std::ifstream log(run.dir / "run" / kTrainLogName);
  std::string line;
  std::getline(log, line);
  std::vector<double> returns;
  while (std::getline(log, line)) returns.push_back(std::strtod(line.c_str() + line.find(',') + 1, nullptr));
  double first = 0.0, last = 0.0;
  if (returns.size() >= 200) {
    for (std::size_t i = 0; i < 100; ++i) {
      first += returns[i] / 100.0;
      last += returns[returns.size() - 100 + i] / 100.0;
    }
  }

  const bool ok = trained.targets >= 2.0 && trained.score > initial.score;
  return {ok, fmt::format("trained policy mean n_targets {:.3f} (need >= 2.0); mean score final {:.3f} vs update 0 {:.3f} "
                          "(need final > initial); training {:.0f} s; mean batch return first/last 100 updates "
                          "{:.2f} / {:.2f}",
                          trained.targets, trained.score, initial.score, run.train_seconds, first, last)};
}

Outcome dynamic_collisions(const TrainedRun& run) {
  const auto cells = cell_means(read_benchmark(run.benchmark));
  const auto& policy = cells.at({"multi-agent-dynamic", 10, "policy"});
  const auto& base = cells.at({"multi-agent-dynamic", 10, "baseline"});
  return {policy.collisions < base.collisions,
          fmt::format("multi-agent-dynamic seed 10 mean collisions: policy {:.2f}, baseline {:.2f} (need policy < baseline)",
                      policy.collisions, base.collisions)};
}

Outcome upper_bound(const TrainedRun& run) {
  const auto cells = cell_means(read_benchmark(run.benchmark));
  int checked = 0;
  std::string violations;
  for (const auto& [key, c] : cells) {
    const auto& [domain, seed, planner] = key;
    if (planner != "policy") continue;
    const auto& base = cells.at({domain, seed, "baseline"});
    ++checked;
    if (base.targets < c.targets) violations += fmt::format(" {}/{}: {:.2f} < {:.2f};", domain, seed, base.targets, c.targets);
  }
  return {checked == 9 && violations.empty(),
          fmt::format("{} (domain, seed) cells compared, baseline mean n_targets >= policy in {}{}", checked,
                      violations.empty() ? "all" : "not all:", violations)};
}

Outcome large_degradation(const TrainedRun& run) {
  const auto cells = cell_means(read_benchmark(run.benchmark));
  const double large = cells.at({"multi-agent-dynamic-large", 10, "policy"}).score / 30.0;
  const double dynamic = cells.at({"multi-agent-dynamic", 10, "policy"}).score / 9.0;
  return {large < dynamic, fmt::format("policy score per available target, seed 10: large {:.3f}, dynamic {:.3f} "
                                       "(need large < dynamic)",
                                       large, dynamic)};
}

Outcome determinism(const TrainedRun& a, const TrainedRun& b, const TrainedRun& c) {
  std::vector<std::string> diffs;
  std::size_t compared = 0;
  auto same = [&](const fs::path& x, const fs::path& y) {
    ++compared;
    if (!fs::exists(x) || !fs::exists(y) || slurp(x) != slurp(y))
      diffs.push_back(fmt::format("{} vs {}", fs::relative(x, g_work).string(), fs::relative(y, g_work).string()));
  };
  for (const auto* other : {&b, &c}) {
    const auto files = list_checkpoints(a.dir / "run");
    for (const auto& f : files) same(f, other->dir / "run" / f.filename());
    if (list_checkpoints(other->dir / "run").size() != files.size()) diffs.push_back("checkpoint count");
    same(a.dir / "run" / kTrainLogName, other->dir / "run" / kTrainLogName);
    same(a.dir / "run" / kResolvedConfigName, other->dir / "run" / kResolvedConfigName);
    same(a.benchmark, other->benchmark);
  }
  const auto n_ckpt = list_checkpoints(a.dir / "run").size();
  return {diffs.empty() && n_ckpt > 0,
          fmt::format("two identical runs and a --threads 8 run: {} file pairs compared ({} checkpoints each), {} differ{}",
                      compared, n_ckpt, diffs.size(), diffs.empty() ? "" : ": " + diffs.front())};
}

Outcome replay_integrity(const TrainedRun& run) {
  int dumps = 0;
  double worst = 0.0;
  std::vector<std::string> problems;
  const std::vector<std::string> planners{fmt::format("--checkpoint '{}'", run.final_checkpoint.string()),
                                          "--planner baseline"};
  for (auto kind : kAllDomains)
    for (std::size_t p = 0; p < planners.size(); ++p)
      for (int index : {0, 7, 42}) {
        const auto out = g_work / fmt::format("rollout_{}_{}_{}.jsonl", to_string(kind), p, index);
        const int code = cli(fmt::format("rollout {} --domain {} --seed 10 --index {} --out '{}'", planners[p],
                                         to_string(kind), index, out.string()),
                             "rollout");
        ++dumps;
        if (code != 0) {
          problems.push_back(fmt::format("rollout exit {}", code));
          continue;
        }
        std::ifstream in(out);
        const auto r = replay_trajectory(in);
        std::ifstream count(out);
        int lines = 0;
        for (std::string l; std::getline(count, l);) ++lines;
        worst = std::max({worst, r.max_position_error, r.max_reward_error});
        if (!r.events_match) problems.push_back(out.filename().string() + " events differ");
        if (lines != r.steps + 1) problems.push_back(out.filename().string() + " line count");
      }
  return {problems.empty() && worst <= 1e-12,
          fmt::format("{} dumps (3 domains x 2 planners x 3 problems) replayed, max state/reward deviation {:.3g} "
                      "(tol 1e-12){}",
                      dumps, worst, problems.empty() ? "" : "; " + problems.front())};
}

Outcome bandit() {
  const auto run = run_bandit(500, 11, 0.05);
  const double final_norm = run.means.back().norm();
  return {run.first_within >= 0 && final_norm < 0.05,
          fmt::format("|mu| starts at {:.3f}, first below 0.05 at update {}, {:.4f} after 500 updates",
                      run.means.front().norm(), run.first_within, final_norm)};
}

}  // namespace

int main(int argc, char** argv) {
  g_work = fs::temp_directory_path() / "teamnav_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--workdir") g_work = argv[i + 1];
    else if (flag == "--cli") g_cli = argv[i + 1];
    else {
      std::cerr << "usage: acceptance [--workdir DIR] [--cli PATH]\n";
      return 2;
    }
  }
  fs::remove_all(g_work);
  fs::create_directories(g_work);
  g_work = fs::canonical(g_work);

  std::vector<std::pair<std::string, Outcome>> results;
  auto record = [&](const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    results.emplace_back(name, o);
    std::cout << fmt::format("[{}] {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail) << std::flush;
  };

  std::cout << "acceptance: training three full runs, this takes several minutes\n" << std::flush;
  const auto a = train_and_benchmark("run_a", 1);
  const auto b = train_and_benchmark("run_b", 1);
  const auto c = train_and_benchmark("run_c", 8);

  record("C1 reward oracle", reward_oracle);
  record("C2 gradient check", gradcheck);
  record("C4 baseline completeness", baseline_completeness);
  record("C3 score exactness", [&] {
    return score_exactness({a.benchmark, b.benchmark, c.benchmark, g_work / "baseline_static.csv"});
  });
  record("C5 learning progress", [&] { return learning_progress(a); });
  record("C6 dynamic-domain collisions", [&] { return dynamic_collisions(a); });
  record("C7 baseline upper bound", [&] { return upper_bound(a); });
  record("C8 large-domain degradation", [&] { return large_degradation(a); });
  record("C9 determinism", [&] { return determinism(a, b, c); });
  record("C10 replay integrity", [&] { return replay_integrity(a); });
  record("C11 bandit oracle", bandit);

  int passed = 0;
  for (const auto& [name, o] : results) passed += o.pass;
  std::cout << fmt::format("acceptance: {}/{} criteria passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
