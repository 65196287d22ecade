#include "teamnav/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "teamnav/baseline.hpp"
#include "teamnav/checkpoint.hpp"
#include "teamnav/parallel.hpp"

namespace teamnav {

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::vector<Action> planner_actions(const Planner& planner, const WorldState& world, const EnvConfig& env) {
  if (planner.is_baseline()) return baseline_actions(world);
  std::vector<Action> actions;
  actions.reserve(world.agents.size());
  for (const auto& agent : world.agents) {
    const auto obs = encode_observation(world, agent.id, env);
    actions.push_back(to_world_action(deterministic_action(*planner.policy, obs), agent.speed));
  }
  return actions;
}

EpisodeMetrics run_episode(const Planner& planner, const ProblemInstance& instance, const EnvConfig& env,
                           const RewardConfig& reward_config, const StepObserver& observer) {
  EpisodeMetrics m;
  WorldState world = instance.world;
  bool done = episode_done(world);
  while (!done) {
    const auto actions = planner_actions(planner, world, env);
    auto result = step(world, actions, env, reward_config);
    m.n_collisions += result.events.collisions;
    m.n_targets += result.events.targets_reached;
    ++m.steps_executed;
    done = result.events.done;
    if (observer) observer(world, actions, result);
    world = std::move(result.world);
  }
  m.score = weighted_score(m.n_targets, m.n_collisions);
  return m;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  const auto n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / (n - 1.0));
  }
  return s;
}

void summarize(BenchmarkCell& cell) {
  std::vector<double> c, t, s;
  for (const auto& e : cell.episodes) {
    c.push_back(e.n_collisions);
    t.push_back(e.n_targets);
    s.push_back(e.score);
  }
  cell.collisions = summarize(c);
  cell.targets = summarize(t);
  cell.score = summarize(s);
}

const BenchmarkCell& BenchmarkReport::cell(DomainKind domain, std::uint64_t seed, const std::string& planner) const {
  for (const auto& c : cells)
    if (c.domain == domain && c.seed == seed && c.planner == planner) return c;
  throw std::out_of_range(fmt::format("no benchmark cell for {} seed {} planner {}", to_string(domain), seed, planner));
}

std::size_t BenchmarkReport::episode_count() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.episodes.size();
  return n;
}

BenchmarkReport run_benchmark(const std::vector<DomainKind>& domains, const std::vector<std::uint64_t>& seeds,
                              const std::vector<Planner>& planners, int count, const EnvConfig& env,
                              const RewardConfig& reward_config, int threads) {
  if (count < 0) throw std::invalid_argument("run_benchmark: negative problem count");
  BenchmarkReport report;
  for (auto domain : domains)
    for (auto seed : seeds)
      for (const auto& planner : planners)
        report.cells.push_back({domain, seed, planner.name, std::vector<EpisodeMetrics>(static_cast<std::size_t>(count)), {}, {}, {}});

  const auto per_cell = static_cast<std::size_t>(count);
  parallel_for(report.cells.size() * per_cell, threads, [&](std::size_t job) {
    auto& cell = report.cells[job / per_cell];
    const auto index = job % per_cell;
    const auto& planner = planners[(job / per_cell) % planners.size()];
    const auto instance = gen_problem(cell.domain, cell.seed, index, env);
    cell.episodes[index] = run_episode(planner, instance, env, reward_config);
  });
  for (auto& cell : report.cells) summarize(cell);
  return report;
}

void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "domain,seed,planner,problem_index,n_collisions,n_targets,score,steps_executed\n";
  for (const auto& cell : report.cells)
    for (std::size_t i = 0; i < cell.episodes.size(); ++i) {
      const auto& e = cell.episodes[i];
      out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(cell.domain), cell.seed, cell.planner, i,
                         e.n_collisions, e.n_targets, format_real(e.score), e.steps_executed);
    }
}

LearningCurve evaluate_checkpoint_series(const std::filesystem::path& dir, DomainKind domain, std::uint64_t seed,
                                         int count, const EnvConfig& env, const RewardConfig& reward_config,
                                         int threads) {
  LearningCurve curve;
  std::vector<Planner> planners{Planner::baseline()};
  std::vector<int> updates;
  for (const auto& path : list_checkpoints(dir)) {
    try {
      auto c = load_checkpoint(path);
      updates.push_back(c.training_update);
      planners.push_back(Planner::from_policy(path.filename().string(), std::move(c.params)));
    } catch (const std::exception& e) {
      curve.warnings.push_back(fmt::format("skipped {}: {}", path.string(), e.what()));
    }
  }

  const auto report = run_benchmark({domain}, {seed}, planners, count, env, reward_config, threads);
  const auto& base = report.cells.front();
  for (std::size_t p = 1; p < planners.size(); ++p) {
    const auto& cell = report.cells[p];
    curve.rows.push_back({updates[p - 1], domain, seed, cell.collisions, cell.targets, cell.score, base.collisions,
                          base.targets, base.score});
  }
  std::stable_sort(curve.rows.begin(), curve.rows.end(),
                   [](const auto& a, const auto& b) { return a.training_update < b.training_update; });
  return curve;
}

void write_learning_curve_csv(const LearningCurve& curve, std::ostream& out) {
  out << "training_update,domain,seed,mean_collisions,std_collisions,mean_targets,std_targets,mean_score,std_score,"
         "baseline_mean_collisions,baseline_mean_targets,baseline_mean_score\n";
  for (const auto& r : curve.rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.training_update, to_string(r.domain), r.seed,
                       format_real(r.collisions.mean), format_real(r.collisions.stddev), format_real(r.targets.mean),
                       format_real(r.targets.stddev), format_real(r.score.mean), format_real(r.score.stddev),
                       format_real(r.baseline_collisions.mean), format_real(r.baseline_targets.mean),
                       format_real(r.baseline_score.mean));
}

}  // namespace teamnav
