#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "teamnav/environment.hpp"
#include "teamnav/policy.hpp"

namespace teamnav {

inline constexpr double kScoreTargetWeight = 10.0;

/// S = 10 n_targets - n_collisions.
constexpr double weighted_score(int n_targets, int n_collisions) {
  return kScoreTargetWeight * n_targets - n_collisions;
}

struct EpisodeMetrics {
  int n_collisions = 0;
  int n_targets = 0;
  double score = 0.0;
  int steps_executed = 0;

  bool operator==(const EpisodeMetrics&) const = default;
};

/// Either the straight-line baseline or a policy evaluated with mean actions.
struct Planner {
  std::string name = "baseline";
  std::optional<PolicyParams> policy;

  static Planner baseline() { return {}; }
  static Planner from_policy(std::string name, PolicyParams params) { return {std::move(name), std::move(params)}; }
  bool is_baseline() const { return !policy.has_value(); }
};

/// Actions the planner takes in `world` (world units, one per agent).
std::vector<Action> planner_actions(const Planner& planner, const WorldState& world, const EnvConfig& env);

/// Called after every step with the pre-step world, the applied actions, and the result.
using StepObserver = std::function<void(const WorldState&, const std::vector<Action>&, const StepResult&)>;

EpisodeMetrics run_episode(const Planner& planner, const ProblemInstance& instance, const EnvConfig& env,
                           const RewardConfig& reward_config, const StepObserver& observer = {});

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
};

MetricSummary summarize(const std::vector<double>& values);

struct BenchmarkCell {
  DomainKind domain = DomainKind::StaticSimple;
  std::uint64_t seed = 0;
  std::string planner;
  std::vector<EpisodeMetrics> episodes;  // indexed by problem_index
  MetricSummary collisions;
  MetricSummary targets;
  MetricSummary score;
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;  // (domain, seed, planner) order

  const BenchmarkCell& cell(DomainKind domain, std::uint64_t seed, const std::string& planner) const;
  std::size_t episode_count() const;
};

void summarize(BenchmarkCell& cell);

BenchmarkReport run_benchmark(const std::vector<DomainKind>& domains, const std::vector<std::uint64_t>& seeds,
                              const std::vector<Planner>& planners, int count, const EnvConfig& env,
                              const RewardConfig& reward_config, int threads = 1);

/// Columns: domain, seed, planner, problem_index, n_collisions, n_targets, score, steps_executed.
void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out);

struct LearningCurveRow {
  int training_update = 0;
  DomainKind domain = DomainKind::StaticSimple;
  std::uint64_t seed = 0;
  MetricSummary collisions;
  MetricSummary targets;
  MetricSummary score;
  MetricSummary baseline_collisions;
  MetricSummary baseline_targets;
  MetricSummary baseline_score;
};

struct LearningCurve {
  std::vector<LearningCurveRow> rows;  // ascending training_update
  std::vector<std::string> warnings;   // skipped checkpoints
};

/// Evaluates every checkpoint in `dir` on the same `count` problems.
LearningCurve evaluate_checkpoint_series(const std::filesystem::path& dir, DomainKind domain, std::uint64_t seed,
                                         int count, const EnvConfig& env, const RewardConfig& reward_config,
                                         int threads = 1);

void write_learning_curve_csv(const LearningCurve& curve, std::ostream& out);

/// 17 significant digits, dot decimal separator.
std::string format_real(double v);

}  // namespace teamnav
