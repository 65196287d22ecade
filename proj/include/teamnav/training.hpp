#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "teamnav/autodiff.hpp"
#include "teamnav/environment.hpp"
#include "teamnav/policy.hpp"
#include "teamnav/rng.hpp"

namespace teamnav {

struct TrainConfig {
  double gamma = 0.99;
  int batch_size = 8;
  int total_updates = 4000;  // gradient updates, each on batch_size fresh episodes
  double learning_rate = 8e-3;
  double weight_decay = 1e-4;
  bool decoupled_weight_decay = false;
  int checkpoint_every = 100;
  DomainKind train_domain = DomainKind::StaticSimple;
  std::uint64_t master_seed = 10;
  // Per-step discounted reward-to-go minus its batch mean, instead of one advantage per episode.
  bool reward_to_go = false;
  std::optional<double> max_grad_norm;
  // Fill the wall_ms column of the training log (makes the log run-dependent).
  bool record_wall_time = false;
  // All episodes of a batch replay one problem (still a fresh problem per update).
  bool shared_batch_instance = false;

  AdamConfig adam() const {
    return {learning_rate, weight_decay, 0.9, 0.999, 1e-8, decoupled_weight_decay};
  }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

enum class RolloutMode { Stochastic, Deterministic };

/// One agent's experience over an episode.
struct Trajectory {
  Tensor observations;  // T x D
  Tensor actions;       // T x 2, raw policy samples
  std::vector<double> log_probs;
  std::vector<double> rewards;
  double episode_return = 0.0;
  // Whole-episode totals across all agents.
  int collisions = 0;
  int targets_reached = 0;

  std::size_t length() const { return rewards.size(); }
};

double discounted_return(std::span<const double> rewards, double gamma);

/// A_i = G_i - mean(G). Requires at least two returns.
std::vector<double> batch_advantages(std::span<const double> returns);

/// Runs `instance` to completion with every agent driven by `params` from its
/// own observation; records the experience of agent `learner`.
Trajectory rollout(const PolicyParams& params, const ProblemInstance& instance, const EnvConfig& env,
                   const RewardConfig& reward_config, Rng& rng, RolloutMode mode, double gamma,
                   int learner = 0);

struct UpdateStats {
  double mean_return = 0.0;
  double std_return = 0.0;
  double grad_norm = 0.0;
  double mean_advantage_abs = 0.0;
  double loss = 0.0;
};

/// Per-row weights w such that the surrogate loss is sum_t w_t * log_prob_t.
std::vector<double> surrogate_weights(std::span<const Trajectory> batch, const TrainConfig& config);

/// L = -(1/B) sum_episodes sum_t A * log_prob_t as a tape graph over the stacked batch.
Var surrogate_loss_graph(Tape& tape, std::span<const Var> param_vars, std::span<const Trajectory> batch,
                         std::span<const double> weights);

/// Gradient of the surrogate loss (without weight decay) in PolicyParams::tensors() order.
std::vector<Tensor> surrogate_gradient(const PolicyParams& params, std::span<const Trajectory> batch,
                                       const TrainConfig& config, double* loss = nullptr);

UpdateStats policy_gradient_update(PolicyParams& params, std::span<const Trajectory> batch, AdamState& adam,
                                   const TrainConfig& config);

struct TrainLogRow {
  int update_index = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double grad_norm = 0.0;
  double mean_advantage_abs = 0.0;
  double wall_ms = 0.0;
};

struct TrainingState {
  PolicyParams params;
  AdamState adam;
  int update = 0;  // updates completed
};

TrainingState init_training(const TrainConfig& config, const EnvConfig& env);

struct TrainHooks {
  std::function<void(const TrainLogRow&)> on_update;
  /// Called for the initial state, after every checkpoint_every updates, and after the last update.
  std::function<void(const TrainingState&)> on_checkpoint;
};

/// Continues `state` until config.total_updates updates have been applied.
void train(TrainingState& state, const TrainConfig& config, const EnvConfig& env,
           const RewardConfig& reward_config, const TrainHooks& hooks = {}, int threads = 1);

/// Problem used for episode `episode` of update `update`; disjoint from evaluation streams.
ProblemInstance training_instance(const TrainConfig& config, const EnvConfig& env, int update, int episode);

}  // namespace teamnav
