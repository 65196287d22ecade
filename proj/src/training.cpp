#include "teamnav/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "teamnav/errors.hpp"
#include "teamnav/parallel.hpp"

namespace teamnav {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma must lie in (0, 1]");
  if (batch_size < 2) throw ConfigError("train.batch_size must be at least 2");
  if (total_updates < 0) throw ConfigError("train.total_updates must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay must be non-negative");
  if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be at least 1");
  if (max_grad_norm && !(*max_grad_norm > 0.0)) throw ConfigError("train.max_grad_norm must be positive");
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double g = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    g += discount * r;
    discount *= gamma;
  }
  return g;
}

std::vector<double> batch_advantages(std::span<const double> returns) {
  if (returns.size() < 2) throw std::invalid_argument("batch_advantages: need at least two returns");
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  std::vector<double> adv;
  adv.reserve(returns.size());
  for (double g : returns) adv.push_back(g - mean);
  return adv;
}

Trajectory rollout(const PolicyParams& params, const ProblemInstance& instance, const EnvConfig& env,
                   const RewardConfig& reward_config, Rng& rng, RolloutMode mode, double gamma, int learner) {
  WorldState world = instance.world;
  const auto n_agents = world.agents.size();
  if (learner < 0 || static_cast<std::size_t>(learner) >= n_agents)
    throw std::invalid_argument("rollout: learner index out of range");

  const auto dim = observation_size(env.n_observed_obstacles);
  std::vector<Observation> obs_rows;
  std::vector<Vec2d> action_rows;
  Trajectory traj;

  std::vector<Action> actions(n_agents);
  bool done = episode_done(world);
  while (!done) {
    for (std::size_t i = 0; i < n_agents; ++i) {
      const auto& agent = world.agents[i];
      Observation obs = encode_observation(world, agent.id, env);
      ActionSample s;
      if (mode == RolloutMode::Stochastic) {
        s = sample_action(params, obs, rng);
      } else {
        s.action = deterministic_action(params, obs);
        s.log_prob = gaussian_log_prob(s.action, s.action, params.log_std);
      }
      if (!s.action.allFinite() || !std::isfinite(s.log_prob))
        throw NumericalError(fmt::format("rollout: non-finite policy output at t={}", world.time_step));
      actions[i] = to_world_action(s.action, agent.speed);
      if (static_cast<int>(i) == learner) {
        obs_rows.push_back(std::move(obs));
        action_rows.push_back(s.action);
        traj.log_probs.push_back(s.log_prob);
      }
    }
    auto result = step(world, actions, env, reward_config);
    traj.rewards.push_back(result.events.rewards[static_cast<std::size_t>(learner)]);
    traj.collisions += result.events.collisions;
    traj.targets_reached += result.events.targets_reached;
    done = result.events.done;
    world = std::move(result.world);
  }

  const auto T = static_cast<Eigen::Index>(obs_rows.size());
  traj.observations.resize(T, dim);
  traj.actions.resize(T, 2);
  for (Eigen::Index t = 0; t < T; ++t) {
    traj.observations.row(t) = obs_rows[static_cast<std::size_t>(t)];
    traj.actions.row(t) = action_rows[static_cast<std::size_t>(t)].transpose();
  }
  traj.episode_return = discounted_return(traj.rewards, gamma);
  return traj;
}

std::vector<double> surrogate_weights(std::span<const Trajectory> batch, const TrainConfig& config) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> w;

  if (!config.reward_to_go) {
    std::vector<double> returns;
    for (const auto& tr : batch) returns.push_back(tr.episode_return);
    const auto adv = batch_advantages(returns);
    for (std::size_t e = 0; e < batch.size(); ++e) w.insert(w.end(), batch[e].length(), -adv[e] * inv_b);
    return w;
  }

  // Reward-to-go variant: baseline is the batch mean at the same time index
  // (finished episodes contribute zero).
  std::size_t longest = 0;
  std::vector<std::vector<double>> rtg(batch.size());
  for (std::size_t e = 0; e < batch.size(); ++e) {
    const auto& r = batch[e].rewards;
    rtg[e].resize(r.size());
    double acc = 0.0;
    for (std::size_t t = r.size(); t-- > 0;) rtg[e][t] = acc = r[t] + config.gamma * acc;
    longest = std::max(longest, r.size());
  }
  std::vector<double> mean(longest, 0.0);
  for (const auto& g : rtg)
    for (std::size_t t = 0; t < g.size(); ++t) mean[t] += g[t] * inv_b;
  for (const auto& g : rtg)
    for (std::size_t t = 0; t < g.size(); ++t) w.push_back(-(g[t] - mean[t]) * inv_b);
  return w;
}

Var surrogate_loss_graph(Tape& tape, std::span<const Var> param_vars, std::span<const Trajectory> batch,
                         std::span<const double> weights) {
  Eigen::Index rows = 0;
  for (const auto& tr : batch) rows += tr.observations.rows();
  if (static_cast<Eigen::Index>(weights.size()) != rows)
    throw std::invalid_argument("surrogate_loss_graph: one weight per step required");
  if (rows == 0) return tape.constant(Tensor::Zero(1, 1));

  const auto dim = batch.front().observations.cols();
  Tensor obs(rows, dim);
  Tensor act(rows, 2);
  Tensor w(rows, 2);
  Eigen::Index at = 0;
  for (const auto& tr : batch) {
    const auto T = tr.observations.rows();
    obs.middleRows(at, T) = tr.observations;
    act.middleRows(at, T) = tr.actions;
    at += T;
  }
  for (Eigen::Index r = 0; r < rows; ++r) w.row(r).setConstant(weights[static_cast<std::size_t>(r)]);

  const Var lp = log_prob_graph(tape, param_vars, tape.constant(std::move(obs)), tape.constant(std::move(act)));
  return sum(tape, mul(tape, lp, tape.constant(std::move(w))));
}

std::vector<Tensor> surrogate_gradient(const PolicyParams& params, std::span<const Trajectory> batch,
                                       const TrainConfig& config, double* loss) {
  const auto weights = surrogate_weights(batch, config);
  auto [value, grads] = value_and_grad(
      [&](Tape& tape, std::span<const Var> vars) { return surrogate_loss_graph(tape, vars, batch, weights); },
      params.tensors());
  if (!std::isfinite(value)) throw NumericalError("policy_gradient_update: non-finite surrogate loss");
  if (loss) *loss = value;
  return grads;
}

UpdateStats policy_gradient_update(PolicyParams& params, std::span<const Trajectory> batch, AdamState& adam,
                                   const TrainConfig& config) {
  if (static_cast<int>(batch.size()) != config.batch_size)
    throw std::invalid_argument(
        fmt::format("policy_gradient_update: batch has {} episodes, expected {}", batch.size(), config.batch_size));

  UpdateStats stats;
  auto grads = surrogate_gradient(params, batch, config, &stats.loss);

  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  stats.grad_norm = std::sqrt(sq);
  if (config.max_grad_norm && stats.grad_norm > *config.max_grad_norm)
    for (auto& g : grads) g *= *config.max_grad_norm / stats.grad_norm;

  auto tensors = params.tensors();
  adam_step(tensors, grads, adam);
  params.assign(tensors);

  std::vector<double> returns;
  for (const auto& tr : batch) returns.push_back(tr.episode_return);
  const auto n = static_cast<double>(returns.size());
  stats.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double var = 0.0;
  for (double g : returns) var += (g - stats.mean_return) * (g - stats.mean_return);
  stats.std_return = std::sqrt(var / (n - 1.0));
  for (double a : batch_advantages(returns)) stats.mean_advantage_abs += std::abs(a) / n;
  return stats;
}

TrainingState init_training(const TrainConfig& config, const EnvConfig& env) {
  Rng rng(config.master_seed, 0, "init");
  TrainingState state;
  state.params = PolicyParams::random(PolicyParams::default_dims(env.n_observed_obstacles), rng);
  state.adam = AdamState(config.adam(), state.params.tensors());
  return state;
}

ProblemInstance training_instance(const TrainConfig& config, const EnvConfig& env, int update, int episode) {
  const auto index = config.shared_batch_instance
                         ? static_cast<std::uint64_t>(update)
                         : static_cast<std::uint64_t>(update) * static_cast<std::uint64_t>(config.batch_size) +
                               static_cast<std::uint64_t>(episode);
  return gen_problem(config.train_domain, config.master_seed, index, env, "train");
}

void train(TrainingState& state, const TrainConfig& config, const EnvConfig& env,
           const RewardConfig& reward_config, const TrainHooks& hooks, int threads) {
  config.validate();
  env.validate();
  reward_config.validate();

  if (state.update == 0 && hooks.on_checkpoint) hooks.on_checkpoint(state);

  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<Trajectory> batch(batch_size);
  while (state.update < config.total_updates) {
    const auto start = std::chrono::steady_clock::now();
    const int u = state.update;
    try {
      parallel_for(batch_size, threads, [&](std::size_t e) {
        const auto instance = training_instance(config, env, u, static_cast<int>(e));
        Rng rng(config.master_seed,
                static_cast<std::uint64_t>(u) * static_cast<std::uint64_t>(config.batch_size) + e, "rollout");
        batch[e] = rollout(state.params, instance, env, reward_config, rng, RolloutMode::Stochastic, config.gamma);
      });
      const auto stats = policy_gradient_update(state.params, batch, state.adam, config);
      ++state.update;

      if (hooks.on_update) {
        TrainLogRow row{u, stats.mean_return, stats.std_return, stats.grad_norm, stats.mean_advantage_abs, 0.0};
        if (config.record_wall_time)
          row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        hooks.on_update(row);
      }
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("update {}: {}", u, e.what()));
    }
    if (hooks.on_checkpoint &&
        (state.update % config.checkpoint_every == 0 || state.update == config.total_updates))
      hooks.on_checkpoint(state);
  }
}

}  // namespace teamnav
