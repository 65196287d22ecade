#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "teamnav/autodiff.hpp"
#include "teamnav/environment.hpp"
#include "teamnav/rng.hpp"

namespace teamnav {

/// [agent x, agent y, target x, target y, then N blocks of (x, y, radius, distance)].
/// Coordinates are scaled to [0, 1] by the bounds extent, lengths by the bounds diagonal.
using Observation = Eigen::RowVectorXd;

constexpr int observation_size(int n_observed) { return 4 + 4 * n_observed; }

Observation encode_observation(const WorldState& world, int agent_id, const EnvConfig& config);

/// Gaussian MLP policy: affine/tanh hidden layers, linear mean head, and a
/// state-independent learnable log standard deviation. Weights are in x out.
struct PolicyParams {
  std::vector<int> dims;  // {input, hidden..., 2}
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
  Tensor log_std;  // 1 x 2

  static constexpr double kInitialLogStd = -0.69314718055994530942;  // log(0.5)

  static PolicyParams zeros(std::vector<int> dims);
  static PolicyParams random(std::vector<int> dims, Rng& rng, double output_gain = 0.01);
  static std::vector<int> default_dims(int n_observed) { return {observation_size(n_observed), 64, 64, 2}; }

  std::size_t num_layers() const { return weights.size(); }
  std::size_t num_parameters() const;

  /// Flat parameter list: W0, b0, W1, b1, ..., log_std.
  std::vector<Tensor> tensors() const;
  void assign(std::span<const Tensor> tensors);

  bool operator==(const PolicyParams& other) const;
};

/// Raw network output: a displacement in units of the agent's speed.
Vec2d policy_mean(const PolicyParams& params, const Observation& obs);

struct ActionSample {
  Vec2d action = Vec2d::Zero();  // raw Gaussian sample, before speed scaling and clipping
  double log_prob = 0.0;
};

ActionSample sample_action(const PolicyParams& params, const Observation& obs, Rng& rng);
double log_prob(const PolicyParams& params, const Observation& obs, const Vec2d& action);
/// Gaussian log density given the mean; shared by sample_action and log_prob.
double gaussian_log_prob(const Vec2d& action, const Vec2d& mean, const Tensor& log_std);
Vec2d deterministic_action(const PolicyParams& params, const Observation& obs);

/// Network output converted to a world displacement for an agent of the given speed.
inline Action to_world_action(const Vec2d& raw, double agent_speed) { return raw * agent_speed; }

// Tape versions. `param_vars` follows the PolicyParams::tensors() order.

/// Batched mean head: obs is T x D, result T x 2.
Var policy_mean_graph(Tape& tape, std::span<const Var> param_vars, Var obs);
/// Elementwise Gaussian log density, T x 2; row sums are per-step log-probabilities.
Var log_prob_graph(Tape& tape, std::span<const Var> param_vars, Var obs, Var actions);

}  // namespace teamnav
