#include "teamnav/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "teamnav/errors.hpp"

namespace teamnav {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

Observation encode_observation(const WorldState& world, int agent_id, const EnvConfig& config) {
  const int n = config.n_observed_obstacles;
  Observation obs(observation_size(n));

  const Vec2d lo = world.bounds.lo;
  const Vec2d extent = world.bounds.extent();
  const double diag = world.bounds.diagonal();
  auto norm_pos = [&](const Vec2d& p) -> Vec2d { return (p - lo).cwiseQuotient(extent); };

  const auto& agent = world.agent(agent_id);
  const auto slot = target_slot(agent);
  const Vec2d target = slot ? world.target(*slot).position : agent.position;

  obs.segment<2>(0) = norm_pos(agent.position).transpose();
  obs.segment<2>(2) = norm_pos(target).transpose();

  const auto near = observed_obstacles(world, agent_id, config);
  for (int i = 0; i < n; ++i) {
    const auto at = 4 + 4 * i;
    if (static_cast<std::size_t>(i) < near.size()) {
      const auto& e = near[static_cast<std::size_t>(i)];
      obs.segment<2>(at) = norm_pos(e.position).transpose();
      obs[at + 2] = e.radius / diag;
      obs[at + 3] = e.distance / diag;
    } else {
      obs.segment<4>(at) << 0.0, 0.0, 0.0, config.far_sentinel() / diag;
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------

PolicyParams PolicyParams::zeros(std::vector<int> dims) {
  if (dims.size() < 2 || dims.back() != 2) throw std::invalid_argument("policy dims must end with 2");
  PolicyParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    p.weights.push_back(Tensor::Zero(dims[l], dims[l + 1]));
    p.biases.push_back(Tensor::Zero(1, dims[l + 1]));
  }
  p.log_std = Tensor::Constant(1, 2, kInitialLogStd);
  p.dims = std::move(dims);
  return p;
}

PolicyParams PolicyParams::random(std::vector<int> dims, Rng& rng, double output_gain) {
  PolicyParams p = zeros(std::move(dims));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    auto& w = p.weights[l];
    double s = 1.0 / std::sqrt(static_cast<double>(w.rows()));
    if (l + 1 == p.weights.size()) s *= output_gain;
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = s * rng.normal();
  }
  return p;
}

std::size_t PolicyParams::num_parameters() const {
  std::size_t n = static_cast<std::size_t>(log_std.size());
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

std::vector<Tensor> PolicyParams::tensors() const {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l]);
    out.push_back(biases[l]);
  }
  out.push_back(log_std);
  return out;
}

void PolicyParams::assign(std::span<const Tensor> tensors) {
  if (tensors.size() != 2 * weights.size() + 1) throw std::invalid_argument("PolicyParams::assign: tensor count");
  auto put = [](Tensor& dst, const Tensor& src) {
    if (dst.rows() != src.rows() || dst.cols() != src.cols())
      throw std::invalid_argument("PolicyParams::assign: shape mismatch");
    dst = src;
  };
  for (std::size_t l = 0; l < weights.size(); ++l) {
    put(weights[l], tensors[2 * l]);
    put(biases[l], tensors[2 * l + 1]);
  }
  put(log_std, tensors.back());
}

bool PolicyParams::operator==(const PolicyParams& other) const {
  if (dims != other.dims || weights.size() != other.weights.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  return log_std == other.log_std;
}

// ---------------------------------------------------------------------------

Vec2d policy_mean(const PolicyParams& params, const Observation& obs) {
  if (obs.size() != params.dims.front())
    throw std::invalid_argument(
        fmt::format("policy_mean: observation has {} entries, network expects {}", obs.size(), params.dims.front()));
  Eigen::RowVectorXd h = obs;
  const auto last = params.num_layers() - 1;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Eigen::RowVectorXd z = h * params.weights[l] + params.biases[l];
    h = l == last ? z : Eigen::RowVectorXd(z.array().tanh());
  }
  if (!h.allFinite()) throw NumericalError("policy_mean: non-finite network output");
  return h.transpose();
}

double gaussian_log_prob(const Vec2d& action, const Vec2d& mean, const Tensor& log_std) {
  double lp = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double s = log_std(0, j);
    const double z = (action[j] - mean[j]) * std::exp(-s);
    lp += -0.5 * z * z - s - kHalfLog2Pi;
  }
  return lp;
}

ActionSample sample_action(const PolicyParams& params, const Observation& obs, Rng& rng) {
  const Vec2d mean = policy_mean(params, obs);
  ActionSample out;
  for (int j = 0; j < 2; ++j) out.action[j] = mean[j] + std::exp(params.log_std(0, j)) * rng.normal();
  out.log_prob = gaussian_log_prob(out.action, mean, params.log_std);
  return out;
}

double log_prob(const PolicyParams& params, const Observation& obs, const Vec2d& action) {
  return gaussian_log_prob(action, policy_mean(params, obs), params.log_std);
}

Vec2d deterministic_action(const PolicyParams& params, const Observation& obs) {
  return policy_mean(params, obs);
}

// ---------------------------------------------------------------------------

Var policy_mean_graph(Tape& tape, std::span<const Var> param_vars, Var obs) {
  const std::size_t layers = (param_vars.size() - 1) / 2;
  Var h = obs;
  for (std::size_t l = 0; l < layers; ++l) {
    h = affine(tape, h, param_vars[2 * l], param_vars[2 * l + 1]);
    if (l + 1 < layers) h = tanh(tape, h);
  }
  return h;
}

Var log_prob_graph(Tape& tape, std::span<const Var> param_vars, Var obs, Var actions) {
  const Var mean = policy_mean_graph(tape, param_vars, obs);
  const auto rows = tape.value(obs).rows();
  const Var log_std = repeat_rows(tape, param_vars.back(), rows);
  const Var inv_std = exp(tape, scale(tape, log_std, -1.0));
  const Var z = mul(tape, sub(tape, actions, mean), inv_std);
  const Var quad = scale(tape, square(tape, z), -0.5);
  const Var norm = tape.constant(Tensor::Constant(rows, 2, -kHalfLog2Pi));
  return add(tape, sub(tape, quad, log_std), norm);
}

}  // namespace teamnav
