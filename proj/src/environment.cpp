#include "teamnav/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "teamnav/errors.hpp"
#include "teamnav/rng.hpp"

namespace teamnav {

void RewardConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("reward.alpha must be positive");
  if (!(beta1 >= 0.0)) throw ConfigError("reward.beta1 must be non-negative");
  if (!(beta2 > beta1)) throw ConfigError("reward.beta2 must exceed reward.beta1");
}

void EnvConfig::validate() const {
  if (bounds.degenerate()) throw ConfigError("env.bounds is degenerate");
  if (horizon && *horizon < 1) throw ConfigError("env.horizon must be at least 1");
  if (n_observed_obstacles < 1) throw ConfigError("env.n_observed_obstacles must be at least 1");
  auto check = [](const Range& r, const char* key) {
    if (!(r.lo > 0.0) || !(r.lo <= r.hi)) throw ConfigError(fmt::format("env.{} must satisfy 0 < lo <= hi", key));
  };
  check(agent_speed_range, "agent_speed_range");
  check(agent_radius_range, "agent_radius_range");
  check(obstacle_radius_range, "obstacle_radius_range");
  if (!(target_radius > 0.0)) throw ConfigError("env.target_radius must be positive");
  if (far_sentinel_distance && !(*far_sentinel_distance > 0.0))
    throw ConfigError("env.far_sentinel_distance must be positive");
}

int EnvConfig::horizon_for(DomainKind kind) const {
  if (horizon) return *horizon;
  return kind == DomainKind::MultiAgentDynamicLarge ? 600 : 300;
}

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::StaticSimple: return "static-simple";
    case DomainKind::MultiAgentDynamic: return "multi-agent-dynamic";
    case DomainKind::MultiAgentDynamicLarge: return "multi-agent-dynamic-large";
  }
  return "unknown";
}

std::optional<DomainKind> parse_domain(std::string_view name) {
  for (auto kind : kAllDomains)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

std::optional<int> target_slot(const AgentState& agent) {
  if (agent.target_sequence.empty()) return std::nullopt;
  if (agent.exhausted()) return agent.target_sequence.back();
  return agent.target_sequence[agent.cursor];
}

std::vector<PseudoObstacle> pseudo_obstacles(const WorldState& world, int agent_id) {
  std::vector<PseudoObstacle> extra;
  for (const auto& mate : world.agents)
    if (mate.id != agent_id) extra.push_back({EntityKind::Agent, mate.id, mate.position, mate.radius});

  if (world.inactive_targets_are_obstacles) {
    const auto heading = target_slot(world.agent(agent_id));
    for (const auto& t : world.targets)
      if (!heading || t.id != *heading) extra.push_back({EntityKind::Target, t.id, t.position, t.radius});
  }
  return extra;
}

std::vector<ObservedEntity> observed_obstacles(const WorldState& world, int agent_id,
                                               const EnvConfig& config) {
  const auto& agent = world.agent(agent_id);
  return nearest_k_obstacles(world, agent.position, static_cast<std::size_t>(config.n_observed_obstacles),
                             pseudo_obstacles(world, agent_id));
}

double reward(const WorldState& world, int agent_id, const EnvConfig& config,
              const RewardConfig& reward_config) {
  const auto& agent = world.agent(agent_id);
  double r = 0.0;
  if (const auto active = agent.active_target()) {
    r -= reward_config.alpha * distance(agent.position, world.target(*active).position);
  }

  const auto near = observed_obstacles(world, agent_id, config);
  for (const auto& e : near) r += keep_out_term(e.distance, e.radius, reward_config);
  const auto padding = static_cast<std::size_t>(config.n_observed_obstacles) - near.size();
  r += static_cast<double>(padding) * keep_out_term(config.far_sentinel(), 0.0, reward_config);
  return r;
}

std::vector<CollisionEvent> find_collisions(const WorldState& world) {
  std::vector<CollisionEvent> events;
  for (const auto& a : world.agents) {
    for (const auto& o : world.obstacles)
      if (distance(a.position, o.position) < o.radius + a.radius)
        events.push_back({a.id, EntityKind::Obstacle, o.id});
  }
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    for (std::size_t j = i + 1; j < world.agents.size(); ++j) {
      const auto& a = world.agents[i];
      const auto& b = world.agents[j];
      if (distance(a.position, b.position) < a.radius + b.radius)
        events.push_back({a.id, EntityKind::Agent, b.id});
    }
  }
  return events;
}

bool episode_done(const WorldState& world) {
  if (world.time_step >= world.horizon) return true;
  return std::all_of(world.agents.begin(), world.agents.end(),
                     [](const AgentState& a) { return a.exhausted(); });
}

namespace {

Vec2d move_toward(const Vec2d& from, const Vec2d& to, double speed) {
  const Vec2d delta = to - from;
  const double d = delta.norm();
  if (d == 0.0) return from;
  if (d <= speed) return to;
  return from + delta * (speed / d);
}

}  // namespace

StepResult step(const WorldState& world, std::span<const Action> actions, const EnvConfig& config,
                const RewardConfig& reward_config) {
  if (actions.size() != world.agents.size())
    throw std::invalid_argument(fmt::format("step: expected {} actions, got {}", world.agents.size(),
                                            actions.size()));
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (!actions[i].allFinite())
      throw NumericalError(fmt::format("step: non-finite action for agent {} at t={}",
                                       world.agents[i].id, world.time_step));

  StepResult out{world, {}};
  WorldState& next = out.world;

  for (std::size_t i = 0; i < next.agents.size(); ++i) {
    auto& agent = next.agents[i];
    Action a = actions[i];
    const double norm = a.norm();
    if (norm > agent.speed) a *= agent.speed / norm;
    agent.position = clamp_to_bounds(Vec2d(agent.position + a), next.bounds);
  }

  // Obstacles chase where their agent was at the start of the step (synchronous update).
  for (auto& o : next.obstacles) {
    if (const auto* p = std::get_if<PursuitBehavior>(&o.behavior)) {
      const auto& prey = world.agent(p->agent_id);
      o.position = clamp_to_bounds(move_toward(o.position, prey.position, p->speed), next.bounds);
    }
  }

  auto& events = out.events;
  events.collision_events = find_collisions(next);
  events.collisions = static_cast<int>(events.collision_events.size());

  for (auto& agent : next.agents) {
    const auto active = agent.active_target();
    if (!active) continue;
    const auto& target = next.target(*active);
    if (distance(agent.position, target.position) <= target.radius) {
      ++agent.cursor;
      ++agent.targets_reached;
      ++events.targets_reached;
    }
  }

  events.rewards.reserve(next.agents.size());
  for (const auto& agent : next.agents)
    events.rewards.push_back(reward(next, agent.id, config, reward_config));

  ++next.time_step;
  events.done = episode_done(next);
  return out;
}

namespace {

std::vector<int> random_order(int n, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  return order;
}

Vec2d uniform_point(const Boundsd& b, Rng& rng) {
  const double x = rng.uniform(b.lo.x(), b.hi.x());
  const double y = rng.uniform(b.lo.y(), b.hi.y());
  return {x, y};
}

struct Layout {
  int agents = 1;
  int targets = 3;
  int obstacles = 10;
  bool pursuit = false;
  bool inactive_targets_are_obstacles = false;
};

constexpr int kMaxRejections = 1000;

ProblemInstance generate(DomainKind kind, const Layout& layout, std::uint64_t seed,
                         std::uint64_t problem_index, const EnvConfig& config, std::string_view stream) {
  config.validate();
  Rng rng(seed, problem_index, fmt::format("{}/{}", stream, to_string(kind)));

  ProblemInstance inst;
  inst.domain = kind;
  inst.seed = seed;
  inst.problem_index = problem_index;
  WorldState& w = inst.world;
  w.bounds = config.bounds;
  w.horizon = config.horizon_for(kind);
  w.inactive_targets_are_obstacles = layout.inactive_targets_are_obstacles;

  for (int i = 0; i < layout.agents; ++i) {
    AgentState a;
    a.id = i;
    a.position = uniform_point(config.bounds, rng);
    a.speed = rng.uniform(config.agent_speed_range.lo, config.agent_speed_range.hi);
    a.radius = rng.uniform(config.agent_radius_range.lo, config.agent_radius_range.hi);
    w.agents.push_back(std::move(a));
  }
  for (int i = 0; i < layout.targets; ++i)
    w.targets.push_back({i, uniform_point(config.bounds, rng), config.target_radius});
  for (auto& a : w.agents) a.target_sequence = random_order(layout.targets, rng);

  for (int i = 0; i < layout.obstacles; ++i) {
    Obstacle o;
    o.id = i;
    int attempts = 0;
    for (;;) {
      o.radius = rng.uniform(config.obstacle_radius_range.lo, config.obstacle_radius_range.hi);
      o.position = uniform_point(config.bounds, rng);
      const bool clear_targets = std::all_of(w.targets.begin(), w.targets.end(), [&](const Target& t) {
        return distance(o.position, t.position) >= o.radius + t.radius;
      });
      const bool clear_agents = std::all_of(w.agents.begin(), w.agents.end(), [&](const AgentState& a) {
        return distance(o.position, a.position) >= o.radius + a.radius;
      });
      if (clear_targets && clear_agents) break;
      if (++attempts >= kMaxRejections)
        throw GenerationError(fmt::format("{} problem {} (seed {}): could not place obstacle {} after {} tries",
                                          to_string(kind), problem_index, seed, i, kMaxRejections));
    }
    if (layout.pursuit) {
      const auto prey = static_cast<int>(rng.below(static_cast<std::uint64_t>(layout.agents)));
      o.behavior = PursuitBehavior{w.agents[static_cast<std::size_t>(prey)].speed, prey};
    }
    w.obstacles.push_back(std::move(o));
  }
  return inst;
}

}  // namespace

ProblemInstance gen_static_simple(std::uint64_t seed, std::uint64_t problem_index,
                                  const EnvConfig& config, std::string_view stream) {
  return generate(DomainKind::StaticSimple, {1, 3, 10, false, false}, seed, problem_index, config, stream);
}

ProblemInstance gen_dynamic(std::uint64_t seed, std::uint64_t problem_index, const EnvConfig& config,
                            std::string_view stream) {
  return generate(DomainKind::MultiAgentDynamic, {3, 3, 10, config.obstacle_pursuit, false}, seed,
                  problem_index, config, stream);
}

ProblemInstance gen_dynamic_large(std::uint64_t seed, std::uint64_t problem_index,
                                  const EnvConfig& config, std::string_view stream) {
  return generate(DomainKind::MultiAgentDynamicLarge, {3, 10, 10, config.obstacle_pursuit, true}, seed,
                  problem_index, config, stream);
}

ProblemInstance gen_problem(DomainKind kind, std::uint64_t seed, std::uint64_t problem_index,
                            const EnvConfig& config, std::string_view stream) {
  switch (kind) {
    case DomainKind::StaticSimple: return gen_static_simple(seed, problem_index, config, stream);
    case DomainKind::MultiAgentDynamic: return gen_dynamic(seed, problem_index, config, stream);
    case DomainKind::MultiAgentDynamicLarge: return gen_dynamic_large(seed, problem_index, config, stream);
  }
  throw std::invalid_argument("unknown domain kind");
}

}  // namespace teamnav
