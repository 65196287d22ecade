#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "teamnav/geometry.hpp"
#include "teamnav/world.hpp"

namespace teamnav {

/// Per-agent displacement for one step, in world units.
using Action = Vec2d;

struct RewardConfig {
  double alpha = 10.0;   // weight on distance to the active target
  double beta1 = 1.0;    // slope outside an obstacle's keep-out radius
  double beta2 = 100.0;  // slope inside it

  void validate() const;
  bool operator==(const RewardConfig&) const = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Range&) const = default;
};

enum class DomainKind { StaticSimple, MultiAgentDynamic, MultiAgentDynamicLarge };

struct EnvConfig {
  Boundsd bounds = Boundsd::unit();
  // Unset: 300 steps for the three-target domains, 600 for the large domain.
  std::optional<int> horizon;
  int n_observed_obstacles = 10;
  Range agent_speed_range{0.008, 0.012};
  Range agent_radius_range{0.015, 0.025};
  Range obstacle_radius_range{0.03, 0.08};
  double target_radius = 0.02;
  // When false the dynamic domains get static obstacles.
  bool obstacle_pursuit = true;
  // Unset means twice the bounds diagonal.
  std::optional<double> far_sentinel_distance;

  int horizon_for(DomainKind kind) const;
  double far_sentinel() const { return far_sentinel_distance.value_or(2.0 * bounds.diagonal()); }
  void validate() const;
  bool operator==(const EnvConfig&) const = default;
};

std::string_view to_string(DomainKind kind);
/// Accepts the CLI spellings: static-simple, multi-agent-dynamic, multi-agent-dynamic-large.
std::optional<DomainKind> parse_domain(std::string_view name);
inline constexpr DomainKind kAllDomains[] = {DomainKind::StaticSimple, DomainKind::MultiAgentDynamic,
                                             DomainKind::MultiAgentDynamicLarge};

struct CollisionEvent {
  int agent_id = 0;
  EntityKind other_kind = EntityKind::Obstacle;
  int other_id = 0;

  bool operator==(const CollisionEvent&) const = default;
};

struct StepEvents {
  std::vector<double> rewards;  // indexed like world.agents
  int collisions = 0;
  int targets_reached = 0;
  bool done = false;
  std::vector<CollisionEvent> collision_events;
};

struct StepResult {
  WorldState world;
  StepEvents events;
};

struct ProblemInstance {
  WorldState world;
  DomainKind domain = DomainKind::StaticSimple;
  std::uint64_t seed = 0;
  std::uint64_t problem_index = 0;
};

/// Keep-out shaping term: beta1 (D - r) outside the radius, beta2 (D - r) inside.
inline double keep_out_term(double dist, double radius, const RewardConfig& rc) {
  const double gap = dist - radius;
  return gap >= 0.0 ? rc.beta1 * gap : rc.beta2 * gap;
}

/// Teammates always; in the large domain also every target except the one the agent is heading for.
std::vector<PseudoObstacle> pseudo_obstacles(const WorldState& world, int agent_id);

/// The agent's N closest real and pseudo obstacles (unpadded).
std::vector<ObservedEntity> observed_obstacles(const WorldState& world, int agent_id,
                                               const EnvConfig& config);

/// Active target, or the final target once the sequence is exhausted.
std::optional<int> target_slot(const AgentState& agent);

double reward(const WorldState& world, int agent_id, const EnvConfig& config,
              const RewardConfig& reward_config);

/// Pairwise overlaps: agent-obstacle and unordered agent-agent.
std::vector<CollisionEvent> find_collisions(const WorldState& world);

/// Horizon reached or every agent has exhausted its target sequence.
bool episode_done(const WorldState& world);

/// Advances the world by one synchronous step. Throws std::invalid_argument on an
/// action-count mismatch and NumericalError on non-finite actions.
StepResult step(const WorldState& world, std::span<const Action> actions, const EnvConfig& config,
                const RewardConfig& reward_config);

ProblemInstance gen_static_simple(std::uint64_t seed, std::uint64_t problem_index,
                                  const EnvConfig& config, std::string_view stream = "test");
ProblemInstance gen_dynamic(std::uint64_t seed, std::uint64_t problem_index, const EnvConfig& config,
                            std::string_view stream = "test");
ProblemInstance gen_dynamic_large(std::uint64_t seed, std::uint64_t problem_index,
                                  const EnvConfig& config, std::string_view stream = "test");
ProblemInstance gen_problem(DomainKind kind, std::uint64_t seed, std::uint64_t problem_index,
                            const EnvConfig& config, std::string_view stream = "test");

}  // namespace teamnav
