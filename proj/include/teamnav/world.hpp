#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "teamnav/geometry.hpp"

namespace teamnav {

struct AgentState {
  int id = 0;
  Vec2d position = Vec2d::Zero();
  double speed = 0.01;  // max displacement per step
  double radius = 0.02;
  std::vector<int> target_sequence;
  std::size_t cursor = 0;
  int targets_reached = 0;

  bool exhausted() const { return cursor >= target_sequence.size(); }
  std::optional<int> active_target() const {
    if (exhausted()) return std::nullopt;
    return target_sequence[cursor];
  }

  bool operator==(const AgentState&) const = default;
};

struct Target {
  int id = 0;
  Vec2d position = Vec2d::Zero();
  double radius = 0.02;

  bool operator==(const Target&) const = default;
};

struct StaticBehavior {
  bool operator==(const StaticBehavior&) const = default;
};

struct PursuitBehavior {
  double speed = 0.01;
  int agent_id = 0;  // fixed at generation time

  bool operator==(const PursuitBehavior&) const = default;
};

using ObstacleBehavior = std::variant<StaticBehavior, PursuitBehavior>;

struct Obstacle {
  int id = 0;
  Vec2d position = Vec2d::Zero();
  double radius = 0.05;  // keep-out radius
  ObstacleBehavior behavior = StaticBehavior{};

  bool is_pursuit() const { return std::holds_alternative<PursuitBehavior>(behavior); }
  bool operator==(const Obstacle&) const = default;
};

struct WorldState {
  int time_step = 0;
  std::vector<AgentState> agents;
  std::vector<Target> targets;
  std::vector<Obstacle> obstacles;
  Boundsd bounds = Boundsd::unit();
  int horizon = 300;  // episode length limit
  // Large domain: targets other than the one an agent is heading for count as obstacles for it.
  bool inactive_targets_are_obstacles = false;

  const AgentState& agent(int id) const;
  const Target& target(int id) const;

  bool operator==(const WorldState&) const = default;
};

/// Throws std::invalid_argument when an entity invariant is broken.
void validate(const WorldState& world);

// Ordering is significant: it is the tie-break between equidistant entities.
enum class EntityKind : std::uint8_t { Obstacle = 0, Agent = 1, Target = 2 };

/// A keep-out disc as seen from some point.
struct ObservedEntity {
  EntityKind kind = EntityKind::Obstacle;
  int id = 0;
  Vec2d position = Vec2d::Zero();
  double radius = 0.0;
  double distance = 0.0;
};

/// An entity that is not an obstacle but is treated as one (teammates, off-duty targets).
struct PseudoObstacle {
  EntityKind kind = EntityKind::Agent;
  int id = 0;
  Vec2d position = Vec2d::Zero();
  double radius = 0.0;
};

/// The up-to-k closest of world.obstacles together with `extra`, ascending by
/// distance from `from`, ties broken by (kind, id).
std::vector<ObservedEntity> nearest_k_obstacles(const WorldState& world, const Vec2d& from,
                                                std::size_t k,
                                                const std::vector<PseudoObstacle>& extra = {});

}  // namespace teamnav
