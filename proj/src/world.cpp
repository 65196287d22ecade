#include "teamnav/world.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace teamnav {

const AgentState& WorldState::agent(int id) const {
  for (const auto& a : agents)
    if (a.id == id) return a;
  throw std::out_of_range("no agent with id " + std::to_string(id));
}

const Target& WorldState::target(int id) const {
  for (const auto& t : targets)
    if (t.id == id) return t;
  throw std::out_of_range("no target with id " + std::to_string(id));
}

namespace {

template <typename Range>
void check_unique_ids(const Range& range, const char* kind) {
  std::set<int> seen;
  for (const auto& e : range)
    if (!seen.insert(e.id).second)
      throw std::invalid_argument(std::string("duplicate ") + kind + " id " + std::to_string(e.id));
}

}  // namespace

void validate(const WorldState& world) {
  if (world.bounds.degenerate()) throw std::invalid_argument("degenerate bounds");
  if (world.time_step < 0) throw std::invalid_argument("negative time step");
  if (world.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  check_unique_ids(world.agents, "agent");
  check_unique_ids(world.targets, "target");
  check_unique_ids(world.obstacles, "obstacle");

  auto check_position = [&](const Vec2d& p, const char* what) {
    if (!p.allFinite() || !world.bounds.contains(p))
      throw std::invalid_argument(std::string(what) + " position outside bounds");
  };
  for (const auto& a : world.agents) {
    check_position(a.position, "agent");
    if (!(a.speed > 0.0)) throw std::invalid_argument("agent speed must be positive");
    if (!(a.radius >= 0.0)) throw std::invalid_argument("agent radius must be non-negative");
    if (a.cursor > a.target_sequence.size()) throw std::invalid_argument("agent cursor out of range");
    if (a.targets_reached != static_cast<int>(a.cursor))
      throw std::invalid_argument("agent targets_reached disagrees with cursor");
    for (int t : a.target_sequence) (void)world.target(t);
  }
  for (const auto& t : world.targets) {
    check_position(t.position, "target");
    if (!(t.radius > 0.0)) throw std::invalid_argument("target radius must be positive");
  }
  for (const auto& o : world.obstacles) {
    check_position(o.position, "obstacle");
    if (!(o.radius > 0.0)) throw std::invalid_argument("obstacle radius must be positive");
    if (const auto* p = std::get_if<PursuitBehavior>(&o.behavior)) {
      if (!(p->speed > 0.0)) throw std::invalid_argument("pursuit speed must be positive");
      (void)world.agent(p->agent_id);
    }
  }
}

std::vector<ObservedEntity> nearest_k_obstacles(const WorldState& world, const Vec2d& from,
                                                std::size_t k,
                                                const std::vector<PseudoObstacle>& extra) {
  if (k == 0) throw std::invalid_argument("nearest_k_obstacles: k must be at least 1");

  std::vector<ObservedEntity> pool;
  pool.reserve(world.obstacles.size() + extra.size());
  for (const auto& o : world.obstacles)
    pool.push_back({EntityKind::Obstacle, o.id, o.position, o.radius, distance(from, o.position)});
  for (const auto& e : extra)
    pool.push_back({e.kind, e.id, e.position, e.radius, distance(from, e.position)});

  auto closer = [](const ObservedEntity& a, const ObservedEntity& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.id < b.id;
  };
  const auto keep = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), closer);
  pool.resize(keep);
  return pool;
}

}  // namespace teamnav
