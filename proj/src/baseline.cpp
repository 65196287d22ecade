#include "teamnav/baseline.hpp"

namespace teamnav {

std::vector<Action> baseline_actions(const WorldState& world) {
  std::vector<Action> actions;
  actions.reserve(world.agents.size());
  for (const auto& agent : world.agents) {
    if (const auto active = agent.active_target())
      actions.push_back(target_to_target(agent.position, world.target(*active).position, agent.speed));
    else
      actions.push_back(Action::Zero());
  }
  return actions;
}

}  // namespace teamnav
