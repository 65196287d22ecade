#pragma once

#include "teamnav/environment.hpp"
#include "teamnav/geometry.hpp"

namespace teamnav {

/// Obstacle-blind straight-line move toward `to`, never overshooting it.
template <typename Scalar>
Vec2<Scalar> target_to_target(const Vec2<Scalar>& from, const Vec2<Scalar>& to, Scalar speed) {
  const Vec2<Scalar> delta = to - from;
  const Scalar d = delta.norm();
  if (d <= speed) return delta;
  return delta * (speed / d);
}

/// Baseline actions for every agent: head for the active target, hold still once done.
std::vector<Action> baseline_actions(const WorldState& world);

}  // namespace teamnav
