#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "teamnav/environment.hpp"
#include "teamnav/rng.hpp"

namespace teamnav::testing {

inline AgentState make_agent(int id, Vec2d pos, std::vector<int> targets = {}, double speed = 0.01,
                             double radius = 0.02) {
  AgentState a;
  a.id = id;
  a.position = pos;
  a.speed = speed;
  a.radius = radius;
  a.target_sequence = std::move(targets);
  return a;
}

inline Obstacle make_obstacle(int id, Vec2d pos, double radius) {
  Obstacle o;
  o.id = id;
  o.position = pos;
  o.radius = radius;
  return o;
}

/// A world with arbitrary entity counts, cursors and flags, for oracle comparisons.
inline WorldState random_world(Rng& rng) {
  WorldState w;
  const double x0 = rng.uniform(-2.0, 1.0);
  const double y0 = rng.uniform(-2.0, 1.0);
  w.bounds = Boundsd{{x0, y0}, {x0 + rng.uniform(0.5, 3.0), y0 + rng.uniform(0.5, 3.0)}};
  auto point = [&] {
    return Vec2d(rng.uniform(w.bounds.lo.x(), w.bounds.hi.x()), rng.uniform(w.bounds.lo.y(), w.bounds.hi.y()));
  };
  w.horizon = 50;
  w.inactive_targets_are_obstacles = rng.below(2) == 1;
  const int n_targets = 1 + static_cast<int>(rng.below(10));
  for (int i = 0; i < n_targets; ++i) w.targets.push_back({i, point(), rng.uniform(0.005, 0.05)});
  const int n_agents = 1 + static_cast<int>(rng.below(3));
  for (int i = 0; i < n_agents; ++i) {
    std::vector<int> seq(static_cast<std::size_t>(n_targets));
    for (int t = 0; t < n_targets; ++t) seq[static_cast<std::size_t>(t)] = t;
    rng.shuffle(seq.begin(), seq.end());
    auto a = make_agent(i, point(), seq, rng.uniform(0.005, 0.02), rng.uniform(0.01, 0.03));
    a.cursor = rng.below(static_cast<std::uint64_t>(n_targets) + 1);
    a.targets_reached = static_cast<int>(a.cursor);
    w.agents.push_back(a);
  }
  const int n_obstacles = static_cast<int>(rng.below(13));
  for (int i = 0; i < n_obstacles; ++i) {
    // Some obstacles sit exactly on an agent so the penetration branch is exercised.
    const Vec2d p = rng.below(6) == 0 ? w.agents[0].position : point();
    w.obstacles.push_back(make_obstacle(i, p, rng.uniform(0.01, 0.2)));
  }
  return w;
}

inline EnvConfig random_env(Rng& rng, const WorldState& w) {
  EnvConfig env;
  env.bounds = w.bounds;
  env.n_observed_obstacles = 1 + static_cast<int>(rng.below(15));
  if (rng.below(2) == 1) env.far_sentinel_distance = rng.uniform(0.5, 5.0);
  return env;
}

/// Straight transcription of the reward: distance penalty to the active target
/// plus the piecewise keep-out term over the N nearest real or pseudo obstacles,
/// padded with (far sentinel, radius 0) entries. Candidates are fully sorted.
inline double brute_force_reward(const WorldState& w, int agent_id, int n, double far, double alpha,
                                 double beta1, double beta2) {
  const AgentState* me = nullptr;
  for (const auto& a : w.agents)
    if (a.id == agent_id) me = &a;
  auto dist = [](const Vec2d& a, const Vec2d& b) { return std::hypot(a.x() - b.x(), a.y() - b.y()); };
  auto target_pos = [&](int id) {
    for (const auto& t : w.targets)
      if (t.id == id) return t.position;
    return Vec2d(NAN, NAN);
  };

  double r = 0.0;
  const bool done = me->cursor >= me->target_sequence.size();
  if (!done) r -= alpha * dist(me->position, target_pos(me->target_sequence[me->cursor]));

  // (distance, kind, id, radius)
  std::vector<std::tuple<double, int, int, double>> all;
  for (const auto& o : w.obstacles) all.emplace_back(dist(me->position, o.position), 0, o.id, o.radius);
  for (const auto& a : w.agents)
    if (a.id != agent_id) all.emplace_back(dist(me->position, a.position), 1, a.id, a.radius);
  if (w.inactive_targets_are_obstacles && !me->target_sequence.empty()) {
    const int heading = done ? me->target_sequence.back() : me->target_sequence[me->cursor];
    for (const auto& t : w.targets)
      if (t.id != heading) all.emplace_back(dist(me->position, t.position), 2, t.id, t.radius);
  }
  std::sort(all.begin(), all.end());

  auto g = [&](double d, double radius) { return d >= radius ? beta1 * (d - radius) : beta2 * (d - radius); };
  for (int i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(i) < all.size())
      r += g(std::get<0>(all[static_cast<std::size_t>(i)]), std::get<3>(all[static_cast<std::size_t>(i)]));
    else
      r += g(far, 0.0);
  }
  return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("teamnav_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace teamnav::testing
