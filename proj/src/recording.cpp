#include "teamnav/recording.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "teamnav/errors.hpp"

namespace teamnav {

std::vector<ProblemInstance> ProblemManifest::instances() const {
  std::vector<ProblemInstance> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) out.push_back(gen_problem(domain, seed, static_cast<std::uint64_t>(i), env));
  return out;
}

json to_json(const ProblemManifest& m) {
  return {{"domain_kind", std::string(to_string(m.domain))},
          {"seed", m.seed},
          {"count", m.count},
          {"env_config", to_json(m.env)}};
}

ProblemManifest manifest_from_json(const json& j) {
  ProblemManifest m;
  ObjectReader in(j, "manifest");
  std::string domain;
  in.read("domain_kind", domain);
  const auto kind = parse_domain(domain);
  if (!kind) throw ConfigError(fmt::format("manifest.domain_kind: unknown domain '{}'", domain));
  m.domain = *kind;
  in.read("seed", m.seed);
  in.read("count", m.count);
  if (m.count < 0) throw ConfigError("manifest.count must be non-negative");
  if (const json* env = in.find("env_config")) from_json_strict(*env, m.env, "manifest.env_config");
  in.finish();
  m.env.validate();
  return m;
}

void save_manifest(const ProblemManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << to_json(m).dump(2) << "\n";
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

ProblemManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return manifest_from_json(json::parse(buf.str()));
  } catch (const json::parse_error& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

namespace {

json collisions_json(const std::vector<CollisionEvent>& events) {
  json out = json::array();
  for (const auto& e : events)
    out.push_back({{"agent_id", e.agent_id}, {"kind", static_cast<int>(e.other_kind)}, {"id", e.other_id}});
  return out;
}

json step_record(const std::vector<Action>& actions, const StepResult& result) {
  json acts = json::array();
  for (const auto& a : actions) acts.push_back(to_json(a));
  json agents = json::array();
  for (const auto& a : result.world.agents)
    agents.push_back({{"id", a.id}, {"position", to_json(a.position)}, {"cursor", a.cursor}});
  json obstacles = json::array();
  for (const auto& o : result.world.obstacles) obstacles.push_back({{"id", o.id}, {"position", to_json(o.position)}});
  return {{"t", result.world.time_step},
          {"actions", std::move(acts)},
          {"agents", std::move(agents)},
          {"obstacles", std::move(obstacles)},
          {"rewards", result.events.rewards},
          {"collisions", collisions_json(result.events.collision_events)},
          {"targets_reached", result.events.targets_reached},
          {"done", result.events.done}};
}

}  // namespace

EpisodeMetrics write_trajectory(const Planner& planner, const ProblemInstance& instance, const EnvConfig& env,
                                const RewardConfig& reward_config, std::ostream& out) {
  const json header{{"domain", std::string(to_string(instance.domain))},
                    {"seed", instance.seed},
                    {"problem_index", instance.problem_index},
                    {"planner", planner.name},
                    {"env", to_json(env)},
                    {"reward", to_json(reward_config)},
                    {"world", to_json(instance.world)}};
  out << header.dump() << "\n";
  const auto metrics = run_episode(planner, instance, env, reward_config,
                                   [&](const WorldState&, const std::vector<Action>& actions, const StepResult& r) {
                                     out << step_record(actions, r).dump() << "\n";
                                   });
  if (!out) throw IoError("trajectory write failed");
  return metrics;
}

ReplayReport replay_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trajectory dump is empty");

  ReplayReport report;
  try {
    const json header = json::parse(line);
    EnvConfig env;
    RewardConfig rc;
    from_json_strict(header.at("env"), env, "env");
    from_json_strict(header.at("reward"), rc, "reward");
    WorldState world = world_from_json(header.at("world"));

    auto pos_error = [](const json& logged, const Vec2d& actual) {
      return (vec2_from_json(logged, "position") - actual).cwiseAbs().maxCoeff();
    };

    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      std::vector<Action> actions;
      for (const auto& a : rec.at("actions")) actions.push_back(vec2_from_json(a, "actions"));
      auto result = step(world, actions, env, rc);
      ++report.steps;

      const auto& agents = rec.at("agents");
      const auto& obstacles = rec.at("obstacles");
      const auto& rewards = rec.at("rewards");
      if (agents.size() != result.world.agents.size() || obstacles.size() != result.world.obstacles.size() ||
          rewards.size() != result.events.rewards.size())
        throw IoError(fmt::format("trajectory record {}: entity counts differ from the replayed world", report.steps));

      for (std::size_t i = 0; i < agents.size(); ++i) {
        report.max_position_error =
            std::max(report.max_position_error, pos_error(agents[i].at("position"), result.world.agents[i].position));
        if (agents[i].at("cursor").get<std::size_t>() != result.world.agents[i].cursor) report.events_match = false;
      }
      for (std::size_t i = 0; i < obstacles.size(); ++i)
        report.max_position_error = std::max(report.max_position_error,
                                             pos_error(obstacles[i].at("position"), result.world.obstacles[i].position));
      for (std::size_t i = 0; i < rewards.size(); ++i)
        report.max_reward_error =
            std::max(report.max_reward_error, std::abs(rewards[i].get<double>() - result.events.rewards[i]));

      if (rec.at("collisions") != collisions_json(result.events.collision_events) ||
          rec.at("targets_reached").get<int>() != result.events.targets_reached ||
          rec.at("done").get<bool>() != result.events.done || rec.at("t").get<int>() != result.world.time_step)
        report.events_match = false;
      world = std::move(result.world);
    }
  } catch (const json::exception& e) {
    throw IoError(fmt::format("malformed trajectory dump: {}", e.what()));
  } catch (const ConfigError& e) {
    throw IoError(fmt::format("malformed trajectory dump: {}", e.what()));
  }
  return report;
}

}  // namespace teamnav
