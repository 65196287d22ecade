#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "teamnav/environment.hpp"
#include "teamnav/evaluation.hpp"
#include "teamnav/serialization.hpp"

namespace teamnav {

/// A problem set is stored by its generating parameters, never by value.
struct ProblemManifest {
  DomainKind domain = DomainKind::StaticSimple;
  std::uint64_t seed = 0;
  int count = 0;
  EnvConfig env;

  std::vector<ProblemInstance> instances() const;
  bool operator==(const ProblemManifest&) const = default;
};

json to_json(const ProblemManifest& m);
ProblemManifest manifest_from_json(const json& j);
void save_manifest(const ProblemManifest& m, const std::filesystem::path& path);
ProblemManifest load_manifest(const std::filesystem::path& path);

/// Runs one episode and writes it as JSON Lines: a header record with the
/// configs and the full initial world, then one record per step.
EpisodeMetrics write_trajectory(const Planner& planner, const ProblemInstance& instance, const EnvConfig& env,
                                const RewardConfig& reward_config, std::ostream& out);

struct ReplayReport {
  int steps = 0;
  double max_position_error = 0.0;
  double max_reward_error = 0.0;
  bool events_match = true;  // collisions, arrivals and done flags
};

/// Re-applies the logged actions through `step` starting from the header world.
/// Throws IoError on a malformed dump.
ReplayReport replay_trajectory(std::istream& in);

}  // namespace teamnav
