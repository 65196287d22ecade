#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "teamnav/environment.hpp"
#include "teamnav/serialization.hpp"
#include "teamnav/training.hpp"

namespace teamnav {

struct EvalConfig {
  std::vector<DomainKind> domains{kAllDomains[0], kAllDomains[1], kAllDomains[2]};
  std::vector<std::uint64_t> seeds{10, 11, 12};
  int count = 100;

  bool operator==(const EvalConfig&) const = default;
};

/// Everything that determines a run. A config file may give any subset of keys.
struct RunConfig {
  EnvConfig env;
  RewardConfig reward;
  TrainConfig train;
  EvalConfig eval;
  std::string output_dir = "run";

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

json to_json(const RunConfig& c);
RunConfig run_config_from_json(const json& j);

std::string serialize_config(const RunConfig& c);
/// Throws ConfigError naming the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Hash of the settings that shape the parameter trajectory: env, reward and
/// train, minus run length, checkpoint spacing and timing. A run may therefore be
/// resumed with a larger total_updates.
std::uint64_t config_fingerprint(const RunConfig& c);

}  // namespace teamnav
