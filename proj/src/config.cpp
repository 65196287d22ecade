#include "teamnav/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "teamnav/errors.hpp"
#include "teamnav/rng.hpp"

namespace teamnav {

void RunConfig::validate() const {
  env.validate();
  reward.validate();
  train.validate();
  if (eval.count < 0) throw ConfigError("eval.count must be non-negative");
  if (eval.domains.empty()) throw ConfigError("eval.domains must not be empty");
  if (eval.seeds.empty()) throw ConfigError("eval.seeds must not be empty");
}

json to_json(const RunConfig& c) {
  json domains = json::array();
  for (auto d : c.eval.domains) domains.push_back(std::string(to_string(d)));
  return {{"env", to_json(c.env)},
          {"reward", to_json(c.reward)},
          {"train", to_json(c.train)},
          {"eval", {{"domains", domains}, {"seeds", c.eval.seeds}, {"count", c.eval.count}}},
          {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  ObjectReader in(j, "");
  if (const json* v = in.find("env")) from_json_strict(*v, c.env, "env");
  if (const json* v = in.find("reward")) from_json_strict(*v, c.reward, "reward");
  if (const json* v = in.find("train")) from_json_strict(*v, c.train, "train");
  if (const json* v = in.find("eval")) {
    ObjectReader ev(*v, "eval");
    if (const json* d = ev.find("domains")) {
      if (!d->is_array()) throw ConfigError("eval.domains: expected an array");
      c.eval.domains.clear();
      for (const auto& name : *d) {
        const auto kind = name.is_string() ? parse_domain(name.get<std::string>()) : std::nullopt;
        if (!kind) throw ConfigError(fmt::format("eval.domains: unknown domain {}", name.dump()));
        c.eval.domains.push_back(*kind);
      }
    }
    if (const json* s = ev.find("seeds")) {
      if (!s->is_array()) throw ConfigError("eval.seeds: expected an array");
      c.eval.seeds.clear();
      for (const auto& seed : *s) {
        if (!seed.is_number_unsigned()) throw ConfigError(fmt::format("eval.seeds: bad seed {}", seed.dump()));
        c.eval.seeds.push_back(seed.get<std::uint64_t>());
      }
    }
    ev.read("count", c.eval.count);
    ev.finish();
  }
  in.read("output_dir", c.output_dir);
  in.finish();
  c.validate();
  return c;
}

std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  return run_config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t config_fingerprint(const RunConfig& c) {
  json train = to_json(c.train);
  for (const char* key : {"total_updates", "checkpoint_every", "record_wall_time"}) train.erase(key);
  const json j{{"env", to_json(c.env)}, {"reward", to_json(c.reward)}, {"train", std::move(train)}};
  return fnv1a(j.dump());
}

}  // namespace teamnav
