#include "teamnav/serialization.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace teamnav {

ObjectReader::ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw ConfigError(fmt::format("{}: expected an object, got {}", path_, object_.dump()));
}

std::string ObjectReader::key_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
}

const json* ObjectReader::find(std::string_view key) {
  seen_.emplace_back(key);
  const auto it = object_.find(key);
  return it == object_.end() ? nullptr : &*it;
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : object_.items())
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
      throw ConfigError(fmt::format("unknown key '{}'", key_path(key)));
}

json to_json(const Vec2d& v) { return json::array({v.x(), v.y()}); }

Vec2d vec2_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(fmt::format("{}: expected [x, y], got {}", path, j.dump()));
  return {j[0].get<double>(), j[1].get<double>()};
}

namespace {

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

void read_range(ObjectReader& in, std::string_view key, Range& r) {
  if (const json* v = in.find(key)) {
    const Vec2d p = vec2_from_json(*v, in.key_path(key));
    r = {p.x(), p.y()};
  }
}

void read_bounds(ObjectReader& in, Boundsd& b) {
  const json* v = in.find("bounds");
  if (!v) return;
  ObjectReader sub(*v, in.key_path("bounds"));
  if (const json* lo = sub.find("lo")) b.lo = vec2_from_json(*lo, sub.key_path("lo"));
  if (const json* hi = sub.find("hi")) b.hi = vec2_from_json(*hi, sub.key_path("hi"));
  sub.finish();
}

template <typename T>
void read_optional(ObjectReader& in, std::string_view key, std::optional<T>& out) {
  const json* v = in.find(key);
  if (!v) return;
  if (v->is_null()) {
    out.reset();
    return;
  }
  T value{};
  in.read(key, value);
  out = value;
}

json optional_json(const auto& opt) { return opt ? json(*opt) : json(nullptr); }

DomainKind read_domain(const json& v, const std::string& path) {
  std::string name;
  if (v.is_string()) name = v.get<std::string>();
  if (const auto kind = parse_domain(name)) return *kind;
  throw ConfigError(fmt::format("{}: unknown domain {} (valid: static-simple, multi-agent-dynamic, "
                                "multi-agent-dynamic-large)",
                                path, v.dump()));
}

}  // namespace

json to_json(const EnvConfig& c) {
  return {
      {"bounds", {{"lo", to_json(c.bounds.lo)}, {"hi", to_json(c.bounds.hi)}}},
      {"horizon", optional_json(c.horizon)},
      {"n_observed_obstacles", c.n_observed_obstacles},
      {"agent_speed_range", range_json(c.agent_speed_range)},
      {"agent_radius_range", range_json(c.agent_radius_range)},
      {"obstacle_radius_range", range_json(c.obstacle_radius_range)},
      {"target_radius", c.target_radius},
      {"obstacle_pursuit", c.obstacle_pursuit},
      {"far_sentinel_distance", optional_json(c.far_sentinel_distance)},
  };
}

void from_json_strict(const json& j, EnvConfig& c, const std::string& path) {
  ObjectReader in(j, path);
  read_bounds(in, c.bounds);
  read_optional(in, "horizon", c.horizon);
  in.read("n_observed_obstacles", c.n_observed_obstacles);
  read_range(in, "agent_speed_range", c.agent_speed_range);
  read_range(in, "agent_radius_range", c.agent_radius_range);
  read_range(in, "obstacle_radius_range", c.obstacle_radius_range);
  in.read("target_radius", c.target_radius);
  in.read("obstacle_pursuit", c.obstacle_pursuit);
  read_optional(in, "far_sentinel_distance", c.far_sentinel_distance);
  in.finish();
}

json to_json(const RewardConfig& c) { return {{"alpha", c.alpha}, {"beta1", c.beta1}, {"beta2", c.beta2}}; }

void from_json_strict(const json& j, RewardConfig& c, const std::string& path) {
  ObjectReader in(j, path);
  in.read("alpha", c.alpha);
  in.read("beta1", c.beta1);
  in.read("beta2", c.beta2);
  in.finish();
}

json to_json(const TrainConfig& c) {
  return {
      {"gamma", c.gamma},
      {"batch_size", c.batch_size},
      {"total_updates", c.total_updates},
      {"learning_rate", c.learning_rate},
      {"weight_decay", c.weight_decay},
      {"decoupled_weight_decay", c.decoupled_weight_decay},
      {"checkpoint_every", c.checkpoint_every},
      {"train_domain", std::string(to_string(c.train_domain))},
      {"master_seed", c.master_seed},
      {"reward_to_go", c.reward_to_go},
      {"max_grad_norm", optional_json(c.max_grad_norm)},
      {"record_wall_time", c.record_wall_time},
      {"shared_batch_instance", c.shared_batch_instance},
  };
}

void from_json_strict(const json& j, TrainConfig& c, const std::string& path) {
  ObjectReader in(j, path);
  in.read("gamma", c.gamma);
  in.read("batch_size", c.batch_size);
  in.read("total_updates", c.total_updates);
  in.read("learning_rate", c.learning_rate);
  in.read("weight_decay", c.weight_decay);
  in.read("decoupled_weight_decay", c.decoupled_weight_decay);
  in.read("checkpoint_every", c.checkpoint_every);
  if (const json* v = in.find("train_domain")) c.train_domain = read_domain(*v, in.key_path("train_domain"));
  in.read("master_seed", c.master_seed);
  in.read("reward_to_go", c.reward_to_go);
  read_optional(in, "max_grad_norm", c.max_grad_norm);
  in.read("record_wall_time", c.record_wall_time);
  in.read("shared_batch_instance", c.shared_batch_instance);
  in.finish();
}

json to_json(const WorldState& w) {
  json agents = json::array();
  for (const auto& a : w.agents)
    agents.push_back({{"id", a.id},
                      {"position", to_json(a.position)},
                      {"speed", a.speed},
                      {"radius", a.radius},
                      {"target_sequence", a.target_sequence},
                      {"cursor", a.cursor},
                      {"targets_reached", a.targets_reached}});
  json targets = json::array();
  for (const auto& t : w.targets)
    targets.push_back({{"id", t.id}, {"position", to_json(t.position)}, {"radius", t.radius}});
  json obstacles = json::array();
  for (const auto& o : w.obstacles) {
    json entry{{"id", o.id}, {"position", to_json(o.position)}, {"radius", o.radius}};
    if (const auto* p = std::get_if<PursuitBehavior>(&o.behavior))
      entry["behavior"] = {{"kind", "pursuit"}, {"speed", p->speed}, {"agent_id", p->agent_id}};
    else
      entry["behavior"] = {{"kind", "static"}};
    obstacles.push_back(std::move(entry));
  }
  return {{"time_step", w.time_step},
          {"horizon", w.horizon},
          {"bounds", {{"lo", to_json(w.bounds.lo)}, {"hi", to_json(w.bounds.hi)}}},
          {"inactive_targets_are_obstacles", w.inactive_targets_are_obstacles},
          {"agents", std::move(agents)},
          {"targets", std::move(targets)},
          {"obstacles", std::move(obstacles)}};
}

namespace {

const json& require(ObjectReader& in, std::string_view key) {
  const json* v = in.find(key);
  if (!v) throw ConfigError(fmt::format("missing key '{}'", in.key_path(key)));
  return *v;
}

const json& require_array(ObjectReader& in, std::string_view key) {
  const json& v = require(in, key);
  if (!v.is_array()) throw ConfigError(fmt::format("{}: expected an array", in.key_path(key)));
  return v;
}

}  // namespace

WorldState world_from_json(const json& j, const std::string& path) {
  WorldState w;
  ObjectReader in(j, path);
  in.read("time_step", w.time_step);
  in.read("horizon", w.horizon);
  read_bounds(in, w.bounds);
  in.read("inactive_targets_are_obstacles", w.inactive_targets_are_obstacles);

  const json& agents = require_array(in, "agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    ObjectReader a(agents[i], fmt::format("{}.agents[{}]", path, i));
    AgentState s;
    a.read("id", s.id);
    s.position = vec2_from_json(require(a, "position"), a.key_path("position"));
    a.read("speed", s.speed);
    a.read("radius", s.radius);
    const json& seq = require_array(a, "target_sequence");
    for (const auto& t : seq) {
      if (!t.is_number_integer()) throw ConfigError(a.key_path("target_sequence") + ": expected integers");
      s.target_sequence.push_back(t.get<int>());
    }
    a.read("cursor", s.cursor);
    a.read("targets_reached", s.targets_reached);
    a.finish();
    w.agents.push_back(std::move(s));
  }

  const json& targets = require_array(in, "targets");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ObjectReader t(targets[i], fmt::format("{}.targets[{}]", path, i));
    Target s;
    t.read("id", s.id);
    s.position = vec2_from_json(require(t, "position"), t.key_path("position"));
    t.read("radius", s.radius);
    t.finish();
    w.targets.push_back(s);
  }

  const json& obstacles = require_array(in, "obstacles");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    ObjectReader o(obstacles[i], fmt::format("{}.obstacles[{}]", path, i));
    Obstacle s;
    o.read("id", s.id);
    s.position = vec2_from_json(require(o, "position"), o.key_path("position"));
    o.read("radius", s.radius);
    if (const json* b = o.find("behavior")) {
      ObjectReader beh(*b, o.key_path("behavior"));
      std::string kind = "static";
      beh.read("kind", kind);
      if (kind == "pursuit") {
        PursuitBehavior p;
        beh.read("speed", p.speed);
        beh.read("agent_id", p.agent_id);
        s.behavior = p;
      } else if (kind != "static") {
        throw ConfigError(fmt::format("{}: unknown behavior kind '{}'", beh.key_path("kind"), kind));
      }
      beh.finish();
    }
    o.finish();
    w.obstacles.push_back(std::move(s));
  }
  in.finish();

  try {
    validate(w);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return w;
}

}  // namespace teamnav
