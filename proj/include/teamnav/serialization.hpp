#pragma once

#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "teamnav/environment.hpp"
#include "teamnav/errors.hpp"
#include "teamnav/training.hpp"
#include "teamnav/world.hpp"

namespace teamnav {

using json = nlohmann::json;

namespace detail {
template <typename T>
constexpr const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else return "a value of the right type";
}
}  // namespace detail

/// Reads the members of one JSON object, remembering which keys were consumed so
/// that leftovers can be reported. Errors are ConfigError naming the full key path.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path);

  template <typename T>
  void read(std::string_view key, T& out);
  const json* find(std::string_view key);
  std::string key_path(std::string_view key) const;
  /// Throws if the object has keys that were never read.
  void finish() const;

 private:
  const json& object_;
  std::string path_;
  std::vector<std::string> seen_;
};

template <typename T>
void ObjectReader::read(std::string_view key, T& out) {
  const json* value = find(key);
  if (!value) return;
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>) ok = value->is_boolean();
  else if constexpr (std::is_unsigned_v<T>) ok = value->is_number_unsigned();
  else if constexpr (std::is_integral_v<T>) ok = value->is_number_integer();
  else if constexpr (std::is_floating_point_v<T>) ok = value->is_number();
  else if constexpr (std::is_same_v<T, std::string>) ok = value->is_string();
  if (ok) {
    try {
      out = value->get<T>();
      return;
    } catch (const json::exception&) {
    }
  }
  throw ConfigError(key_path(key) + ": expected " + detail::type_name<T>() + ", got " + value->dump());
}

json to_json(const Vec2d& v);
Vec2d vec2_from_json(const json& j, const std::string& path);

json to_json(const EnvConfig& c);
json to_json(const RewardConfig& c);
json to_json(const TrainConfig& c);
json to_json(const WorldState& w);

/// Missing keys keep their defaults; unknown keys and type errors throw ConfigError.
void from_json_strict(const json& j, EnvConfig& c, const std::string& path = "env");
void from_json_strict(const json& j, RewardConfig& c, const std::string& path = "reward");
void from_json_strict(const json& j, TrainConfig& c, const std::string& path = "train");
WorldState world_from_json(const json& j, const std::string& path = "world");

}  // namespace teamnav
