#include "teamnav/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "teamnav/errors.hpp"

namespace teamnav {

using json = nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto n = (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8) |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 2]));
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  const auto rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t n = static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])) << 16;
    if (rest == 2) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i + 1])) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += rest == 2 ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64: length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<std::size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0 || (v[k] = decode_char(c)) < 0) throw std::invalid_argument("base64: invalid character");
    }
    const auto n = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                   (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
    out += static_cast<char>((n >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((n >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(n & 0xff);
  }
  return out;
}

std::string encode_tensor(const Tensor& t) {
  std::string bytes(static_cast<std::size_t>(t.size()) * sizeof(double), '\0');
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    auto bits = std::bit_cast<std::uint64_t>(t.data()[k]);
    for (std::size_t b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(k) * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return base64_encode(bytes);
}

Tensor decode_tensor(std::string_view text, Eigen::Index rows, Eigen::Index cols) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * sizeof(double))
    throw std::invalid_argument(fmt::format("tensor payload has {} bytes, expected {}x{} doubles", bytes.size(), rows, cols));
  Tensor t(rows, cols);
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(k) * 8 + b])) << (8 * b);
    t.data()[k] = std::bit_cast<double>(bits);
  }
  return t;
}

CheckpointVersionError::CheckpointVersionError(int found_version, int expected_version)
    : std::runtime_error(fmt::format("checkpoint format_version {} is not supported (this build reads version {})",
                                     found_version, expected_version)),
      found(found_version),
      expected(expected_version) {}

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (format_version != other.format_version || !(params == other.params) ||
      training_update != other.training_update || master_seed != other.master_seed ||
      config_fingerprint != other.config_fingerprint || optimizer.has_value() != other.optimizer.has_value())
    return false;
  if (!optimizer) return true;
  const auto& a = *optimizer;
  const auto& b = *other.optimizer;
  if (!(a.config == b.config) || a.step != b.step || a.m.size() != b.m.size()) return false;
  for (std::size_t i = 0; i < a.m.size(); ++i)
    if (a.m[i] != b.m[i] || a.v[i] != b.v[i]) return false;
  return true;
}

namespace {

json tensor_json(const Tensor& t) {
  return {{"shape", {t.rows(), t.cols()}}, {"data", encode_tensor(t)}};
}

Tensor tensor_from_json(const json& j) {
  const auto& shape = j.at("shape");
  if (!shape.is_array() || shape.size() != 2) throw std::invalid_argument("tensor shape must have two entries");
  return decode_tensor(j.at("data").get<std::string>(), shape[0].get<Eigen::Index>(), shape[1].get<Eigen::Index>());
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  json j;
  j["format_version"] = c.format_version;
  j["architecture"] = c.params.dims;
  j["training_update"] = c.training_update;
  j["master_seed"] = c.master_seed;
  j["config_fingerprint"] = fmt::format("{:016x}", c.config_fingerprint);
  json layers = json::array();
  for (std::size_t l = 0; l < c.params.num_layers(); ++l)
    layers.push_back({{"weight", tensor_json(c.params.weights[l])}, {"bias", tensor_json(c.params.biases[l])}});
  j["layers"] = std::move(layers);
  j["log_std"] = tensor_json(c.params.log_std);
  if (c.optimizer) {
    const auto& o = *c.optimizer;
    json m = json::array(), v = json::array();
    for (std::size_t i = 0; i < o.m.size(); ++i) {
      m.push_back(tensor_json(o.m[i]));
      v.push_back(tensor_json(o.v[i]));
    }
    j["optimizer"] = {{"step", o.step},
                      {"learning_rate", o.config.learning_rate},
                      {"weight_decay", o.config.weight_decay},
                      {"beta_m", o.config.beta_m},
                      {"beta_v", o.config.beta_v},
                      {"epsilon", o.config.epsilon},
                      {"decoupled_weight_decay", o.config.decoupled_weight_decay},
                      {"m", std::move(m)},
                      {"v", std::move(v)}};
  }
  return j.dump(2) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(fmt::format("checkpoint is not valid JSON: {}", e.what()));
  }
  try {
    Checkpoint c;
    c.format_version = j.at("format_version").get<int>();
    if (c.format_version != kCheckpointFormatVersion)
      throw CheckpointVersionError(c.format_version, kCheckpointFormatVersion);
    c.training_update = j.at("training_update").get<int>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.config_fingerprint = std::stoull(j.at("config_fingerprint").get<std::string>(), nullptr, 16);

    c.params = PolicyParams::zeros(j.at("architecture").get<std::vector<int>>());
    const auto& layers = j.at("layers");
    if (layers.size() != c.params.num_layers()) throw std::invalid_argument("layer count disagrees with architecture");
    std::vector<Tensor> tensors;
    for (const auto& layer : layers) {
      tensors.push_back(tensor_from_json(layer.at("weight")));
      tensors.push_back(tensor_from_json(layer.at("bias")));
    }
    tensors.push_back(tensor_from_json(j.at("log_std")));
    c.params.assign(tensors);

    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      AdamState s;
      s.step = o.at("step").get<long>();
      s.config.learning_rate = o.at("learning_rate").get<double>();
      s.config.weight_decay = o.at("weight_decay").get<double>();
      s.config.beta_m = o.at("beta_m").get<double>();
      s.config.beta_v = o.at("beta_v").get<double>();
      s.config.epsilon = o.at("epsilon").get<double>();
      s.config.decoupled_weight_decay = o.at("decoupled_weight_decay").get<bool>();
      for (const auto& m : o.at("m")) s.m.push_back(tensor_from_json(m));
      for (const auto& v : o.at("v")) s.v.push_back(tensor_from_json(v));
      if (s.m.size() != tensors.size() || s.v.size() != tensors.size())
        throw std::invalid_argument("optimizer moment count disagrees with parameters");
      c.optimizer = std::move(s);
    }
    return c;
  } catch (const CheckpointVersionError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(fmt::format("malformed checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write checkpoint {}", path.string()));
  out << serialize_checkpoint(c);
  if (!out) throw IoError(fmt::format("failed writing checkpoint {}", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read checkpoint {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

std::string checkpoint_filename(int training_update) {
  return fmt::format("checkpoint_{:06d}.json", training_update);
}

std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("checkpoint_") && name.ends_with(".json"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace teamnav
