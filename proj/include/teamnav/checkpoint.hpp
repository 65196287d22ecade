#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "teamnav/autodiff.hpp"
#include "teamnav/policy.hpp"

namespace teamnav {

inline constexpr int kCheckpointFormatVersion = 1;

/// Persisted policy snapshot. Tensors are stored as base64 little-endian doubles.
struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  PolicyParams params;
  int training_update = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t config_fingerprint = 0;
  // Present when written by the trainer; lets --resume continue bit-exactly.
  std::optional<AdamState> optimizer;

  bool operator==(const Checkpoint& other) const;
};

std::string base64_encode(std::string_view bytes);
/// Throws std::invalid_argument on malformed input.
std::string base64_decode(std::string_view text);

std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view text, Eigen::Index rows, Eigen::Index cols);

std::string serialize_checkpoint(const Checkpoint& c);
/// Throws IoError on malformed documents and std::runtime_error naming both
/// versions on a format_version mismatch.
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// checkpoint_000100.json style name.
std::string checkpoint_filename(int training_update);
/// Checkpoint files in `dir`, sorted by name (and therefore by update).
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir);

class CheckpointVersionError : public std::runtime_error {
 public:
  CheckpointVersionError(int found, int expected);
  int found;
  int expected;
};

}  // namespace teamnav
