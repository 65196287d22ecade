#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "teamnav/config.hpp"
#include "teamnav/training.hpp"

namespace teamnav {

inline constexpr const char* kTrainLogName = "train_log.csv";
inline constexpr const char* kResolvedConfigName = "config.json";

struct TrainRunOptions {
  std::filesystem::path out_dir;
  bool resume = false;
  int threads = 1;
  std::ostream* progress = nullptr;  // one line per checkpoint when set
};

/// Trains per `config`, writing config.json, train_log.csv and one checkpoint
/// per checkpoint_every updates (including update 0) into options.out_dir.
/// With resume, continues from the newest checkpoint in that directory.
TrainingState train_to_directory(const RunConfig& config, const TrainRunOptions& options);

std::string train_log_header();
std::string format_train_log_row(const TrainLogRow& row);

}  // namespace teamnav
