#include "teamnav/run.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "teamnav/checkpoint.hpp"
#include "teamnav/errors.hpp"
#include "teamnav/evaluation.hpp"

namespace teamnav {

namespace fs = std::filesystem;

std::string train_log_header() { return "update_index,mean_return,std_return,grad_norm,mean_advantage_abs,wall_ms\n"; }

std::string format_train_log_row(const TrainLogRow& row) {
  return fmt::format("{},{},{},{},{},{}\n", row.update_index, format_real(row.mean_return), format_real(row.std_return),
                     format_real(row.grad_norm), format_real(row.mean_advantage_abs), format_real(row.wall_ms));
}

namespace {

// Keeps the header and the rows logged before update `keep`.
void truncate_log(const fs::path& path, int keep) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::string line;
  std::string kept = train_log_header();
  std::getline(in, line);
  for (int i = 0; i < keep && std::getline(in, line); ++i) kept += line + "\n";
  in.close();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << kept;
  if (!out) throw IoError(fmt::format("cannot rewrite {}", path.string()));
}

TrainingState resume_state(const RunConfig& config, const fs::path& dir) {
  const auto files = list_checkpoints(dir);
  if (files.empty()) throw IoError(fmt::format("--resume: no checkpoints in {}", dir.string()));
  auto c = load_checkpoint(files.back());
  if (c.config_fingerprint != config_fingerprint(config))
    throw ConfigError(fmt::format("--resume: {} was written under a different configuration", files.back().string()));
  if (!c.optimizer) throw IoError(fmt::format("--resume: {} has no optimizer state", files.back().string()));
  TrainingState state;
  state.params = std::move(c.params);
  state.adam = std::move(*c.optimizer);
  state.update = c.training_update;
  return state;
}

}  // namespace

TrainingState train_to_directory(const RunConfig& config, const TrainRunOptions& options) {
  config.validate();
  const fs::path& dir = options.out_dir;
  const auto fingerprint = config_fingerprint(config);

  TrainingState state;
  if (options.resume) {
    state = resume_state(config, dir);
    truncate_log(dir / kTrainLogName, state.update);
  } else {
    if (!list_checkpoints(dir).empty())
      throw ConfigError(fmt::format("{} already holds checkpoints; pass --resume or pick another directory", dir.string()));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    state = init_training(config.train, config.env);
    std::ofstream log(dir / kTrainLogName, std::ios::binary | std::ios::trunc);
    log << train_log_header();
    if (!log) throw IoError(fmt::format("cannot write {}", (dir / kTrainLogName).string()));
  }

  {
    std::ofstream cfg(dir / kResolvedConfigName, std::ios::binary | std::ios::trunc);
    cfg << serialize_config(config);
    if (!cfg) throw IoError(fmt::format("cannot write {}", (dir / kResolvedConfigName).string()));
  }

  std::ofstream log(dir / kTrainLogName, std::ios::binary | std::ios::app);
  if (!log) throw IoError(fmt::format("cannot append to {}", (dir / kTrainLogName).string()));

  TrainHooks hooks;
  hooks.on_update = [&](const TrainLogRow& row) {
    log << format_train_log_row(row);
    if (!log) throw IoError("training log write failed");
  };
  hooks.on_checkpoint = [&](const TrainingState& s) {
    log.flush();
    Checkpoint c;
    c.params = s.params;
    c.training_update = s.update;
    c.master_seed = config.train.master_seed;
    c.config_fingerprint = fingerprint;
    c.optimizer = s.adam;
    save_checkpoint(c, dir / checkpoint_filename(s.update));
    if (options.progress) *options.progress << fmt::format("checkpoint {} written\n", s.update) << std::flush;
  };
  train(state, config.train, config.env, config.reward, hooks, options.threads);
  return state;
}

}  // namespace teamnav
