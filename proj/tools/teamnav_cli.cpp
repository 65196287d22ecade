// teamnav: train, evaluate and inspect decentralized navigation policies.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "teamnav/checkpoint.hpp"
#include "teamnav/config.hpp"
#include "teamnav/errors.hpp"
#include "teamnav/evaluation.hpp"
#include "teamnav/gradcheck.hpp"
#include "teamnav/recording.hpp"
#include "teamnav/run.hpp"

namespace fs = std::filesystem;
using namespace teamnav;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct Common {
  std::string config_path;
  int threads = 1;
};

RunConfig resolve_config(const Common& common) {
  return common.config_path.empty() ? RunConfig{} : load_config(common.config_path);
}

DomainKind domain_or_throw(const std::string& name) {
  if (const auto kind = parse_domain(name)) return *kind;
  throw ConfigError(fmt::format("unknown domain '{}'; valid kinds: static-simple, multi-agent-dynamic, "
                                "multi-agent-dynamic-large",
                                name));
}

std::vector<DomainKind> domains_or_throw(const std::vector<std::string>& names) {
  std::vector<DomainKind> out;
  for (const auto& n : names) out.push_back(domain_or_throw(n));
  return out;
}

// Output file opened only after all inputs have been validated.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw IoError(fmt::format("cannot write {}", path));
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw IoError(fmt::format("failed writing {}", path));
  }

 private:
  std::ofstream file_;
};

struct PlannerChoice {
  std::string checkpoint;
  std::string planner;

  std::vector<Planner> resolve(bool allow_both) const {
    std::vector<Planner> out;
    if (planner.empty() && checkpoint.empty()) throw ConfigError("give --checkpoint PATH or --planner baseline");
    if (!planner.empty() && planner != "baseline")
      throw ConfigError(fmt::format("--planner must be 'baseline', got '{}'", planner));
    if (!planner.empty()) out.push_back(Planner::baseline());
    if (!checkpoint.empty()) out.push_back(Planner::from_policy("policy", load_checkpoint(checkpoint).params));
    if (out.size() > 1 && !allow_both) throw ConfigError("give either --checkpoint or --planner, not both");
    return out;
  }
};

// ---------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::optional<std::uint64_t> seed;
  std::optional<int> updates;
  std::string out;
  bool resume = false;
};

int cmd_train(const TrainArgs& a) {
  RunConfig config = resolve_config(a.common);
  if (a.seed) config.train.master_seed = *a.seed;
  if (a.updates) config.train.total_updates = *a.updates;
  if (!a.out.empty()) config.output_dir = a.out;
  config.validate();

  TrainRunOptions options;
  options.out_dir = config.output_dir;
  options.resume = a.resume;
  options.threads = a.common.threads;
  options.progress = &std::cerr;
  const auto state = train_to_directory(config, options);
  std::cerr << fmt::format("trained {} updates into {}\n", state.update, config.output_dir);
  return kOk;
}

struct EvalArgs {
  Common common;
  PlannerChoice planners;
  std::string checkpoint_dir;
  std::vector<std::string> domains;
  std::vector<std::uint64_t> seeds;
  std::optional<int> count;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  RunConfig config = resolve_config(a.common);
  if (!a.domains.empty()) config.eval.domains = domains_or_throw(a.domains);
  if (!a.seeds.empty()) config.eval.seeds = a.seeds;
  if (a.count) config.eval.count = *a.count;
  config.validate();

  if (!a.checkpoint_dir.empty()) {
    if (config.eval.domains.size() != 1 || config.eval.seeds.size() != 1)
      throw ConfigError("--checkpoint-dir needs exactly one --domain and one --seed");
    if (list_checkpoints(a.checkpoint_dir).empty())
      throw IoError(fmt::format("no checkpoints in {}", a.checkpoint_dir));
    const auto curve = evaluate_checkpoint_series(a.checkpoint_dir, config.eval.domains.front(),
                                                  config.eval.seeds.front(), config.eval.count, config.env,
                                                  config.reward, a.common.threads);
    for (const auto& w : curve.warnings) std::cerr << "warning: " << w << "\n";
    Output out(a.out);
    write_learning_curve_csv(curve, out.stream());
    out.close(a.out);
    return kOk;
  }

  const auto planners = a.planners.resolve(true);
  const auto report = run_benchmark(config.eval.domains, config.eval.seeds, planners, config.eval.count, config.env,
                                    config.reward, a.common.threads);
  Output out(a.out);
  write_benchmark_csv(report, out.stream());
  out.close(a.out);
  for (const auto& cell : report.cells)
    std::cerr << fmt::format("{:<26} seed {:<4} {:<9} targets {:8.3f}  collisions {:10.3f}  score {:10.3f}\n",
                             to_string(cell.domain), cell.seed, cell.planner, cell.targets.mean,
                             cell.collisions.mean, cell.score.mean);
  return kOk;
}

struct RolloutArgs {
  Common common;
  PlannerChoice planners;
  std::string domain = "static-simple";
  std::uint64_t seed = 10;
  std::uint64_t index = 0;
  std::string out;
};

int cmd_rollout(const RolloutArgs& a) {
  const RunConfig config = resolve_config(a.common);
  const auto kind = domain_or_throw(a.domain);
  const auto planner = a.planners.resolve(false).front();
  const auto instance = gen_problem(kind, a.seed, a.index, config.env);
  Output out(a.out);
  const auto m = write_trajectory(planner, instance, config.env, config.reward, out.stream());
  out.close(a.out);
  std::cerr << fmt::format("{} steps, {} targets, {} collisions, score {}\n", m.steps_executed, m.n_targets,
                           m.n_collisions, format_real(m.score));
  return kOk;
}

int cmd_replay(const std::string& path, double tol) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path));
  const auto r = replay_trajectory(in);
  std::cout << fmt::format("steps {} max_position_error {} max_reward_error {} events_match {}\n", r.steps,
                           format_real(r.max_position_error), format_real(r.max_reward_error), r.events_match);
  const bool ok = r.events_match && r.max_position_error <= tol && r.max_reward_error <= tol;
  if (!ok) std::cerr << "replay diverged from the dump\n";
  return ok ? kOk : kNumerical;
}

int cmd_gradcheck(int trials, std::uint64_t seed, bool corrupt) {
  if (trials == 0) std::cerr << "warning: 0 trials requested; nothing was checked\n";
  const auto r = policy_gradcheck(trials, seed, corrupt);
  std::cout << fmt::format("trials {} max_rel_error {}\n", r.trials, format_real(r.max_rel_error));
  if (!r.passed) {
    std::cerr << fmt::format("gradient check failed in trial {}: tensor {} coordinate {} analytic {} numeric {}\n",
                             r.worst_trial, r.worst.param_index, r.worst.coordinate, format_real(r.worst.analytic),
                             format_real(r.worst.numeric));
    return kNumerical;
  }
  return kOk;
}

struct GenArgs {
  Common common;
  std::string domain;
  std::uint64_t seed = 10;
  int count = 100;
  std::string out;
};

int cmd_gen_problems(const GenArgs& a) {
  const RunConfig config = resolve_config(a.common);
  ProblemManifest m{domain_or_throw(a.domain), a.seed, a.count, config.env};
  if (m.count < 0) throw ConfigError("--count must be non-negative");
  for (int i = 0; i < m.count; ++i) {
    try {
      (void)gen_problem(m.domain, m.seed, static_cast<std::uint64_t>(i), m.env);
    } catch (const GenerationError& e) {
      throw GenerationError(fmt::format("problem index {}: {}", i, e.what()));
    }
  }
  Output out(a.out);
  out.stream() << to_json(m).dump(2) << "\n";
  out.close(a.out);
  return kOk;
}

void add_common(CLI::App* cmd, Common& common, bool threads) {
  cmd->add_option("--config", common.config_path, "JSON run configuration (any subset of keys)")
      ->check(CLI::ExistingFile);
  if (threads)
    cmd->add_option("--threads", common.threads, "Worker threads; results do not depend on it")
        ->check(CLI::Range(1, 1024));
}

void add_planner(CLI::App* cmd, PlannerChoice& p) {
  cmd->add_option("--checkpoint", p.checkpoint, "Policy checkpoint to evaluate with mean actions");
  cmd->add_option("--planner", p.planner, "Use 'baseline' for the straight-line planner");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent navigation with policy-gradient training"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a policy and write checkpoints plus a training log");
  add_common(c_train, train.common, true);
  c_train->add_option("--seed", train.seed, "Master seed (overrides train.master_seed)");
  c_train->add_option("--out", train.out, "Output directory (overrides output_dir)");
  c_train->add_option("--updates", train.updates, "Gradient updates (overrides train.total_updates)");
  c_train->add_flag("--resume", train.resume, "Continue from the newest checkpoint in the output directory");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Benchmark planners and write a CSV");
  add_common(c_eval, eval.common, true);
  add_planner(c_eval, eval.planners);
  c_eval->add_option("--checkpoint-dir", eval.checkpoint_dir, "Evaluate every checkpoint into a learning curve");
  c_eval->add_option("--domain", eval.domains, "Domain kind (repeatable)");
  c_eval->add_option("--seed", eval.seeds, "Problem-set seed (repeatable)");
  c_eval->add_option("--count", eval.count, "Problems per (domain, seed)");
  c_eval->add_option("--out", eval.out, "CSV path (stdout when omitted)");

  RolloutArgs rollout;
  auto* c_rollout = app.add_subcommand("rollout", "Dump one episode as JSON Lines");
  add_common(c_rollout, rollout.common, false);
  add_planner(c_rollout, rollout.planners);
  c_rollout->add_option("--domain", rollout.domain, "Domain kind");
  c_rollout->add_option("--seed", rollout.seed, "Problem-set seed");
  c_rollout->add_option("--index", rollout.index, "Problem index");
  c_rollout->add_option("--out", rollout.out, "JSONL path (stdout when omitted)");

  std::string replay_in;
  double replay_tol = 1e-12;
  auto* c_replay = app.add_subcommand("replay", "Re-simulate a rollout dump and compare states");
  c_replay->add_option("--in", replay_in, "JSONL dump")->required()->check(CLI::ExistingFile);
  c_replay->add_option("--tol", replay_tol, "Largest accepted absolute deviation");

  int trials = 100;
  std::uint64_t gc_seed = 0;
  bool corrupt = false;
  auto* c_grad = app.add_subcommand("gradcheck", "Check policy gradients against finite differences");
  c_grad->add_option("--trials", trials, "Random instances to check")->check(CLI::NonNegativeNumber);
  c_grad->add_option("--seed", gc_seed, "Seed for the random instances");
  c_grad->add_flag("--corrupt-backward", corrupt)->group("");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-problems", "Write a problem-set manifest");
  add_common(c_gen, gen.common, false);
  c_gen->add_option("--domain", gen.domain, "Domain kind")->required();
  c_gen->add_option("--seed", gen.seed, "Problem-set seed");
  c_gen->add_option("--count", gen.count, "Number of problems");
  c_gen->add_option("--out", gen.out, "Manifest path (stdout when omitted)");

  Common show;
  auto* c_show = app.add_subcommand("show-config", "Print the resolved configuration");
  add_common(c_show, show, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*c_train) return cmd_train(train);
    if (*c_eval) return cmd_eval(eval);
    if (*c_rollout) return cmd_rollout(rollout);
    if (*c_replay) return cmd_replay(replay_in, replay_tol);
    if (*c_grad) return cmd_gradcheck(trials, gc_seed, corrupt);
    if (*c_gen) return cmd_gen_problems(gen);
    if (*c_show) {
      std::cout << serialize_config(resolve_config(show));
      return kOk;
    }
  } catch (const CheckpointVersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
