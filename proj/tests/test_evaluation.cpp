#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "teamnav/checkpoint.hpp"
#include "teamnav/evaluation.hpp"

using namespace teamnav;
using namespace teamnav::testing;

TEST_CASE("weighted score") {
  CHECK(weighted_score(0, 0) == 0.0);
  CHECK(weighted_score(3, 5) == 25.0);
  CHECK(weighted_score(10, 0) == 100.0);
}

TEST_CASE("baseline in an obstacle-free world reaches every target without collisions") {
  const EnvConfig env;
  auto inst = gen_static_simple(10, 4, env);
  inst.world.obstacles.clear();
  const auto m = run_episode(Planner::baseline(), inst, env, RewardConfig{});
  CHECK(m.n_collisions == 0);
  CHECK(m.n_targets == 3);
  CHECK(m.score == 30.0);
}

TEST_CASE("baseline finishes when the horizon covers the route") {
  const EnvConfig env;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto inst = gen_static_simple(11, i, env);
    const auto& a = inst.world.agents[0];
    double path = 0.0;
    Vec2d at = a.position;
    for (int t : a.target_sequence) {
      // Arrival happens once inside the target radius, so the full distance bounds the route.
      path += distance(at, inst.world.target(t).position);
      at = inst.world.target(t).position;
    }
    inst.world.horizon = static_cast<int>(std::ceil(path / a.speed)) + 3;
    const auto m = run_episode(Planner::baseline(), inst, env, RewardConfig{});
    CHECK(m.n_targets == 3);
    CHECK(m.steps_executed <= inst.world.horizon);
  }
}

TEST_CASE("episodes are reproducible") {
  const EnvConfig env;
  Rng rng(1);
  const auto policy = Planner::from_policy("p", PolicyParams::random(PolicyParams::default_dims(10), rng, 1.0));
  for (auto kind : kAllDomains) {
    const auto inst = gen_problem(kind, 12, 3, env);
    CHECK(run_episode(policy, inst, env, RewardConfig{}) == run_episode(policy, inst, env, RewardConfig{}));
    CHECK(run_episode(Planner::baseline(), inst, env, RewardConfig{}) ==
          run_episode(Planner::baseline(), inst, env, RewardConfig{}));
  }
}

TEST_CASE("benchmark structure, statistics and CSV") {
  EnvConfig env;
  env.horizon = 25;
  Rng rng(2);
  const std::vector<Planner> planners{Planner::baseline(),
                                      Planner::from_policy("policy", PolicyParams::random(PolicyParams::default_dims(10), rng))};
  const std::vector<DomainKind> domains(std::begin(kAllDomains), std::end(kAllDomains));
  const auto report = run_benchmark(domains, {10, 11, 12}, planners, 4, env, RewardConfig{}, 2);
  CHECK(report.cells.size() == 18);
  CHECK(report.episode_count() == 72);

  for (const auto& cell : report.cells) {
    double sum = 0.0;
    for (const auto& e : cell.episodes) {
      sum += e.n_targets;
      CHECK(e.score == weighted_score(e.n_targets, e.n_collisions));
    }
    CHECK(cell.targets.mean == doctest::Approx(sum / 4.0).epsilon(1e-15));
  }

  const auto& cell = report.cell(DomainKind::MultiAgentDynamic, 11, "policy");
  const auto alone = run_episode(planners[1], gen_problem(DomainKind::MultiAgentDynamic, 11, 2, env), env, RewardConfig{});
  CHECK(cell.episodes[2] == alone);
  CHECK_THROWS_AS(report.cell(DomainKind::StaticSimple, 99, "policy"), std::out_of_range);

  std::ostringstream a, b;
  write_benchmark_csv(report, a);
  write_benchmark_csv(run_benchmark(domains, {10, 11, 12}, planners, 4, env, RewardConfig{}, 1), b);
  CHECK(a.str() == b.str());
  std::istringstream lines(a.str());
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 72);
  CHECK(a.str().starts_with("domain,seed,planner,problem_index,n_collisions,n_targets,score,steps_executed\n"));
}

TEST_CASE("summaries use the sample standard deviation") {
  const auto s = summarize(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(summarize(std::vector<double>{}).mean == 0.0);
}

TEST_CASE("learning curve over a checkpoint directory") {
  const auto dir = scratch_dir("curve");
  EnvConfig env;
  env.horizon = 20;
  Rng rng(3);
  for (int u : {200, 0, 100}) {
    Checkpoint c;
    c.params = PolicyParams::random(PolicyParams::default_dims(10), rng);
    c.training_update = u;
    save_checkpoint(c, dir / checkpoint_filename(u));
  }
  {
    std::ofstream junk(dir / checkpoint_filename(300));
    junk << "{not json";
  }
  const auto curve = evaluate_checkpoint_series(dir, DomainKind::StaticSimple, 10, 3, env, RewardConfig{});
  REQUIRE(curve.rows.size() == 3);
  CHECK(curve.rows[0].training_update == 0);
  CHECK(curve.rows[1].training_update == 100);
  CHECK(curve.rows[2].training_update == 200);
  CHECK(curve.warnings.size() == 1);
  for (const auto& r : curve.rows) CHECK(r.baseline_score.mean == curve.rows[0].baseline_score.mean);

  std::ostringstream out;
  write_learning_curve_csv(curve, out);
  CHECK(out.str().starts_with("training_update,domain,seed,mean_collisions"));
}
