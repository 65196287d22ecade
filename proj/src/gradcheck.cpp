#include "teamnav/gradcheck.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "teamnav/policy.hpp"
#include "teamnav/rng.hpp"

namespace teamnav {

namespace {

// Forward is tanh, backward forgets to square: dy/dx = 1 - y.
Var miswired_tanh(Tape& t, Var x) {
  Tensor y = t.value(x).array().tanh().matrix();
  return t.record("miswired_tanh", std::move(y), {x}, [](Tape& t, std::size_t self) {
    const Var in = t.input(self, 0);
    if (!t.requires_grad(in)) return;
    const Tensor& y = t.value(Var{self});
    t.grad_mut(in.index) += (t.grad(Var{self}).array() * (1.0 - y.array())).matrix();
  });
}

Var corrupted_log_prob(Tape& tape, std::span<const Var> vars, Var obs, Var actions) {
  const std::size_t layers = (vars.size() - 1) / 2;
  Var h = obs;
  for (std::size_t l = 0; l < layers; ++l) {
    h = affine(tape, h, vars[2 * l], vars[2 * l + 1]);
    if (l + 1 < layers) h = miswired_tanh(tape, h);
  }
  const auto rows = tape.value(obs).rows();
  const Var log_std = repeat_rows(tape, vars.back(), rows);
  const Var z = mul(tape, sub(tape, actions, h), exp(tape, scale(tape, log_std, -1.0)));
  const Var norm = tape.constant(Tensor::Constant(rows, 2, -0.5 * std::log(2.0 * std::numbers::pi)));
  return add(tape, sub(tape, scale(tape, square(tape, z), -0.5), log_std), norm);
}

Tensor random_tensor(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo, double hi) {
  Tensor t(rows, cols);
  for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

PolicyGradCheckResult policy_gradcheck(int trials, std::uint64_t seed, bool corrupt_backward, double tol) {
  if (trials < 0) throw std::invalid_argument("policy_gradcheck: negative trial count");
  PolicyGradCheckResult result;
  result.trials = trials;

  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(seed, static_cast<std::uint64_t>(trial), "gradcheck");
    const int n_observed = 1 + static_cast<int>(rng.below(10));
    const int h1 = 4 + static_cast<int>(rng.below(29));
    const int h2 = 4 + static_cast<int>(rng.below(29));
    auto params = PolicyParams::random({observation_size(n_observed), h1, h2, 2}, rng, 1.0);
    params.log_std = random_tensor(1, 2, rng, -1.0, 0.5);

    const auto rows = static_cast<Eigen::Index>(1 + rng.below(5));
    const Tensor obs = random_tensor(rows, params.dims.front(), rng, 0.0, 1.0);
    const Tensor actions = random_tensor(rows, 2, rng, -2.0, 2.0);
    const Tensor weights = random_tensor(rows, 2, rng, -1.0, 1.0);

    const ScalarGraph graph = [&](Tape& tape, std::span<const Var> vars) {
      const Var o = tape.constant(obs);
      const Var a = tape.constant(actions);
      const Var lp = corrupt_backward ? corrupted_log_prob(tape, vars, o, a) : log_prob_graph(tape, vars, o, a);
      return sum(tape, mul(tape, lp, tape.constant(weights)));
    };
    const auto report = finite_diff_check(graph, params.tensors(), 1e-5, tol);
    if (result.worst_trial < 0 || report.max_rel_error > result.max_rel_error) {
      result.max_rel_error = report.max_rel_error;
      result.worst_trial = trial;
      result.worst = report;
    }
  }
  result.passed = result.max_rel_error < tol;
  return result;
}

}  // namespace teamnav
