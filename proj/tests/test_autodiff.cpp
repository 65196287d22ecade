#include <doctest.h>

#include "teamnav/autodiff.hpp"
#include "teamnav/errors.hpp"
#include "teamnav/gradcheck.hpp"
#include "teamnav/rng.hpp"

using namespace teamnav;

namespace {

Tensor random_tensor(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = rng.uniform(lo, hi);
  return t;
}

Tensor row(std::initializer_list<double> values) {
  Tensor t(1, static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double v : values) t(0, k++) = v;
  return t;
}

}  // namespace

TEST_CASE("primitive forward values") {
  Tape t;
  CHECK(t.value(tanh(t, t.constant(Tensor::Zero(1, 3)))).isZero());

  Rng rng(1);
  const Tensor x = random_tensor(4, 3, rng);
  const Var y = affine(t, t.constant(x), t.constant(Tensor::Identity(3, 3)), t.constant(Tensor::Zero(1, 3)));
  CHECK(t.value(y) == x);

  CHECK(t.value(sum(t, t.constant(row({1, 2, 3}))))(0, 0) == 6.0);
  CHECK(t.value(repeat_rows(t, t.constant(row({1, 2})), 3)) == Tensor::Constant(3, 1, 1.0) * row({1, 2}));
  CHECK(t.value(scale(t, t.constant(row({1, -2})), 3.0)) == row({3, -6}));
  CHECK(t.value(mul(t, t.constant(row({2, 3})), t.constant(row({4, 5})))) == row({8, 15}));
}

TEST_CASE("constant loss has zero gradient") {
  const auto [value, grads] = value_and_grad(
      [](Tape& t, std::span<const Var>) { return t.constant(Tensor::Constant(1, 1, 4.0)); },
      {Tensor::Ones(2, 3)});
  CHECK(value == 4.0);
  CHECK(grads[0].isZero());
}

TEST_CASE("sum of squares has gradient 2 theta") {
  Rng rng(2);
  const Tensor theta = random_tensor(3, 4, rng);
  const ScalarGraph f = [](Tape& t, std::span<const Var> p) { return sum(t, square(t, p[0])); };
  const auto [value, grads] = value_and_grad(f, {theta});
  CHECK(value == doctest::Approx(theta.squaredNorm()).epsilon(1e-14));
  CHECK((grads[0] - 2.0 * theta).cwiseAbs().maxCoeff() == 0.0);

  const auto report = finite_diff_check(f, {theta});
  CHECK(report.max_rel_error < 1e-8);
}

TEST_CASE("every primitive passes a finite-difference check") {
  Rng rng(3);
  const Tensor a = random_tensor(3, 2, rng, 0.5, 1.5);
  const Tensor b = random_tensor(3, 2, rng, -1.0, 1.0);
  const Tensor w = random_tensor(2, 4, rng);
  const Tensor bias = random_tensor(1, 4, rng);
  const Tensor r = random_tensor(1, 2, rng);

  const std::vector<std::pair<const char*, ScalarGraph>> graphs{
      {"affine", [](Tape& t, std::span<const Var> p) { return sum(t, tanh(t, affine(t, p[0], p[2], p[3]))); }},
      {"exp", [](Tape& t, std::span<const Var> p) { return sum(t, exp(t, p[1])); }},
      {"log", [](Tape& t, std::span<const Var> p) { return sum(t, log(t, p[0])); }},
      {"mul/sub", [](Tape& t, std::span<const Var> p) { return sum(t, mul(t, sub(t, p[0], p[1]), p[1])); }},
      {"add/scale", [](Tape& t, std::span<const Var> p) { return sum(t, square(t, add(t, scale(t, p[0], -2.5), p[1]))); }},
      {"repeat_rows", [](Tape& t, std::span<const Var> p) { return sum(t, mul(t, repeat_rows(t, p[4], 3), p[1])); }},
  };
  for (const auto& [name, f] : graphs) {
    CAPTURE(name);
    const auto report = finite_diff_check(f, {a, b, w, bias, r});
    CHECK(report.max_rel_error < 1e-6);
  }
}

TEST_CASE("random two-layer network gradient") {
  Rng rng(4);
  const Tensor x = random_tensor(5, 6, rng);
  std::vector<Tensor> params{random_tensor(6, 8, rng), random_tensor(1, 8, rng), random_tensor(8, 2, rng),
                             random_tensor(1, 2, rng)};
  const ScalarGraph f = [&](Tape& t, std::span<const Var> p) {
    const Var h = tanh(t, affine(t, t.constant(x), p[0], p[1]));
    return sum(t, square(t, affine(t, h, p[2], p[3])));
  };
  CHECK(finite_diff_check(f, params).max_rel_error < 1e-6);
}

TEST_CASE("gradients are linear in the loss") {
  Rng rng(5);
  const Tensor theta = random_tensor(2, 3, rng);
  const ScalarGraph f = [](Tape& t, std::span<const Var> p) { return sum(t, tanh(t, p[0])); };
  const ScalarGraph g = [](Tape& t, std::span<const Var> p) { return scale(t, sum(t, tanh(t, p[0])), -3.0); };
  const auto gf = value_and_grad(f, {theta}).second[0];
  const auto gg = value_and_grad(g, {theta}).second[0];
  CHECK((gg + 3.0 * gf).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("autodiff error reporting") {
  Tape t;
  const Var a = t.leaf(Tensor::Ones(2, 2));
  const Var b = t.leaf(Tensor::Ones(3, 2));
  CHECK_THROWS_AS(add(t, a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.backward(a), std::invalid_argument);
  CHECK_THROWS_AS(log(t, t.constant(Tensor::Zero(1, 1))), NumericalError);
  CHECK_THROWS_AS(exp(t, t.constant(Tensor::Constant(1, 1, 1e6))), NumericalError);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient and no decay is a fixed point") {
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<Tensor> p{Tensor::Constant(2, 2, 0.7)};
    AdamState s(cfg, p);
    const std::vector<Tensor> g{Tensor::Zero(2, 2)};
    adam_step(p, g, s);
    CHECK(p[0] == Tensor::Constant(2, 2, 0.7));
  }
  SUBCASE("first step moves each coordinate by about lr against the gradient sign") {
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    const Tensor g0 = row({0.3, -2.0, 1e-3});
    std::vector<Tensor> p{Tensor::Zero(1, 3)};
    AdamState s(cfg, p);
    adam_step(p, std::vector<Tensor>{g0}, s);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const double expected = -cfg.learning_rate * g0(0, k) / (std::abs(g0(0, k)) + cfg.epsilon);
      CHECK(p[0](0, k) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("coupled weight decay adds wd * theta to the gradient") {
    AdamConfig cfg;
    cfg.weight_decay = 0.5;
    std::vector<Tensor> p{row({2.0})};
    AdamState s(cfg, p);
    adam_step(p, std::vector<Tensor>{row({-1.0})}, s);
    // Effective gradient -1 + 0.5 * 2 = 0: nothing moves.
    CHECK(p[0](0, 0) == 2.0);
  }
  SUBCASE("decoupled weight decay shrinks the weights directly") {
    AdamConfig cfg;
    cfg.weight_decay = 0.5;
    cfg.decoupled_weight_decay = true;
    std::vector<Tensor> p{row({2.0})};
    AdamState s(cfg, p);
    adam_step(p, std::vector<Tensor>{row({0.0})}, s);
    CHECK(p[0](0, 0) == doctest::Approx(2.0 - cfg.learning_rate * 0.5 * 2.0));
  }
  SUBCASE("deterministic") {
    Rng rng(6);
    const Tensor init = random_tensor(3, 3, rng);
    const Tensor grad = random_tensor(3, 3, rng);
    std::vector<Tensor> p1{init}, p2{init};
    AdamState s1(AdamConfig{}, p1), s2(AdamConfig{}, p2);
    for (int i = 0; i < 5; ++i) {
      adam_step(p1, std::vector<Tensor>{grad}, s1);
      adam_step(p2, std::vector<Tensor>{grad}, s2);
    }
    CHECK(p1[0] == p2[0]);
  }
  SUBCASE("non-finite gradient is rejected") {
    std::vector<Tensor> p{row({1.0})};
    AdamState s(AdamConfig{}, p);
    CHECK_THROWS_AS(adam_step(p, std::vector<Tensor>{row({NAN})}, s), NumericalError);
  }
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-6));
}

TEST_CASE("policy gradcheck harness") {
  const auto ok = policy_gradcheck(10, 1);
  CHECK(ok.passed);
  CHECK(ok.max_rel_error < 1e-6);
  const auto none = policy_gradcheck(0);
  CHECK(none.passed);
  CHECK(none.trials == 0);
  const auto broken = policy_gradcheck(3, 1, true);
  CHECK_FALSE(broken.passed);
}
