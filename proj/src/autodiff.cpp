#include "teamnav/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "teamnav/errors.hpp"

namespace teamnav {

Var Tape::leaf(Tensor value) {
  nodes_.push_back({std::move(value), {}, {}, {}, true});
  return {nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  nodes_.push_back({std::move(value), {}, {}, {}, false});
  return {nodes_.size() - 1};
}

Var Tape::record(const char* name, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.allFinite()) throw NumericalError(fmt::format("autodiff: {} produced a non-finite value", name));
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [&](Var v) { return nodes_[v.index].requires_grad; });
  nodes_.push_back({std::move(value), {}, std::move(inputs), std::move(backward), needs});
  return {nodes_.size() - 1};
}

void Tape::backward(Var loss) {
  const auto& out = nodes_[loss.index].value;
  if (out.rows() != 1 || out.cols() != 1)
    throw std::invalid_argument(fmt::format("backward: loss must be 1x1, got {}x{}", out.rows(), out.cols()));
  for (auto& n : nodes_) n.grad = Tensor::Zero(n.value.rows(), n.value.cols());
  nodes_[loss.index].grad(0, 0) = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, i);
  }
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(
        fmt::format("{}: shape mismatch {}x{} vs {}x{}", op, a.rows(), a.cols(), b.rows(), b.cols()));
}

// Adds g into the gradient of input k of `node` when that input is differentiable.
template <typename Expr>
void accumulate(Tape& t, std::size_t node, std::size_t k, const Expr& g) {
  const Var in = t.input(node, k);
  if (t.requires_grad(in)) t.grad_mut(in.index) += g;
}

}  // namespace

Var affine(Tape& t, Var x, Var w, Var b) {
  const auto& X = t.value(x);
  const auto& W = t.value(w);
  const auto& B = t.value(b);
  if (X.cols() != W.rows() || B.rows() != 1 || B.cols() != W.cols())
    throw std::invalid_argument(fmt::format("affine: incompatible shapes x {}x{}, W {}x{}, b {}x{}", X.rows(),
                                            X.cols(), W.rows(), W.cols(), B.rows(), B.cols()));
  Tensor y = X * W;
  y.rowwise() += B.row(0);
  return t.record("affine", std::move(y), {x, w, b}, [](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(Var{self});
    const Tensor& X = t.value(t.input(self, 0));
    const Tensor& W = t.value(t.input(self, 1));
    accumulate(t, self, 0, g * W.transpose());
    accumulate(t, self, 1, X.transpose() * g);
    accumulate(t, self, 2, g.colwise().sum());
  });
}

Var tanh(Tape& t, Var x) {
  Tensor y = t.value(x).array().tanh().matrix();
  return t.record("tanh", std::move(y), {x}, [](Tape& t, std::size_t self) {
    const Tensor& y = t.value(Var{self});
    accumulate(t, self, 0, (t.grad(Var{self}).array() * (1.0 - y.array().square())).matrix());
  });
}

Var exp(Tape& t, Var x) {
  Tensor y = t.value(x).array().exp().matrix();
  return t.record("exp", std::move(y), {x}, [](Tape& t, std::size_t self) {
    accumulate(t, self, 0, (t.grad(Var{self}).array() * t.value(Var{self}).array()).matrix());
  });
}

Var log(Tape& t, Var x) {
  if ((t.value(x).array() <= 0.0).any()) throw NumericalError("autodiff: log of a non-positive value");
  Tensor y = t.value(x).array().log().matrix();
  return t.record("log", std::move(y), {x}, [](Tape& t, std::size_t self) {
    const Tensor& X = t.value(t.input(self, 0));
    accumulate(t, self, 0, (t.grad(Var{self}).array() / X.array()).matrix());
  });
}

Var square(Tape& t, Var x) {
  Tensor y = t.value(x).array().square().matrix();
  return t.record("square", std::move(y), {x}, [](Tape& t, std::size_t self) {
    const Tensor& X = t.value(t.input(self, 0));
    accumulate(t, self, 0, (2.0 * t.grad(Var{self}).array() * X.array()).matrix());
  });
}

Var add(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "add");
  Tensor y = t.value(a) + t.value(b);
  return t.record("add", std::move(y), {a, b}, [](Tape& t, std::size_t self) {
    accumulate(t, self, 0, t.grad(Var{self}));
    accumulate(t, self, 1, t.grad(Var{self}));
  });
}

Var sub(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "sub");
  Tensor y = t.value(a) - t.value(b);
  return t.record("sub", std::move(y), {a, b}, [](Tape& t, std::size_t self) {
    accumulate(t, self, 0, t.grad(Var{self}));
    accumulate(t, self, 1, -t.grad(Var{self}));
  });
}

Var mul(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "mul");
  Tensor y = t.value(a).cwiseProduct(t.value(b));
  return t.record("mul", std::move(y), {a, b}, [](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(Var{self});
    accumulate(t, self, 0, g.cwiseProduct(t.value(t.input(self, 1))));
    accumulate(t, self, 1, g.cwiseProduct(t.value(t.input(self, 0))));
  });
}

Var scale(Tape& t, Var x, double c) {
  Tensor y = t.value(x) * c;
  return t.record("scale", std::move(y), {x}, [c](Tape& t, std::size_t self) {
    accumulate(t, self, 0, t.grad(Var{self}) * c);
  });
}

Var sum(Tape& t, Var x) {
  Tensor y(1, 1);
  y(0, 0) = t.value(x).sum();
  return t.record("sum", std::move(y), {x}, [](Tape& t, std::size_t self) {
    const Tensor& X = t.value(t.input(self, 0));
    accumulate(t, self, 0, Tensor::Constant(X.rows(), X.cols(), t.grad(Var{self})(0, 0)));
  });
}

Var repeat_rows(Tape& t, Var row, Eigen::Index n) {
  const auto& R = t.value(row);
  if (R.rows() != 1) throw std::invalid_argument("repeat_rows: input must be a single row");
  Tensor y = R.replicate(n, 1);
  return t.record("repeat_rows", std::move(y), {row}, [](Tape& t, std::size_t self) {
    accumulate(t, self, 0, t.grad(Var{self}).colwise().sum());
  });
}

// ---------------------------------------------------------------------------

AdamState::AdamState(AdamConfig cfg, std::span<const Tensor> params) : config(cfg) {
  for (const auto& p : params) {
    m.push_back(Tensor::Zero(p.rows(), p.cols()));
    v.push_back(Tensor::Zero(p.rows(), p.cols()));
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i], grads[i], "adam_step");
    require_same_shape(params[i], state.m[i], "adam_step");
    if (!grads[i].allFinite()) throw NumericalError(fmt::format("adam_step: non-finite gradient in tensor {}", i));
  }

  const auto& c = state.config;
  ++state.step;
  const double bias_m = 1.0 - std::pow(c.beta_m, static_cast<double>(state.step));
  const double bias_v = 1.0 - std::pow(c.beta_v, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor g = grads[i];
    if (!c.decoupled_weight_decay) g += c.weight_decay * params[i];
    state.m[i] = c.beta_m * state.m[i] + (1.0 - c.beta_m) * g;
    state.v[i] = c.beta_v * state.v[i] + (1.0 - c.beta_v) * g.cwiseAbs2();
    const auto m_hat = state.m[i].array() / bias_m;
    const auto v_hat = state.v[i].array() / bias_v;
    if (c.decoupled_weight_decay) params[i] *= 1.0 - c.learning_rate * c.weight_decay;
    params[i].array() -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
  }
}

// ---------------------------------------------------------------------------

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

std::pair<double, std::vector<Tensor>> value_and_grad(const ScalarGraph& f,
                                                      const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.leaf(p));
  const Var loss = f(tape, vars);
  tape.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(vars.size());
  for (auto v : vars) grads.push_back(tape.grad(v));
  return {tape.value(loss)(0, 0), std::move(grads)};
}

namespace {

double evaluate(const ScalarGraph& f, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& p : params) vars.push_back(tape.constant(p));
  return tape.value(f(tape, vars))(0, 0);
}

}  // namespace

GradCheckReport finite_diff_check(const ScalarGraph& f, const std::vector<Tensor>& params, double h,
                                  double tol) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be positive");
  const auto analytic = value_and_grad(f, params).second;

  GradCheckReport report;
  auto probe = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index k = 0; k < params[p].size(); ++k) {
      const double orig = params[p].data()[k];
      probe[p].data()[k] = orig + h;
      const double up = evaluate(f, probe);
      probe[p].data()[k] = orig - h;
      const double down = evaluate(f, probe);
      probe[p].data()[k] = orig;

      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p].data()[k];
      const double err = relative_error(a, numeric);
      if (err > report.max_rel_error || (p == 0 && k == 0)) {
        report.max_rel_error = err;
        report.param_index = p;
        report.coordinate = k;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace teamnav
