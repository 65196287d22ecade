#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace teamnav {

/// Dense row-major 2-D array. Vectors are stored as 1 x n rows.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Tape;

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order and
/// backward() visits them in exact reverse order.
class Tape {
 public:
  /// Receives the tape and the node's own index; must accumulate into input grads.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  /// Differentiable input (parameter).
  Var leaf(Tensor value);
  /// Input that is never differentiated.
  Var constant(Tensor value);

  /// Records a primitive. `name` is used in non-finite diagnostics.
  Var record(const char* name, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.index].value; }
  /// Gradient of the last backward() loss with respect to v (zeros if untouched).
  const Tensor& grad(Var v) const { return nodes_[v.index].grad; }
  Tensor& grad_mut(std::size_t index) { return nodes_[index].grad; }
  const Var& input(std::size_t node, std::size_t k) const { return nodes_[node].inputs[k]; }
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }

  std::size_t size() const { return nodes_.size(); }

  /// Throws std::invalid_argument unless `loss` is 1 x 1.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Primitives. Shape mismatches throw std::invalid_argument; non-finite results
// throw NumericalError naming the primitive.

/// x W + b, with x: n x in, W: in x out, b: 1 x out broadcast over rows.
Var affine(Tape& t, Var x, Var w, Var b);
Var tanh(Tape& t, Var x);
Var exp(Tape& t, Var x);
Var log(Tape& t, Var x);
Var square(Tape& t, Var x);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
/// Elementwise product.
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, double c);
/// Sum of all entries, 1 x 1.
Var sum(Tape& t, Var x);
/// Stacks a 1 x m row n times.
Var repeat_rows(Tape& t, Var row, Eigen::Index n);

// ---------------------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 8e-3;
  double weight_decay = 1e-4;
  double beta_m = 0.9;
  double beta_v = 0.999;
  double epsilon = 1e-8;
  // false: L2 added to the gradient; true: AdamW-style decay applied to the weights.
  bool decoupled_weight_decay = false;

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::span<const Tensor> params);
};

/// One bias-corrected Adam update in place. Throws NumericalError on a non-finite gradient.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

// ---------------------------------------------------------------------------

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t param_index = 0;
  Eigen::Index coordinate = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = true;
};

/// Builds a scalar loss from parameter leaves recorded on a fresh tape.
using ScalarGraph = std::function<Var(Tape&, std::span<const Var>)>;

/// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-3);

/// Compares backward() against central differences coordinate by coordinate.
GradCheckReport finite_diff_check(const ScalarGraph& f, const std::vector<Tensor>& params,
                                  double h = 1e-5, double tol = 1e-6);

/// Evaluates f and returns its value plus the gradient for every parameter.
std::pair<double, std::vector<Tensor>> value_and_grad(const ScalarGraph& f,
                                                      const std::vector<Tensor>& params);

}  // namespace teamnav
