// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rsb {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

/// Lightweight handle to a node on a Tape. Values are dense row-major
/// 64-bit floats; gradients share the node's shape.
class Tensor {
public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const { return shape().at(axis); }

  /// Read-only view of the forward value.
  std::span<const double> values() const;
  /// Read-only view of the accumulated gradient (empty until backward).
  std::span<const double> grad() const;
  /// Value of a rank-0/size-1 tensor.
  double scalar() const;

private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

enum class EwKind { Add, Sub, Mul, Div };
enum class ActKind { Relu, Gelu, Sigmoid };
enum class ReduceKind { Sum, Mean };

/// Records forward operations and replays their backward rules in reverse.
///
/// Creation order is topological by construction (an op only consumes
/// tensors that already exist), so backward() is a single reverse sweep
/// that visits each node exactly once. Gradients accumulate additively;
/// leaves write into caller-owned buffers. A tape lives for one forward /
/// backward pass; parameters persist outside it and are re-wrapped as
/// leaves each step.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf wrapping external storage. `grad_sink`, when non-null, receives
  /// accumulated gradients during backward (caller zeroes it between steps).
  Tensor leaf(Shape shape, const double* values, double* grad_sink);
  /// Constant owned by the tape; never receives gradient.
  Tensor constant(Shape shape, std::vector<double> values);
  Tensor constant_scalar(double value);

  Tensor matmul(Tensor a, Tensor b);
  Tensor elementwise(Tensor a, Tensor b, EwKind kind);
  Tensor elementwise_scalar(Tensor a, double b, EwKind kind);
  /// [B,N] + [N] row-vector broadcast (bias addition).
  Tensor add_rowvec(Tensor m, Tensor v);
  Tensor activation(Tensor x, ActKind kind);
  /// Reduce over all elements.
  Tensor reduce_all(Tensor x, ReduceKind kind);
  /// Reduce over the given axes (deduplicated, each < rank).
  Tensor reduce(Tensor x, ReduceKind kind, const std::vector<std::size_t>& axes);

  /// Mean cross-entropy with soft distribution targets (rows sum to 1):
  /// mean_b [ logsumexp(z_b) * sum_k t_bk - sum_k t_bk z_bk ].
  Tensor ce_loss(Tensor logits, std::span<const double> targets);
  /// Mean binary cross-entropy over all B*K entries, stable logit form:
  /// max(z,0) - z t + log1p(exp(-|z|)).
  Tensor bce_loss(Tensor logits, std::span<const double> targets);

  /// Populate leaf gradients with d(loss)/d(leaf). Loss must be scalar and
  /// recorded on this tape; calling twice without a fresh tape is an error.
  void backward(Tensor loss);

  std::size_t node_count() const { return nodes_.size(); }

private:
  friend class Tensor;
  struct Node {
    Shape shape;
    std::vector<double> value;        // owned storage (empty for ext leaves)
    const double* val_ptr = nullptr;  // points at value.data() or external
    std::vector<double> grad;         // lazily sized on backward
    double* grad_sink = nullptr;      // external accumulation target (leaf)
    bool requires_grad = false;
    std::function<void(Tape&)> pullback;  // null for leaves/constants
  };

  Node& node(std::size_t i) { return nodes_[i]; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  Tensor push(Node n);
  std::span<const double> vals(std::size_t i) const;
  double* grad_buffer(std::size_t i);
  void add_to_grad(std::size_t i, std::span<const double> contrib);
  void check_finite(const Node& n, const char* op) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

/// Max relative error between the analytic gradient of f at x and central
/// finite differences with step h:
///   max_i |analytic_i - numeric_i| / max(|analytic_i|, |numeric_i|, 1e-8).
/// f must build a scalar from the single input tensor it is handed.
double grad_check(const std::function<Tensor(Tape&, Tensor)>& f,
                  const Shape& shape, std::vector<double> x, double h);

}  // namespace rsb
