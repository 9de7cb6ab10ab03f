// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace rsb {

/// One trainable tensor: value, gradient accumulator, and identity.
/// Rank >= 2 parameters form per-leading-row unit groups for AGC / AdamP
/// norms; rank-1 parameters are a single group.
struct Param {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool is_bias = false;

  std::size_t size() const { return value.size(); }
  std::size_t unit_count() const {
    return shape.size() >= 2 ? shape[0] : 1;
  }
  std::size_t unit_size() const { return size() / unit_count(); }
};

void zero_grads(const std::vector<Param*>& slots);

struct LambConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double weight_decay = 0.0;  // decoupled, inside the trust-ratio numerator
  std::optional<double> trust_clip;
};

struct SgdConfig {
  double momentum = 0.9;
  double weight_decay = 0.0;  // coupled (added to the gradient)
};

struct RmspropTfConfig {
  double rho = 0.9;
  double eps = 1e-3;   // inside the square root
  double momentum = 0.9;
  double weight_decay = 0.0;  // coupled
};

struct AdamPConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
  double delta = 0.1;
  double wd_ratio = 0.1;
};

struct AgcConfig {
  double clip_factor = 0.05;
  double eps = 1e-3;
};

/// ||w|| / ||update||, 1 when either norm vanishes, optionally clipped.
/// Degree-0 homogeneous: rescaling both norms by the same factor leaves it
/// unchanged.
double lamb_trust_ratio(double weight_norm, double update_norm,
                        const std::optional<double>& clip = std::nullopt);

/// Base for all update rules. One instance owns its slots' state buffers;
/// the learning rate comes from the scheduler at every step.
class Optimizer {
public:
  explicit Optimizer(std::vector<Param*> slots) : slots_(std::move(slots)) {}
  virtual ~Optimizer() = default;
  virtual void step(double lr) = 0;
  const std::vector<Param*>& slots() const { return slots_; }

protected:
  void check_grads_finite() const;
  std::vector<Param*> slots_;
  long step_count_ = 0;
};

/// LAMB: Adam moments with bias correction, decoupled decay in the update
/// direction, and a per-slot trust ratio ||w|| / ||update|| (1 when either
/// norm vanishes).
class LambOptimizer : public Optimizer {
public:
  LambOptimizer(std::vector<Param*> slots, LambConfig cfg);
  void step(double lr) override;

private:
  LambConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
};

/// SGD with Nesterov momentum and coupled L2:
/// g' = g + wd w;  buf = mu buf + g';  w -= lr (g' + mu buf).
class SgdNesterovOptimizer : public Optimizer {
public:
  SgdNesterovOptimizer(std::vector<Param*> slots, SgdConfig cfg);
  void step(double lr) override;

private:
  SgdConfig cfg_;
  std::vector<std::vector<double>> buf_;
};

/// RMSProp with Tensorflow-1.x semantics: the accumulator starts at ONE
/// (not zero) and epsilon sits inside the square root. Both details change
/// the trajectory; the one-initialization is pinned by a regression test.
class RmspropTfOptimizer : public Optimizer {
public:
  RmspropTfOptimizer(std::vector<Param*> slots, RmspropTfConfig cfg);
  void step(double lr) override;

private:
  RmspropTfConfig cfg_;
  std::vector<std::vector<double>> v_, buf_;
};

/// AdamP: Adam update projected orthogonally to w (per unit group) when the
/// cosine similarity of w and g falls under delta / sqrt(dim), with weight
/// decay scaled by wd_ratio for projected groups. Decoupled decay.
class AdamPOptimizer : public Optimizer {
public:
  AdamPOptimizer(std::vector<Param*> slots, AdamPConfig cfg);
  void step(double lr) override;

private:
  AdamPConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
};

/// Adaptive Gradient Clipping, applied to grads before the optimizer step:
/// per unit group, if ||g|| / max(||w||, eps) > clip_factor the gradient is
/// rescaled onto that boundary. Callers decide which slots participate
/// (biases are conventionally excluded).
void agc_clip(const std::vector<Param*>& slots, const AgcConfig& cfg);

std::unique_ptr<Optimizer> make_lamb(std::vector<Param*> slots, LambConfig cfg);
std::unique_ptr<Optimizer> make_sgd_nesterov(std::vector<Param*> slots,
                                             SgdConfig cfg);
std::unique_ptr<Optimizer> make_rmsprop_tf(std::vector<Param*> slots,
                                           RmspropTfConfig cfg);
std::unique_ptr<Optimizer> make_adamp(std::vector<Param*> slots,
                                      AdamPConfig cfg);

}  // namespace rsb
