// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "optim.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace rsb {

/// Stochastic depth on a residual branch output [B, D]: per-sample
/// Bernoulli(1 - rate) mask with inverted 1/(1 - rate) scaling during
/// training, identity at evaluation. Apply to the branch only, before the
/// skip addition.
Tensor drop_path(Tape& tape, Tensor residual, double rate, bool training,
                 RngStream& rng);

/// Per-element inverted dropout; identity at evaluation.
Tensor dropout(Tape& tape, Tensor x, double rate, bool training,
               RngStream& rng);

/// Exponentially decayed shadow copy of the parameters:
/// shadow <- d * shadow + (1 - d) * live after every optimizer step.
/// The shadow starts as a copy of the live weights.
class EmaState {
public:
  EmaState(double decay, const std::vector<Param*>& params);
  void update(const std::vector<Param*>& params);
  /// Exchange live values and shadow; call twice to restore (evaluation
  /// swaps the shadow in, measures, swaps back).
  void swap_with(const std::vector<Param*>& params);
  double decay() const { return decay_; }
  const std::vector<std::vector<double>>& shadow() const { return shadow_; }

private:
  double decay_;
  std::vector<std::vector<double>> shadow_;
};

/// Repeated-Augmentation epoch sampler: a seeded shuffle is truncated to
/// ceil(n/m) distinct indices, each repeated m times consecutively, so a
/// batch of size B holds B/m distinct samples and the epoch issues about n
/// draws in total (some images go unseen that epoch). m = 1 degenerates to
/// a plain shuffled epoch.
struct RepeatedAugSampler {
  std::size_t dataset_size = 0;
  std::size_t batch_size = 0;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;

  /// Slot-ordered dataset indices for one epoch.
  std::vector<std::uint32_t> epoch_indices(std::uint64_t epoch) const;
};

}  // namespace rsb
