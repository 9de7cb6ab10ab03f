// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace rsb {

enum class ScheduleKind { Cosine, Step, Waterfall };

/// Once-per-epoch multiplicative learning-rate noise, active over a
/// fractional window of training.
struct LrNoiseConfig {
  bool enabled = false;
  double active_lo = 0.0;  // fractions of total training
  double active_hi = 1.0;
  double stddev = 0.0;
  std::uint64_t seed = 0;
};

struct ScheduleConfig {
  double base_lr = 0.1;
  double min_lr = 0.0;  // absolute terminal value for cosine
  double warmup_epochs = 0.0;
  double total_epochs = 100.0;
  ScheduleKind kind = ScheduleKind::Cosine;
  double step_decay_rate = 0.988;      // Step: rate^floor(progress/interval)
  double step_interval_epochs = 1.0;
  double waterfall_factor = 0.1;       // Waterfall: factor^(#milestones passed)
  std::vector<double> waterfall_milestones;
  LrNoiseConfig noise;
};

/// Learning rate at real-valued epoch progress in [0, total_epochs].
/// Warmup ramps linearly from 0 to base_lr; cosine decays to min_lr at the
/// final epoch; step decays geometrically per interval; waterfall drops by
/// a fixed factor at each milestone.
double lr_at(const ScheduleConfig& cfg, double epoch);

/// Multiplies lr by (1 + clamp(N(0, std), -0.9, +10)) when epoch/total lies
/// in the active window; the draw is keyed by (noise seed, epoch) so call
/// order never matters. Identity outside the window or at std 0.
double apply_lr_noise(const ScheduleConfig& cfg, std::uint64_t epoch,
                      double lr);

}  // namespace rsb
