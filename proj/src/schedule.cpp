// SPDX-License-Identifier: Apache-2.0
#include "schedule.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace rsb {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double lr_at(const ScheduleConfig& cfg, double epoch) {
  if (epoch < 0.0 || epoch > cfg.total_epochs) {
    throw ContractError("lr_at: epoch outside [0, total_epochs]");
  }
  if (cfg.warmup_epochs > cfg.total_epochs) {
    throw ConfigError("lr_at: warmup longer than training");
  }
  if (epoch < cfg.warmup_epochs) {
    return cfg.base_lr * (epoch / cfg.warmup_epochs);
  }
  const double progress = epoch - cfg.warmup_epochs;
  switch (cfg.kind) {
    case ScheduleKind::Cosine: {
      const double span = cfg.total_epochs - cfg.warmup_epochs;
      const double tau = span > 0.0 ? progress / span : 1.0;
      return cfg.min_lr +
             (cfg.base_lr - cfg.min_lr) * (1.0 + std::cos(kPi * tau)) / 2.0;
    }
    case ScheduleKind::Step: {
      if (cfg.step_interval_epochs <= 0.0) {
        throw ConfigError("lr_at: step interval must be positive");
      }
      const double k = std::floor(progress / cfg.step_interval_epochs);
      return cfg.base_lr * std::pow(cfg.step_decay_rate, k);
    }
    case ScheduleKind::Waterfall: {
      int passed = 0;
      for (double m : cfg.waterfall_milestones) {
        if (epoch >= m) ++passed;
      }
      return cfg.base_lr * std::pow(cfg.waterfall_factor, passed);
    }
  }
  throw ConfigError("lr_at: unknown schedule kind");
}

double apply_lr_noise(const ScheduleConfig& cfg, std::uint64_t epoch,
                      double lr) {
  if (!cfg.noise.enabled || cfg.noise.stddev == 0.0) return lr;
  const double frac =
      cfg.total_epochs > 0.0 ? static_cast<double>(epoch) / cfg.total_epochs : 0.0;
  if (frac < cfg.noise.active_lo || frac > cfg.noise.active_hi) return lr;
  RngStream stream(cfg.noise.seed, epoch, 0, stream_tag::kLrNoise);
  const double draw =
      std::clamp(stream.normal(0.0, cfg.noise.stddev), -0.9, 10.0);
  return lr * (1.0 + draw);
}

}  // namespace rsb
