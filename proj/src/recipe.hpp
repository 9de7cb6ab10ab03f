// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augment.hpp"
#include "mix.hpp"
#include "schedule.hpp"

namespace rsb {

enum class OptimizerKind { Lamb, SgdNesterov, RmspropTf, AdamP };
enum class GradClipKind { None, Agc };

/// Complete hyper-parameter record for one training procedure. Presets fill
/// every field; nothing is defaulted at train time.
struct Recipe {
  std::string name;
  std::uint32_t train_res = 224;
  std::uint32_t test_res = 224;
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 2048;
  // Batch size the stored lr refers to; scale_lr_for_batch rescales when
  // batch_size is overridden (linear, square-root for AdamP).
  std::uint32_t reference_batch_size = 2048;
  bool scale_lr_for_batch = false;

  OptimizerKind optimizer = OptimizerKind::Lamb;
  double lr = 5e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double opt_eps = 1e-6;
  double momentum = 0.9;
  double rho = 0.9;          // rmsprop accumulator decay
  double adamp_delta = 0.1;
  double adamp_wd_ratio = 0.1;
  double trust_clip = 0.0;   // 0 disables LAMB trust-ratio clipping

  ScheduleKind schedule = ScheduleKind::Cosine;
  double warmup_epochs = 5.0;
  double min_lr = 0.0;
  double step_decay_rate = 0.988;
  double step_interval_epochs = 1.0;
  double waterfall_factor = 0.1;
  std::vector<double> waterfall_milestones;
  bool noise_enabled = false;
  double noise_lo = 0.45;
  double noise_hi = 1.0;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;

  LossKind loss = LossKind::Bce;
  BceStyle bce_style = BceStyle::Multilabel;
  double smoothing = 0.0;
  double dropout = 0.0;
  double drop_path = 0.0;

  bool repeated_aug = false;
  std::uint32_t ra_repeats = 3;

  GradClipKind grad_clip = GradClipKind::None;
  double agc_lambda = 0.05;
  double agc_eps = 1e-3;

  bool randaugment = true;
  double ra_magnitude = 7.0;
  std::uint32_t ra_num_ops = 2;
  double ra_mstd = 0.5;
  bool ra_mstd_uniform = false;

  double mixup_alpha = 0.0;
  double cutmix_alpha = 0.0;
  double mix_switch_prob = 0.5;
  double mix_apply_prob = 1.0;
  MixMode mix_mode = MixMode::Batchwise;

  double erase_prob = 0.0;
  std::uint32_t erase_count = 1;

  bool ema = false;
  double ema_decay = 0.0;

  double test_crop_ratio = 0.95;
  std::uint64_t seed = 0;

  bool operator==(const Recipe&) const = default;
};

/// Exact Table-column presets: a1, a2, a3, b, c1, c2, d, pytorch-baseline.
Recipe preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// Apply line-oriented `key = value` overrides ('#' comments). Unknown keys,
/// malformed lines and type mismatches raise ConfigError with line numbers.
void apply_config(Recipe& recipe, const std::string& text);

/// Canonical serialization: alphabetical keys, one per line, LF endings.
/// Re-parsing reproduces the record exactly.
std::string serialize(const Recipe& recipe);

/// All invariant violations (empty when valid).
std::vector<std::string> validate(const Recipe& recipe);
/// Throws ConfigError listing every violation.
void validate_or_throw(const Recipe& recipe);

/// lr adjusted for a batch-size override (linear; square-root for AdamP).
double effective_lr(const Recipe& recipe);

ScheduleConfig schedule_config(const Recipe& recipe);
MixConfig mix_config(const Recipe& recipe);
RandAugmentConfig randaugment_config(const Recipe& recipe,
                                     std::vector<double> fill);
RandomErasingConfig erasing_config(const Recipe& recipe);

const char* optimizer_kind_name(OptimizerKind kind);

}  // namespace rsb
