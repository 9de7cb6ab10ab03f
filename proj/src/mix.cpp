// SPDX-License-Identifier: Apache-2.0
#include "mix.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace rsb {

namespace {

void validate(const MixConfig& cfg) {
  for (double p : {cfg.switch_prob, cfg.apply_prob}) {
    if (p < 0.0 || p > 1.0) throw ConfigError("mix: probability outside [0,1]");
  }
  if (cfg.mixup_alpha < 0.0 || cfg.cutmix_alpha < 0.0) {
    throw ConfigError("mix: alpha must be >= 0");
  }
}

// Permutation with no fixed points: rejection-sampled shuffle with a
// cyclic-shift fallback so termination does not depend on luck.
std::vector<std::size_t> derangement(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> perm(n);
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i-- > 1;) {
      std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    }
    bool fixed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] == i) {
        fixed = true;
        break;
      }
    }
    if (!fixed) return perm;
  }
  for (std::size_t i = 0; i < n; ++i) perm[i] = (i + 1) % n;
  return perm;
}

// Picks the method for one mix event and draws its lambda (and box).
MixSample draw_event(const MixConfig& cfg, std::size_t height,
                     std::size_t width, RngStream& rng) {
  MixSample s;
  const bool mixup_on = cfg.mixup_alpha > 0.0;
  const bool cutmix_on = cfg.cutmix_alpha > 0.0;
  if (!mixup_on && !cutmix_on) return s;

  bool use_cutmix = cutmix_on;
  if (mixup_on && cutmix_on) use_cutmix = rng.uniform() < cfg.switch_prob;

  if (use_cutmix) {
    s.method = MixMethod::Cutmix;
    s.lambda_raw = sample_lambda(cfg.cutmix_alpha, rng);
    auto [box, lam_adj] = cutmix_box(s.lambda_raw, height, width, rng);
    s.box = box;
    s.lambda_target = lam_adj;
  } else {
    s.method = MixMethod::Mixup;
    s.lambda_raw = sample_lambda(cfg.mixup_alpha, rng);
    s.lambda_target = s.lambda_raw;
  }
  return s;
}

// Writes mix(primary, partner) into out for one image.
void mix_pixels(const MixSample& s, std::span<const double> pixels,
                std::size_t height, std::size_t width, std::size_t channels,
                double* out) {
  const std::size_t stride = height * width * channels;
  const double* prim = pixels.data() + s.primary * stride;
  const double* part = pixels.data() + s.partner * stride;
  switch (s.method) {
    case MixMethod::None:
      std::copy(prim, prim + stride, out);
      break;
    case MixMethod::Mixup: {
      const double lam = s.lambda_raw;
      for (std::size_t i = 0; i < stride; ++i) {
        out[i] = lam * prim[i] + (1.0 - lam) * part[i];
      }
      break;
    }
    case MixMethod::Cutmix: {
      std::copy(prim, prim + stride, out);
      for (std::size_t r = s.box.row0; r < s.box.row1; ++r) {
        for (std::size_t c = s.box.col0; c < s.box.col1; ++c) {
          const std::size_t off = (r * width + c) * channels;
          for (std::size_t ch = 0; ch < channels; ++ch) {
            out[off + ch] = part[off + ch];
          }
        }
      }
      break;
    }
  }
}

}  // namespace

double sample_lambda(double alpha, RngStream& rng) {
  if (alpha <= 0.0) throw ConfigError("sample_lambda: alpha must be positive");
  return rng.beta(alpha, alpha);
}

std::pair<CutmixBoxRect, double> cutmix_box(double lambda, std::size_t height,
                                            std::size_t width, RngStream& rng) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ContractError("cutmix_box: lambda outside [0,1]");
  }
  const double cut_ratio = std::sqrt(1.0 - lambda);
  const auto cut_h =
      static_cast<std::size_t>(static_cast<double>(height) * cut_ratio);
  const auto cut_w =
      static_cast<std::size_t>(static_cast<double>(width) * cut_ratio);
  const std::size_t cy = rng.uniform_int(height);
  const std::size_t cx = rng.uniform_int(width);

  CutmixBoxRect box;
  box.row0 = cy >= cut_h / 2 ? cy - cut_h / 2 : 0;
  box.row1 = std::min(height, cy + (cut_h - cut_h / 2));
  box.col0 = cx >= cut_w / 2 ? cx - cut_w / 2 : 0;
  box.col1 = std::min(width, cx + (cut_w - cut_w / 2));
  if (box.row1 < box.row0) box.row1 = box.row0;
  if (box.col1 < box.col0) box.col1 = box.col0;

  const double frac = static_cast<double>(box.area()) /
                      (static_cast<double>(height) * static_cast<double>(width));
  return {box, 1.0 - frac};
}

MixResult mix_batch(std::span<const double> pixels, std::size_t batch,
                    std::size_t height, std::size_t width,
                    std::size_t channels, const MixConfig& cfg,
                    RngStream& rng) {
  validate(cfg);
  const std::size_t stride = height * width * channels;
  if (pixels.size() != batch * stride) {
    throw ContractError("mix_batch: pixel buffer size mismatch");
  }
  if (cfg.mode == MixMode::Half && batch % 2 != 0) {
    throw ConfigError("mix_batch: half mode requires an even batch");
  }

  MixResult res;
  res.outcome.samples.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    res.outcome.samples[i].primary = i;
    res.outcome.samples[i].partner = i;
  }

  const bool enabled = cfg.mixup_alpha > 0.0 || cfg.cutmix_alpha > 0.0;
  const bool apply = enabled && rng.uniform() < cfg.apply_prob;

  if (apply) {
    switch (cfg.mode) {
      case MixMode::Batchwise: {
        const MixSample event = draw_event(cfg, height, width, rng);
        for (std::size_t i = 0; i < batch; ++i) {
          MixSample s = event;
          s.primary = i;
          s.partner = batch - 1 - i;
          if (s.partner == i) s = MixSample{.primary = i, .partner = i};
          res.outcome.samples[i] = s;
        }
        break;
      }
      case MixMode::Pairwise: {
        std::vector<std::size_t> order(batch);
        for (std::size_t i = 0; i < batch; ++i) order[i] = i;
        for (std::size_t i = batch; i-- > 1;) {
          std::swap(order[i], order[rng.uniform_int(i + 1)]);
        }
        for (std::size_t p = 0; p + 1 < batch; p += 2) {
          const MixSample event = draw_event(cfg, height, width, rng);
          const std::size_t a = order[p], b = order[p + 1];
          MixSample sa = event, sb = event;
          sa.primary = a;
          sa.partner = b;
          sb.primary = b;
          sb.partner = a;
          res.outcome.samples[a] = sa;
          res.outcome.samples[b] = sb;
        }
        break;
      }
      case MixMode::Elementwise: {
        const std::vector<std::size_t> partner = derangement(batch, rng);
        for (std::size_t i = 0; i < batch; ++i) {
          MixSample s = draw_event(cfg, height, width, rng);
          s.primary = i;
          s.partner = partner[i];
          res.outcome.samples[i] = s;
        }
        break;
      }
      case MixMode::Half: {
        std::vector<MixSample> kept(batch / 2);
        for (std::size_t i = 0; i < batch / 2; ++i) {
          MixSample s = draw_event(cfg, height, width, rng);
          s.primary = i;
          s.partner = batch - 1 - i;
          kept[i] = s;
        }
        res.outcome.samples = std::move(kept);
        break;
      }
    }
  } else if (cfg.mode == MixMode::Half) {
    // Unmixed half batch still halves: keep the first member of each pair.
    res.outcome.samples.resize(batch / 2);
  }

  res.batch = res.outcome.samples.size();
  res.pixels.resize(res.batch * stride);
  for (std::size_t i = 0; i < res.batch; ++i) {
    mix_pixels(res.outcome.samples[i], pixels, height, width, channels,
               res.pixels.data() + i * stride);
  }
  return res;
}

TargetMatrix build_targets(std::span<const std::uint16_t> labels,
                           const MixOutcome& outcome, std::size_t num_classes,
                           LossKind loss, double smoothing, BceStyle style) {
  const std::size_t B = outcome.samples.size();
  const std::size_t K = num_classes;
  if (smoothing < 0.0 || smoothing >= 0.5) {
    throw ConfigError("build_targets: smoothing outside [0, 0.5)");
  }

  TargetMatrix tm;
  tm.rows = B;
  tm.cols = K;
  const bool multilabel = loss == LossKind::Bce && style == BceStyle::Multilabel;
  tm.semantics =
      multilabel ? TargetSemantics::Multilabel : TargetSemantics::Distribution;
  tm.values.assign(B * K, 0.0);

  const double eps = smoothing;
  for (std::size_t i = 0; i < B; ++i) {
    const MixSample& s = outcome.samples[i];
    const std::size_t y = labels[s.primary];
    const std::size_t yp = labels[s.partner];
    if (y >= K || yp >= K) throw ContractError("build_targets: label >= K");
    double* row = tm.values.data() + i * K;

    if (multilabel) {
      // Every selected class is a positive, independent of lambda.
      for (std::size_t k = 0; k < K; ++k) row[k] = eps / static_cast<double>(K);
      row[y] = 1.0 - eps;
      if (s.method != MixMethod::None) row[yp] = 1.0 - eps;
    } else {
      const double lam = s.method == MixMethod::None ? 1.0 : s.lambda_target;
      row[y] += lam;
      row[yp] += 1.0 - lam;
      if (eps > 0.0) {
        for (std::size_t k = 0; k < K; ++k) {
          row[k] = (1.0 - eps) * row[k] + eps / static_cast<double>(K);
        }
      }
    }
  }
  return tm;
}

Tensor ce_loss(Tape& tape, Tensor logits, const TargetMatrix& targets) {
  if (targets.semantics != TargetSemantics::Distribution) {
    throw ContractError("ce_loss: requires distribution targets");
  }
  return tape.ce_loss(logits, targets.values);
}

Tensor bce_loss(Tape& tape, Tensor logits, const TargetMatrix& targets) {
  return tape.bce_loss(logits, targets.values);
}

}  // namespace rsb
