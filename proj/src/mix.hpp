// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace rsb {

enum class MixMode { Batchwise, Pairwise, Elementwise, Half };
enum class MixMethod { None, Mixup, Cutmix };
enum class LossKind { Ce, Bce };
enum class BceStyle { Multilabel, Normalized };

struct MixConfig {
  double mixup_alpha = 0.0;   // 0 disables Mixup
  double cutmix_alpha = 0.0;  // 0 disables CutMix
  double switch_prob = 0.5;   // P(CutMix) when both are enabled
  double apply_prob = 1.0;    // P(batch is mixed at all)
  MixMode mode = MixMode::Batchwise;
};

/// Half-open pixel rectangle [row0,row1) x [col0,col1).
struct CutmixBoxRect {
  std::size_t row0 = 0, col0 = 0, row1 = 0, col1 = 0;
  std::size_t area() const { return (row1 - row0) * (col1 - col0); }
};

struct MixSample {
  MixMethod method = MixMethod::None;
  std::size_t primary = 0;  // source index in the incoming batch
  std::size_t partner = 0;
  double lambda_raw = 1.0;     // as drawn from Beta
  double lambda_target = 1.0;  // used for targets (pixel-exact for CutMix)
  CutmixBoxRect box;
};

struct MixOutcome {
  std::vector<MixSample> samples;  // one per output image
};

/// Mixed pixels plus the per-sample record. In half mode the output batch
/// is half the input batch (one mixed image per source pair); all other
/// modes keep the batch size.
struct MixResult {
  std::vector<double> pixels;  // batch * H * W * C
  std::size_t batch = 0;
  MixOutcome outcome;
};

/// lambda ~ Beta(alpha, alpha) via two gamma draws.
double sample_lambda(double alpha, RngStream& rng);

/// Rectangle of target area (1 - lambda) * H * W with sides scaled by
/// sqrt(1 - lambda), centered at a uniform pixel, clipped to the image.
/// Returns the box and lambda_adj = 1 - clipped_area / (H * W).
std::pair<CutmixBoxRect, double> cutmix_box(double lambda, std::size_t height,
                                            std::size_t width, RngStream& rng);

/// Integrated Mixup/CutMix over a batch of H x W x C images (row-major,
/// channel-last, one image after another).
///
/// batchwise: one method/lambda/box for the whole batch, partner is the
/// reversed batch. pairwise: a shuffled pairing, one decision per pair,
/// both members mixed with each other. elementwise: one decision per
/// sample, partners form a derangement. half: elementwise on pairs
/// (i, B-1-i) keeping one output per pair, so every source contributes to
/// exactly one output.
MixResult mix_batch(std::span<const double> pixels, std::size_t batch,
                    std::size_t height, std::size_t width,
                    std::size_t channels, const MixConfig& cfg, RngStream& rng);

enum class TargetSemantics { Distribution, Multilabel };

struct TargetMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  TargetSemantics semantics = TargetSemantics::Distribution;
  std::vector<double> values;  // rows * cols

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Target rows for the mixed batch.
///
/// CE: row = lambda * onehot(y) + (1-lambda) * onehot(y_partner), then
/// smoothing mixes with the uniform distribution. BCE multilabel: every
/// class selected by the mix gets 1 - eps, all others eps / K. BCE
/// normalized: the CE-style distribution rows, consumed by the BCE loss.
TargetMatrix build_targets(std::span<const std::uint16_t> labels,
                           const MixOutcome& outcome, std::size_t num_classes,
                           LossKind loss, double smoothing, BceStyle style);

/// Mean soft-target cross-entropy; rejects multilabel targets.
Tensor ce_loss(Tape& tape, Tensor logits, const TargetMatrix& targets);
/// Mean binary cross-entropy over all entries (stable logit form).
Tensor bce_loss(Tape& tape, Tensor logits, const TargetMatrix& targets);

}  // namespace rsb
