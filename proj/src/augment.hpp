// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "image.hpp"
#include "rng.hpp"

namespace rsb {

// ---------------------------------------------------------------------------
// Random Resized Crop

struct RrcConfig {
  std::size_t target_h = 224;
  std::size_t target_w = 224;
  double scale_lo = 0.08;
  double scale_hi = 1.0;
  double ratio_lo = 3.0 / 4.0;
  double ratio_hi = 4.0 / 3.0;
  int max_attempts = 10;
};

struct CropBox {
  std::size_t top = 0, left = 0, height = 0, width = 0;
};

/// Rejection-samples a crop whose area fraction lies in [scale_lo, scale_hi]
/// and aspect in [ratio_lo, ratio_hi]; after max_attempts failures falls back
/// to a centered crop of the largest box with clamped aspect.
CropBox sample_rrc_box(std::size_t img_h, std::size_t img_w,
                       const RrcConfig& cfg, RngStream& rng);

ImageBuffer random_resized_crop(const ImageBuffer& img, const RrcConfig& cfg,
                                RngStream& rng);

/// Mirror on the width axis with probability p (one uniform draw always).
ImageBuffer horizontal_flip(const ImageBuffer& img, RngStream& rng,
                            double p = 0.5);

// ---------------------------------------------------------------------------
// RandAugment (timm-style "increasing" mode with MSTD)

enum class AugOpKind {
  AutoContrast,
  Equalize,
  Rotate,
  Posterize,
  Solarize,
  Color,
  Contrast,
  Brightness,
  Sharpness,
  ShearX,
  ShearY,
  TranslateX,
  TranslateY,
};

inline constexpr std::size_t kAugOpCount = 13;
const std::vector<AugOpKind>& default_aug_inventory();
const char* aug_op_name(AugOpKind kind);

struct RandAugmentConfig {
  double magnitude = 7.0;  // M in [0, 10]
  int num_ops = 2;         // N distortions per image
  double mstd = 0.5;       // gaussian noise on M per application
  bool uniform_mstd = false;  // sentinel: M ~ U[0, magnitude] per application
  bool increasing = true;
  std::vector<double> fill;  // per-channel border fill, unit scale
  std::vector<AugOpKind> inventory = default_aug_inventory();
};

/// Concrete parameters for one distortion application.
struct AugOpParams {
  AugOpKind kind = AugOpKind::AutoContrast;
  double blend_factor = 1.0;      // color/contrast/brightness/sharpness
  double solarize_threshold = 1.0;  // invert pixels strictly above
  int posterize_bits = 8;         // >= 8 keeps the image untouched
  double degrees = 0.0;           // rotate
  double shear = 0.0;             // shear-x / shear-y
  double translate_frac = 0.0;    // translate as fraction of the axis extent
};

/// Effective magnitude for one application: exact M at mstd 0, gaussian
/// jitter otherwise, uniform on [0, M] under the sentinel; clamped to [0,10].
double sample_magnitude(const RandAugmentConfig& cfg, RngStream& rng);

/// Magnitude -> concrete op parameters. In increasing mode every distortion
/// strength grows with M and M = 0 parameterizes the identity. Consumes one
/// uniform draw for ops with a random direction (blends, geometric).
AugOpParams map_magnitude(AugOpKind kind, double magnitude, bool increasing,
                          RngStream& rng);

/// |param - identity param| on a per-kind scale; the monotonicity handle.
double distortion_strength(const AugOpParams& params);

/// Apply one distortion. Geometric ops use bilinear sampling and read
/// introduced border pixels from `fill`.
ImageBuffer apply_op(const ImageBuffer& img, const AugOpParams& params,
                     std::span<const double> fill);

/// N uniformly drawn distortions (with replacement), each with a freshly
/// sampled magnitude, applied in draw order.
ImageBuffer rand_augment(const ImageBuffer& img, const RandAugmentConfig& cfg,
                         RngStream& rng);

// ---------------------------------------------------------------------------
// Normalization

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// (pixel - mean) / std per channel; sets the normalized flag.
ImageBuffer normalize(const ImageBuffer& img, const NormStats& stats);
/// Exact algebraic inverse of normalize().
ImageBuffer denormalize(const ImageBuffer& img, const NormStats& stats);

// ---------------------------------------------------------------------------
// Random Erasing (runs after normalization)

enum class EraseMode { PerPixelNoise, Constant };

struct RandomErasingConfig {
  double probability = 0.0;
  int count = 1;
  double area_lo = 0.02;
  double area_hi = 1.0 / 3.0;
  double aspect_lo = 0.3;
  double aspect_hi = 10.0 / 3.0;
  EraseMode mode = EraseMode::PerPixelNoise;
  int max_attempts = 10;
};

struct EraseBox {
  bool ok = false;
  std::size_t top = 0, left = 0, height = 0, width = 0;
};

EraseBox sample_erase_box(std::size_t img_h, std::size_t img_w,
                          const RandomErasingConfig& cfg, RngStream& rng);

/// With cfg.probability, erases cfg.count rectangles filled with independent
/// N(0,1) per pixel per channel (or a constant). Requires a normalized image.
ImageBuffer random_erasing(const ImageBuffer& img,
                           const RandomErasingConfig& cfg, RngStream& rng);

}  // namespace rsb
