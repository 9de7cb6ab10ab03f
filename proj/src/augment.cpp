// SPDX-License-Identifier: Apache-2.0
#include "augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "error.hpp"

namespace rsb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMaxMagnitude = 10.0;
constexpr double kMaxRotateDeg = 30.0;
constexpr double kMaxShear = 0.3;
constexpr double kMaxTranslate = 0.45;
constexpr double kBlendSpan = 0.9;  // factor 1 +- 0.9 at M = 10

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double luma(const ImageBuffer& img, std::size_t r, std::size_t c) {
  if (img.channels == 3) {
    return 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) +
           0.114 * img.at(r, c, 2);
  }
  double acc = 0.0;
  for (std::size_t ch = 0; ch < img.channels; ++ch) acc += img.at(r, c, ch);
  return acc / static_cast<double>(img.channels);
}

// out = degenerate + factor * (original - degenerate); factor 1 and 0 are
// returned exactly so zero-magnitude stays bitwise identical.
ImageBuffer blend(const ImageBuffer& original, const ImageBuffer& degenerate,
                  double factor) {
  if (factor == 1.0) return original;
  if (factor == 0.0) return degenerate;
  ImageBuffer out = original;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] =
        clamp01(degenerate.pixels[i] + factor * (original.pixels[i] - degenerate.pixels[i]));
  }
  return out;
}

ImageBuffer degenerate_gray(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      const double g = luma(img, r, c);
      for (std::size_t ch = 0; ch < img.channels; ++ch) out.at(r, c, ch) = g;
    }
  }
  return out;
}

ImageBuffer degenerate_mean(const ImageBuffer& img) {
  double acc = 0.0;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) acc += luma(img, r, c);
  }
  const double m = acc / static_cast<double>(img.pixel_count());
  ImageBuffer out(img.height, img.width, img.channels, m);
  out.normalized = img.normalized;
  return out;
}

ImageBuffer degenerate_smooth(const ImageBuffer& img) {
  // 3x3 smoothing kernel [[1,1,1],[1,5,1],[1,1,1]] / 13 on the interior;
  // border pixels are kept as-is.
  ImageBuffer out = img;
  if (img.height < 3 || img.width < 3) return out;
  for (std::size_t r = 1; r + 1 < img.height; ++r) {
    for (std::size_t c = 1; c + 1 < img.width; ++c) {
      for (std::size_t ch = 0; ch < img.channels; ++ch) {
        double acc = 5.0 * img.at(r, c, ch);
        acc += img.at(r - 1, c - 1, ch) + img.at(r - 1, c, ch) +
               img.at(r - 1, c + 1, ch);
        acc += img.at(r, c - 1, ch) + img.at(r, c + 1, ch);
        acc += img.at(r + 1, c - 1, ch) + img.at(r + 1, c, ch) +
               img.at(r + 1, c + 1, ch);
        out.at(r, c, ch) = acc / 13.0;
      }
    }
  }
  return out;
}

ImageBuffer auto_contrast(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t ch = 0; ch < img.channels; ++ch) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        lo = std::min(lo, img.at(r, c, ch));
        hi = std::max(hi, img.at(r, c, ch));
      }
    }
    if (hi <= lo) continue;
    const double scale = 1.0 / (hi - lo);
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        out.at(r, c, ch) = clamp01((img.at(r, c, ch) - lo) * scale);
      }
    }
  }
  return out;
}

ImageBuffer equalize(const ImageBuffer& img) {
  // Integer histogram equalization on the 8-bit lattice, per channel.
  ImageBuffer out = img;
  const long n = static_cast<long>(img.pixel_count());
  for (std::size_t ch = 0; ch < img.channels; ++ch) {
    std::array<long, 256> histo{};
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        const int v = static_cast<int>(
            std::min(255.0, std::floor(img.at(r, c, ch) * 255.0 + 0.5)));
        ++histo[static_cast<std::size_t>(v)];
      }
    }
    long last_nonzero = 0;
    for (int v = 255; v >= 0; --v) {
      if (histo[static_cast<std::size_t>(v)] != 0) {
        last_nonzero = histo[static_cast<std::size_t>(v)];
        break;
      }
    }
    const long step = (n - last_nonzero) / 255;
    if (step == 0) continue;
    std::array<int, 256> lut{};
    long acc = step / 2;
    for (int v = 0; v < 256; ++v) {
      lut[static_cast<std::size_t>(v)] =
          static_cast<int>(std::clamp(acc / step, 0L, 255L));
      acc += histo[static_cast<std::size_t>(v)];
    }
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        const int v = static_cast<int>(
            std::min(255.0, std::floor(img.at(r, c, ch) * 255.0 + 0.5)));
        out.at(r, c, ch) = lut[static_cast<std::size_t>(v)] / 255.0;
      }
    }
  }
  return out;
}

ImageBuffer posterize(const ImageBuffer& img, int bits) {
  if (bits >= 8) return img;  // full depth: exact identity
  if (bits < 1) bits = 1;
  ImageBuffer out = img;
  const unsigned mask = (0xFFu << (8 - bits)) & 0xFFu;
  for (double& p : out.pixels) {
    const unsigned v =
        static_cast<unsigned>(std::min(255.0, std::floor(p * 255.0 + 0.5)));
    p = static_cast<double>(v & mask) / 255.0;
  }
  return out;
}

ImageBuffer solarize(const ImageBuffer& img, double threshold) {
  ImageBuffer out = img;
  for (double& p : out.pixels) {
    if (p > threshold) p = 1.0 - p;
  }
  return out;
}

}  // namespace

const std::vector<AugOpKind>& default_aug_inventory() {
  static const std::vector<AugOpKind> inv = {
      AugOpKind::AutoContrast, AugOpKind::Equalize,   AugOpKind::Rotate,
      AugOpKind::Posterize,    AugOpKind::Solarize,   AugOpKind::Color,
      AugOpKind::Contrast,     AugOpKind::Brightness, AugOpKind::Sharpness,
      AugOpKind::ShearX,       AugOpKind::ShearY,     AugOpKind::TranslateX,
      AugOpKind::TranslateY};
  return inv;
}

const char* aug_op_name(AugOpKind kind) {
  switch (kind) {
    case AugOpKind::AutoContrast: return "auto-contrast";
    case AugOpKind::Equalize: return "equalize";
    case AugOpKind::Rotate: return "rotate";
    case AugOpKind::Posterize: return "posterize";
    case AugOpKind::Solarize: return "solarize";
    case AugOpKind::Color: return "color";
    case AugOpKind::Contrast: return "contrast";
    case AugOpKind::Brightness: return "brightness";
    case AugOpKind::Sharpness: return "sharpness";
    case AugOpKind::ShearX: return "shear-x";
    case AugOpKind::ShearY: return "shear-y";
    case AugOpKind::TranslateX: return "translate-x";
    case AugOpKind::TranslateY: return "translate-y";
  }
  return "?";
}

CropBox sample_rrc_box(std::size_t img_h, std::size_t img_w,
                       const RrcConfig& cfg, RngStream& rng) {
  const double area = static_cast<double>(img_h) * static_cast<double>(img_w);
  const double log_lo = std::log(cfg.ratio_lo);
  const double log_hi = std::log(cfg.ratio_hi);

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const double target_area = rng.uniform(cfg.scale_lo, cfg.scale_hi) * area;
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const auto w = static_cast<std::size_t>(
        std::llround(std::sqrt(target_area * aspect)));
    const auto h = static_cast<std::size_t>(
        std::llround(std::sqrt(target_area / aspect)));
    if (w > 0 && h > 0 && w <= img_w && h <= img_h) {
      const std::size_t top = rng.uniform_int(img_h - h + 1);
      const std::size_t left = rng.uniform_int(img_w - w + 1);
      return {top, left, h, w};
    }
  }

  // Fallback: the largest box whose aspect is clamped into range, centered.
  const double in_ratio = static_cast<double>(img_w) / static_cast<double>(img_h);
  std::size_t w, h;
  if (in_ratio < cfg.ratio_lo) {
    w = img_w;
    h = static_cast<std::size_t>(
        std::llround(static_cast<double>(w) / cfg.ratio_lo));
  } else if (in_ratio > cfg.ratio_hi) {
    h = img_h;
    w = static_cast<std::size_t>(
        std::llround(static_cast<double>(h) * cfg.ratio_hi));
  } else {
    w = img_w;
    h = img_h;
  }
  h = std::min(std::max<std::size_t>(h, 1), img_h);
  w = std::min(std::max<std::size_t>(w, 1), img_w);
  return {(img_h - h) / 2, (img_w - w) / 2, h, w};
}

ImageBuffer random_resized_crop(const ImageBuffer& img, const RrcConfig& cfg,
                                RngStream& rng) {
  if (img.normalized) {
    throw ContractError("random_resized_crop: image already normalized");
  }
  if (cfg.target_h == 0 || cfg.target_w == 0) {
    throw ConfigError("random_resized_crop: zero target size");
  }
  const CropBox box = sample_rrc_box(img.height, img.width, cfg, rng);
  return resize_bilinear(img, box.top, box.left, box.height, box.width,
                         cfg.target_h, cfg.target_w);
}

ImageBuffer horizontal_flip(const ImageBuffer& img, RngStream& rng, double p) {
  const bool do_flip = rng.uniform() < p;
  if (!do_flip) return img;
  ImageBuffer out = img;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      for (std::size_t ch = 0; ch < img.channels; ++ch) {
        out.at(r, c, ch) = img.at(r, img.width - 1 - c, ch);
      }
    }
  }
  return out;
}

double sample_magnitude(const RandAugmentConfig& cfg, RngStream& rng) {
  if (cfg.uniform_mstd) return rng.uniform(0.0, cfg.magnitude);
  if (cfg.mstd > 0.0) {
    return std::clamp(rng.normal(cfg.magnitude, cfg.mstd), 0.0, kMaxMagnitude);
  }
  return cfg.magnitude;
}

AugOpParams map_magnitude(AugOpKind kind, double magnitude, bool increasing,
                          RngStream& rng) {
  if (magnitude < 0.0 || magnitude > kMaxMagnitude) {
    throw ContractError("map_magnitude: magnitude outside [0,10]");
  }
  const double frac = magnitude / kMaxMagnitude;
  AugOpParams p;
  p.kind = kind;
  switch (kind) {
    case AugOpKind::AutoContrast:
    case AugOpKind::Equalize:
      break;  // parameterless
    case AugOpKind::Color:
    case AugOpKind::Contrast:
    case AugOpKind::Brightness:
    case AugOpKind::Sharpness: {
      if (increasing) {
        // Interpolate vs extrapolate chosen at random, strength grows with M.
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        p.blend_factor =
            std::clamp(1.0 + sign * kBlendSpan * frac, 1.0 - kBlendSpan,
                       1.0 + kBlendSpan);
      } else {
        // Legacy scale: 0.1 at M0, 1.0 at M5, 1.9 at M10.
        p.blend_factor = (1.0 - kBlendSpan) + 2.0 * kBlendSpan * frac;
      }
      break;
    }
    case AugOpKind::Solarize:
      // Increasing: threshold falls from 1 (nothing inverted, strict
      // comparison) to 0; legacy runs backwards.
      p.solarize_threshold = increasing ? 1.0 - frac : frac;
      break;
    case AugOpKind::Posterize: {
      // Increasing: 8 bits at M0 down to 4 bits at M10, half-away rounding.
      const double drop = 4.0 * frac;
      const int bits = increasing
                           ? 8 - static_cast<int>(std::floor(drop + 0.5))
                           : 4 + static_cast<int>(std::floor(drop + 0.5));
      p.posterize_bits = std::clamp(bits, 1, 8);
      break;
    }
    case AugOpKind::Rotate: {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      p.degrees = sign * kMaxRotateDeg * frac;
      break;
    }
    case AugOpKind::ShearX:
    case AugOpKind::ShearY: {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      p.shear = sign * kMaxShear * frac;
      break;
    }
    case AugOpKind::TranslateX:
    case AugOpKind::TranslateY: {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      p.translate_frac = sign * kMaxTranslate * frac;
      break;
    }
  }
  return p;
}

double distortion_strength(const AugOpParams& p) {
  switch (p.kind) {
    case AugOpKind::AutoContrast:
    case AugOpKind::Equalize:
      return 0.0;
    case AugOpKind::Color:
    case AugOpKind::Contrast:
    case AugOpKind::Brightness:
    case AugOpKind::Sharpness:
      return std::abs(p.blend_factor - 1.0);
    case AugOpKind::Solarize:
      return 1.0 - p.solarize_threshold;
    case AugOpKind::Posterize:
      return 8.0 - p.posterize_bits;
    case AugOpKind::Rotate:
      return std::abs(p.degrees);
    case AugOpKind::ShearX:
    case AugOpKind::ShearY:
      return std::abs(p.shear);
    case AugOpKind::TranslateX:
    case AugOpKind::TranslateY:
      return std::abs(p.translate_frac);
  }
  return 0.0;
}

ImageBuffer apply_op(const ImageBuffer& img, const AugOpParams& p,
                     std::span<const double> fill) {
  if (img.normalized) throw ContractError("apply_op: image already normalized");
  switch (p.kind) {
    case AugOpKind::AutoContrast:
      return auto_contrast(img);
    case AugOpKind::Equalize:
      return equalize(img);
    case AugOpKind::Posterize:
      return posterize(img, p.posterize_bits);
    case AugOpKind::Solarize:
      return solarize(img, p.solarize_threshold);
    case AugOpKind::Color:
      return blend(img, degenerate_gray(img), p.blend_factor);
    case AugOpKind::Contrast:
      return blend(img, degenerate_mean(img), p.blend_factor);
    case AugOpKind::Brightness: {
      ImageBuffer black(img.height, img.width, img.channels, 0.0);
      return blend(img, black, p.blend_factor);
    }
    case AugOpKind::Sharpness:
      return blend(img, degenerate_smooth(img), p.blend_factor);
    case AugOpKind::Rotate: {
      const double rad = p.degrees * kPi / 180.0;
      const double cs = std::cos(rad), sn = std::sin(rad);
      return affine_sample(img, cs, sn, -sn, cs, 0.0, 0.0, fill);
    }
    case AugOpKind::ShearX:
      return affine_sample(img, 1.0, p.shear, 0.0, 1.0, 0.0, 0.0, fill);
    case AugOpKind::ShearY:
      return affine_sample(img, 1.0, 0.0, p.shear, 1.0, 0.0, 0.0, fill);
    case AugOpKind::TranslateX:
      return affine_sample(img, 1.0, 0.0, 0.0, 1.0,
                           p.translate_frac * static_cast<double>(img.width),
                           0.0, fill);
    case AugOpKind::TranslateY:
      return affine_sample(img, 1.0, 0.0, 0.0, 1.0, 0.0,
                           p.translate_frac * static_cast<double>(img.height),
                           fill);
  }
  throw ConfigError("apply_op: unknown op kind");
}

ImageBuffer rand_augment(const ImageBuffer& img, const RandAugmentConfig& cfg,
                         RngStream& rng) {
  if (cfg.inventory.empty()) throw ConfigError("rand_augment: empty inventory");
  if (cfg.num_ops < 1) throw ConfigError("rand_augment: num_ops must be >= 1");
  if (cfg.magnitude < 0.0 || cfg.magnitude > kMaxMagnitude) {
    throw ConfigError("rand_augment: magnitude outside [0,10]");
  }
  if (!cfg.fill.empty() && cfg.fill.size() != img.channels) {
    throw ConfigError("rand_augment: fill channel count mismatch");
  }
  ImageBuffer out = img;
  for (int n = 0; n < cfg.num_ops; ++n) {
    const AugOpKind kind = cfg.inventory[rng.uniform_int(cfg.inventory.size())];
    const double m = sample_magnitude(cfg, rng);
    const AugOpParams params = map_magnitude(kind, m, cfg.increasing, rng);
    out = apply_op(out, params, cfg.fill);
  }
  return out;
}

ImageBuffer normalize(const ImageBuffer& img, const NormStats& stats) {
  if (img.normalized) throw ContractError("normalize: already normalized");
  if (stats.mean.size() != img.channels || stats.stddev.size() != img.channels) {
    throw ConfigError("normalize: stats channel count mismatch");
  }
  for (double s : stats.stddev) {
    if (s == 0.0) throw ConfigError("normalize: zero stddev");
  }
  ImageBuffer out = img;
  out.normalized = true;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      for (std::size_t ch = 0; ch < img.channels; ++ch) {
        out.at(r, c, ch) = (img.at(r, c, ch) - stats.mean[ch]) / stats.stddev[ch];
      }
    }
  }
  return out;
}

ImageBuffer denormalize(const ImageBuffer& img, const NormStats& stats) {
  if (!img.normalized) throw ContractError("denormalize: image not normalized");
  ImageBuffer out = img;
  out.normalized = false;
  for (std::size_t r = 0; r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      for (std::size_t ch = 0; ch < img.channels; ++ch) {
        out.at(r, c, ch) = img.at(r, c, ch) * stats.stddev[ch] + stats.mean[ch];
      }
    }
  }
  return out;
}

EraseBox sample_erase_box(std::size_t img_h, std::size_t img_w,
                          const RandomErasingConfig& cfg, RngStream& rng) {
  const double area = static_cast<double>(img_h) * static_cast<double>(img_w);
  const double log_lo = std::log(cfg.aspect_lo);
  const double log_hi = std::log(cfg.aspect_hi);
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const double target_area = rng.uniform(cfg.area_lo, cfg.area_hi) * area;
    const double aspect = std::exp(rng.uniform(log_lo, log_hi));
    const auto h = static_cast<std::size_t>(
        std::llround(std::sqrt(target_area * aspect)));
    const auto w = static_cast<std::size_t>(
        std::llround(std::sqrt(target_area / aspect)));
    if (h > 0 && w > 0 && h < img_h && w < img_w) {
      const std::size_t top = rng.uniform_int(img_h - h);
      const std::size_t left = rng.uniform_int(img_w - w);
      return {true, top, left, h, w};
    }
  }
  return {};
}

ImageBuffer random_erasing(const ImageBuffer& img,
                           const RandomErasingConfig& cfg, RngStream& rng) {
  if (!img.normalized) {
    throw ContractError("random_erasing: image must be normalized first");
  }
  if (cfg.probability < 0.0 || cfg.probability > 1.0) {
    throw ConfigError("random_erasing: probability outside [0,1]");
  }
  if (!(cfg.area_lo > 0.0 && cfg.area_lo <= cfg.area_hi && cfg.area_hi < 1.0)) {
    throw ConfigError("random_erasing: bad area range");
  }
  if (cfg.probability == 0.0) return img;
  if (!(rng.uniform() < cfg.probability)) return img;

  ImageBuffer out = img;
  for (int k = 0; k < cfg.count; ++k) {
    const EraseBox box = sample_erase_box(img.height, img.width, cfg, rng);
    if (!box.ok) continue;
    for (std::size_t r = box.top; r < box.top + box.height; ++r) {
      for (std::size_t c = box.left; c < box.left + box.width; ++c) {
        for (std::size_t ch = 0; ch < img.channels; ++ch) {
          out.at(r, c, ch) =
              cfg.mode == EraseMode::PerPixelNoise ? rng.normal() : 0.0;
        }
      }
    }
  }
  return out;
}

}  // namespace rsb
