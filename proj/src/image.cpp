// SPDX-License-Identifier: Apache-2.0
#include "image.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace rsb {

ImageBuffer resize_bilinear(const ImageBuffer& src, std::size_t top,
                            std::size_t left, std::size_t crop_h,
                            std::size_t crop_w, std::size_t out_h,
                            std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw ConfigError("resize: zero output size");
  if (top + crop_h > src.height || left + crop_w > src.width || crop_h == 0 ||
      crop_w == 0) {
    throw ContractError("resize: crop outside image");
  }
  const std::size_t C = src.channels;
  ImageBuffer out(out_h, out_w, C);
  out.normalized = src.normalized;

  const double scale_r = static_cast<double>(crop_h) / static_cast<double>(out_h);
  const double scale_c = static_cast<double>(crop_w) / static_cast<double>(out_w);
  for (std::size_t r = 0; r < out_h; ++r) {
    // Half-pixel centers; when scale == 1 this lands exactly on the source
    // grid and the lerp below degenerates to a plain copy.
    double sr = (static_cast<double>(r) + 0.5) * scale_r - 0.5;
    sr = std::clamp(sr, 0.0, static_cast<double>(crop_h - 1));
    const std::size_t r0 = static_cast<std::size_t>(sr);
    const std::size_t r1 = std::min(r0 + 1, crop_h - 1);
    const double fr = sr - static_cast<double>(r0);
    for (std::size_t c = 0; c < out_w; ++c) {
      double sc = (static_cast<double>(c) + 0.5) * scale_c - 0.5;
      sc = std::clamp(sc, 0.0, static_cast<double>(crop_w - 1));
      const std::size_t c0 = static_cast<std::size_t>(sc);
      const std::size_t c1 = std::min(c0 + 1, crop_w - 1);
      const double fc = sc - static_cast<double>(c0);
      for (std::size_t ch = 0; ch < C; ++ch) {
        const double p00 = src.at(top + r0, left + c0, ch);
        const double p01 = src.at(top + r0, left + c1, ch);
        const double p10 = src.at(top + r1, left + c0, ch);
        const double p11 = src.at(top + r1, left + c1, ch);
        const double top_row = p00 + fc * (p01 - p00);
        const double bot_row = p10 + fc * (p11 - p10);
        out.at(r, c, ch) = top_row + fr * (bot_row - top_row);
      }
    }
  }
  return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& src, std::size_t out_h,
                            std::size_t out_w) {
  return resize_bilinear(src, 0, 0, src.height, src.width, out_h, out_w);
}

ImageBuffer affine_sample(const ImageBuffer& src, double a00, double a01,
                          double a10, double a11, double off_x, double off_y,
                          std::span<const double> fill) {
  const std::size_t H = src.height, W = src.width, C = src.channels;
  ImageBuffer out(H, W, C);
  out.normalized = src.normalized;
  const double cx = (static_cast<double>(W) - 1.0) / 2.0;
  const double cy = (static_cast<double>(H) - 1.0) / 2.0;

  auto tap = [&](long r, long c, std::size_t ch) {
    if (r < 0 || c < 0 || r >= static_cast<long>(H) || c >= static_cast<long>(W)) {
      return fill.empty() ? 0.0 : fill[ch % fill.size()];
    }
    return src.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch);
  };

  for (std::size_t r = 0; r < H; ++r) {
    const double dy = static_cast<double>(r) - cy;
    for (std::size_t c = 0; c < W; ++c) {
      const double dx = static_cast<double>(c) - cx;
      const double sx = a00 * dx + a01 * dy + cx + off_x;
      const double sy = a10 * dx + a11 * dy + cy + off_y;
      const double fx = std::floor(sx);
      const double fy = std::floor(sy);
      const long c0 = static_cast<long>(fx);
      const long r0 = static_cast<long>(fy);
      const double wx = sx - fx;
      const double wy = sy - fy;
      for (std::size_t ch = 0; ch < C; ++ch) {
        const double p00 = tap(r0, c0, ch);
        const double p01 = tap(r0, c0 + 1, ch);
        const double p10 = tap(r0 + 1, c0, ch);
        const double p11 = tap(r0 + 1, c0 + 1, ch);
        const double top_row = p00 + wx * (p01 - p00);
        const double bot_row = p10 + wx * (p11 - p10);
        out.at(r, c, ch) = top_row + wy * (bot_row - top_row);
      }
    }
  }
  return out;
}

}  // namespace rsb
