// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsb {

/// Dense H x W x C pixel buffer, row-major, channel-last, 64-bit floats.
/// Pixels live in [0,1] until normalize() lifts the range constraint and
/// sets the flag.
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  bool normalized = false;
  std::vector<double> pixels;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
      : height(h), width(w), channels(c), pixels(h * w * c, fill) {}

  double& at(std::size_t r, std::size_t c, std::size_t ch) {
    return pixels[(r * width + c) * channels + ch];
  }
  double at(std::size_t r, std::size_t c, std::size_t ch) const {
    return pixels[(r * width + c) * channels + ch];
  }
  std::size_t pixel_count() const { return height * width; }
};

/// Bilinear resize of a sub-rectangle [top, top+crop_h) x [left, left+crop_w)
/// to out_h x out_w, half-pixel-center convention, edge taps clamped.
/// When the crop equals the output size the copy is bitwise exact.
ImageBuffer resize_bilinear(const ImageBuffer& src, std::size_t top,
                            std::size_t left, std::size_t crop_h,
                            std::size_t crop_w, std::size_t out_h,
                            std::size_t out_w);

/// Whole-image resize.
ImageBuffer resize_bilinear(const ImageBuffer& src, std::size_t out_h,
                            std::size_t out_w);

/// Inverse-mapped affine resample about the image center:
///   source = A * (dest - center) + center + offset
/// with A = [[a00 a01],[a10 a11]] acting on (x, y) = (col, row) coordinates.
/// Out-of-range taps read the per-channel fill color.
ImageBuffer affine_sample(const ImageBuffer& src, double a00, double a01,
                          double a10, double a11, double off_x, double off_y,
                          std::span<const double> fill);

}  // namespace rsb
