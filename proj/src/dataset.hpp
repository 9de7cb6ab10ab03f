// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augment.hpp"
#include "image.hpp"
#include "optim.hpp"

namespace rsb {

/// Synthetic class-conditioned dataset: class k is an oriented sinusoidal
/// grating (angle k*pi/K, frequency 2 + k mod 5, amplitude 0.5) with a
/// per-sample random phase, plus N(0, 0.1) pixel noise, clamped to [0,1].
/// Every sample is a pure function of (spec, global index).
struct SyntheticDatasetSpec {
  std::uint32_t num_classes = 10;
  std::uint32_t train_count = 5000;
  std::uint32_t val_count = 1000;
  std::uint32_t test_count = 1000;
  std::uint16_t resolution = 32;
  std::uint8_t channels = 3;
  std::uint64_t seed = 0;
};

/// Parse `key = value` lines: num_classes, train, val, test, resolution,
/// channels, seed.
SyntheticDatasetSpec parse_dataset_spec(const std::string& text);

/// One loaded split: 8-bit pixels (row-major, channel-last) plus labels.
struct DatasetSplit {
  std::uint16_t height = 0;
  std::uint16_t width = 0;
  std::uint8_t channels = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint16_t> labels;

  std::size_t count() const { return labels.size(); }
  std::size_t sample_stride() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  /// Unit-interval float image for one sample.
  ImageBuffer image(std::size_t index) const;
};

struct Dataset {
  DatasetSplit train, val, test;
  std::uint32_t num_classes = 0;
};

enum class Split { Train, Val, Test };

/// Deterministic generation of one split (indices are globally disjoint
/// across splits so no sample leaks between them).
DatasetSplit generate_split(const SyntheticDatasetSpec& spec, Split split);

/// Write the three split files `<stem>.train|.val|.test`. Regeneration from
/// the same spec is byte-identical.
void generate_dataset_files(const SyntheticDatasetSpec& spec,
                            const std::string& stem);

/// Binary split format, little-endian: magic "RSB1", u32 count, u16 height,
/// u16 width, u8 channels, u8 reserved, count*H*W*C pixel bytes, count u16
/// labels.
void write_split(const DatasetSplit& split, const std::string& path);
DatasetSplit read_split(const std::string& path);

Dataset open_dataset(const std::string& stem);

/// Per-channel mean/std over a split's raw unit-interval pixels.
NormStats compute_norm_stats(const DatasetSplit& split);

/// Weights file, little-endian: magic "RSBW", u32 tensor count, then per
/// tensor: u8 name length, name bytes, u8 rank, u32 extents, f64 values.
void write_weights(const std::vector<Param>& params, const std::string& path);
std::vector<Param> read_weights(const std::string& path);

}  // namespace rsb
