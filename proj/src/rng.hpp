// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace rsb {

/// Purpose tags separating the random streams consumed by different
/// pipeline stages. Two streams with the same (seed, epoch, sample) but
/// different tags never share draws, which is what makes the per-sample
/// pipeline reproducible under any worker count.
namespace stream_tag {
inline constexpr std::uint64_t kDatasetPhase = 1;
inline constexpr std::uint64_t kDatasetNoise = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kRrc = 4;
inline constexpr std::uint64_t kFlip = 5;
inline constexpr std::uint64_t kRandAugment = 6;
inline constexpr std::uint64_t kErase = 7;
inline constexpr std::uint64_t kMix = 8;
inline constexpr std::uint64_t kDropout = 9;
inline constexpr std::uint64_t kInit = 10;
inline constexpr std::uint64_t kLrNoise = 11;
// Drop-path masks use kDropPathBase + residual block index.
inline constexpr std::uint64_t kDropPathBase = 0x100;
}  // namespace stream_tag

/// Counter-based random stream keyed by (seed, epoch, sample, tag).
///
/// The key is hashed into the initial state of a splitmix64 sequence, so a
/// stream is a pure function of its key: the same key replays the same
/// draws no matter how work is scheduled across threads or processes.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample,
            std::uint64_t tag);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  /// True with probability p.
  bool bernoulli(double p);

  /// Standard normal via Box-Muller (two uniforms per draw).
  double normal();
  double normal(double mean, double stddev);

  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);
  /// Beta(a, b) from two gamma draws.
  double beta(double a, double b);

private:
  std::uint64_t state_;
};

}  // namespace rsb
