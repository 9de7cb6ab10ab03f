// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "optim.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace rsb {

/// Residual MLP for desk-scale runs: flatten -> affine embed to `width`,
/// `depth` residual blocks (affine -> gelu -> affine on the branch, wrapped
/// by drop-path), then dropout and a linear classifier head. Enough
/// structure to exercise every recipe mechanism that needs residuals.
struct ToyNetConfig {
  std::size_t input_res = 32;
  std::size_t channels = 3;
  std::size_t width = 128;
  std::size_t depth = 4;
  std::size_t num_classes = 10;
  double drop_path = 0.0;
  double dropout = 0.0;
};

class ToyNet {
public:
  /// Fresh network with scaled-uniform fan-in initialization drawn from
  /// (seed, kInit) streams; biases start at zero.
  ToyNet(const ToyNetConfig& cfg, std::uint64_t seed);
  /// Rebuild from stored tensors (shape/name layout of write_weights).
  explicit ToyNet(std::vector<Param> params);

  /// Logits [B, K] for flattened images [B, res*res*C]. Training mode draws
  /// one drop-path mask per block and a dropout mask from streams keyed by
  /// (seed, epoch, step) so runs replay exactly.
  Tensor forward(Tape& tape, Tensor input, bool training, std::uint64_t seed,
                 std::uint64_t epoch, std::uint64_t step) const;

  const ToyNetConfig& config() const { return cfg_; }
  std::size_t input_dim() const {
    return cfg_.input_res * cfg_.input_res * cfg_.channels;
  }
  std::vector<Param*> params();
  const std::vector<Param>& params_vec() const { return params_; }
  std::vector<Param>& params_vec() { return params_; }

private:
  ToyNetConfig cfg_;
  // Layout: embed.w, embed.b, then per block fc1/fc2 pairs, then head.
  mutable std::vector<Param> params_;
};

}  // namespace rsb
