// SPDX-License-Identifier: Apache-2.0
#include "regularize.hpp"

#include <algorithm>

#include "error.hpp"

namespace rsb {

Tensor drop_path(Tape& tape, Tensor residual, double rate, bool training,
                 RngStream& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("drop_path: rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) return residual;
  const Shape& s = residual.shape();
  if (s.size() != 2) throw ContractError("drop_path: expects [B, D]");
  const std::size_t B = s[0], D = s[1];
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(B * D);
  for (std::size_t b = 0; b < B; ++b) {
    const double v = rng.uniform() < rate ? 0.0 : keep_scale;
    std::fill(mask.begin() + b * D, mask.begin() + (b + 1) * D, v);
  }
  return tape.elementwise(residual, tape.constant(s, std::move(mask)),
                          EwKind::Mul);
}

Tensor dropout(Tape& tape, Tensor x, double rate, bool training,
               RngStream& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout: rate must lie in [0, 1)");
  }
  if (!training || rate == 0.0) return x;
  const std::size_t n = x.size();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return tape.elementwise(x, tape.constant(x.shape(), std::move(mask)),
                          EwKind::Mul);
}

EmaState::EmaState(double decay, const std::vector<Param*>& params)
    : decay_(decay) {
  if (decay < 0.0 || decay >= 1.0) {
    throw ConfigError("ema: decay must lie in [0, 1)");
  }
  for (const Param* p : params) shadow_.push_back(p->value);
}

void EmaState::update(const std::vector<Param*>& params) {
  if (params.size() != shadow_.size()) {
    throw ContractError("ema: parameter count changed");
  }
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (params[s]->value.size() != shadow_[s].size()) {
      throw ContractError("ema: shape drift in '" + params[s]->name + "'");
    }
    for (std::size_t i = 0; i < shadow_[s].size(); ++i) {
      shadow_[s][i] =
          decay_ * shadow_[s][i] + (1.0 - decay_) * params[s]->value[i];
    }
  }
}

void EmaState::swap_with(const std::vector<Param*>& params) {
  if (params.size() != shadow_.size()) {
    throw ContractError("ema: parameter count changed");
  }
  for (std::size_t s = 0; s < params.size(); ++s) {
    params[s]->value.swap(shadow_[s]);
  }
}

std::vector<std::uint32_t> RepeatedAugSampler::epoch_indices(
    std::uint64_t epoch) const {
  if (repeats == 0) throw ConfigError("sampler: repeats must be >= 1");
  if (repeats > 1 && batch_size % repeats != 0) {
    throw ConfigError("sampler: batch size not divisible by repeats");
  }
  std::vector<std::uint32_t> perm(dataset_size);
  for (std::size_t i = 0; i < dataset_size; ++i) {
    perm[i] = static_cast<std::uint32_t>(i);
  }
  RngStream rng(seed, epoch, 0, stream_tag::kShuffle);
  for (std::size_t i = dataset_size; i-- > 1;) {
    std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  }
  if (repeats == 1) return perm;

  const std::size_t distinct = (dataset_size + repeats - 1) / repeats;
  std::vector<std::uint32_t> slots;
  slots.reserve(distinct * repeats);
  for (std::size_t i = 0; i < distinct; ++i) {
    for (std::size_t r = 0; r < repeats; ++r) slots.push_back(perm[i]);
  }
  return slots;
}

}  // namespace rsb
