// SPDX-License-Identifier: Apache-2.0
#include "net.hpp"

#include <cmath>
#include <string>

#include "error.hpp"
#include "regularize.hpp"

namespace rsb {

namespace {

Param make_param(const std::string& name, Shape shape, bool is_bias,
                 std::uint64_t seed, std::uint64_t index) {
  Param p;
  p.name = name;
  p.shape = std::move(shape);
  const std::size_t n = shape_numel(p.shape);
  p.value.assign(n, 0.0);
  p.grad.assign(n, 0.0);
  p.is_bias = is_bias;
  if (!is_bias) {
    // Scaled-uniform fan-in: U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
    const double fan_in = static_cast<double>(p.shape[0]);
    const double bound = 1.0 / std::sqrt(fan_in);
    RngStream rng(seed, 0, index, stream_tag::kInit);
    for (double& v : p.value) v = rng.uniform(-bound, bound);
  }
  return p;
}

}  // namespace

ToyNet::ToyNet(const ToyNetConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg.width == 0 || cfg.num_classes == 0 || cfg.input_res == 0) {
    throw ConfigError("toynet: zero dimension");
  }
  std::uint64_t idx = 0;
  const std::size_t in = input_dim();
  params_.push_back(make_param("embed.w", {in, cfg.width}, false, seed, idx++));
  params_.push_back(make_param("embed.b", {cfg.width}, true, seed, idx++));
  for (std::size_t b = 0; b < cfg.depth; ++b) {
    const std::string prefix = "block" + std::to_string(b);
    params_.push_back(
        make_param(prefix + ".fc1.w", {cfg.width, cfg.width}, false, seed, idx++));
    params_.push_back(make_param(prefix + ".fc1.b", {cfg.width}, true, seed, idx++));
    params_.push_back(
        make_param(prefix + ".fc2.w", {cfg.width, cfg.width}, false, seed, idx++));
    params_.push_back(make_param(prefix + ".fc2.b", {cfg.width}, true, seed, idx++));
  }
  params_.push_back(
      make_param("head.w", {cfg.width, cfg.num_classes}, false, seed, idx++));
  params_.push_back(make_param("head.b", {cfg.num_classes}, true, seed, idx++));
}

ToyNet::ToyNet(std::vector<Param> params) : params_(std::move(params)) {
  // Recover the architecture from the stored tensor layout.
  if (params_.size() < 4 || (params_.size() - 4) % 4 != 0) {
    throw IoError("weights: unexpected tensor count");
  }
  const Param& embed = params_.front();
  const Param& head = params_[params_.size() - 2];
  if (embed.name != "embed.w" || head.name != "head.w" ||
      embed.shape.size() != 2 || head.shape.size() != 2) {
    throw IoError("weights: unexpected tensor layout");
  }
  cfg_.width = embed.shape[1];
  cfg_.depth = (params_.size() - 4) / 4;
  cfg_.num_classes = head.shape[1];
  const std::size_t in = embed.shape[0];
  // Assume channel-last square images with 3 channels, else 1.
  cfg_.channels = in % 3 == 0 ? 3 : 1;
  cfg_.input_res = static_cast<std::size_t>(
      std::llround(std::sqrt(static_cast<double>(in / cfg_.channels))));
  if (cfg_.input_res * cfg_.input_res * cfg_.channels != in) {
    throw IoError("weights: embed width is not a square image");
  }
  for (Param& p : params_) {
    p.is_bias = p.shape.size() < 2;
    p.grad.assign(p.value.size(), 0.0);
  }
}

std::vector<Param*> ToyNet::params() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (Param& p : params_) out.push_back(&p);
  return out;
}

Tensor ToyNet::forward(Tape& tape, Tensor input, bool training,
                       std::uint64_t seed, std::uint64_t epoch,
                       std::uint64_t step) const {
  if (input.shape().size() != 2 || input.shape()[1] != input_dim()) {
    throw ContractError("toynet: input must be [B, " +
                        std::to_string(input_dim()) + "]");
  }
  std::size_t pi = 0;
  auto next_leaf = [&](Param& p) {
    return tape.leaf(p.shape, p.value.data(), training ? p.grad.data() : nullptr);
  };

  Tensor h = tape.add_rowvec(tape.matmul(input, next_leaf(params_[pi])),
                             next_leaf(params_[pi + 1]));
  pi += 2;
  for (std::size_t b = 0; b < cfg_.depth; ++b) {
    Tensor branch = tape.add_rowvec(tape.matmul(h, next_leaf(params_[pi])),
                                    next_leaf(params_[pi + 1]));
    branch = tape.activation(branch, ActKind::Gelu);
    branch = tape.add_rowvec(tape.matmul(branch, next_leaf(params_[pi + 2])),
                             next_leaf(params_[pi + 3]));
    pi += 4;
    if (cfg_.drop_path > 0.0) {
      RngStream rng(seed, epoch, step, stream_tag::kDropPathBase + b);
      branch = drop_path(tape, branch, cfg_.drop_path, training, rng);
    }
    h = tape.elementwise(h, branch, EwKind::Add);
  }
  if (cfg_.dropout > 0.0) {
    RngStream rng(seed, epoch, step, stream_tag::kDropout);
    h = dropout(tape, h, cfg_.dropout, training, rng);
  }
  return tape.add_rowvec(tape.matmul(h, next_leaf(params_[pi])),
                         next_leaf(params_[pi + 1]));
}

}  // namespace rsb
