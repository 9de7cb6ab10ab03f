// SPDX-License-Identifier: Apache-2.0
#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace rsb {

namespace {

constexpr char kSplitMagic[4] = {'R', 'S', 'B', '1'};
constexpr char kWeightsMagic[4] = {'R', 'S', 'B', 'W'};
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kGratingAmplitude = 0.5;
constexpr double kPixelNoiseStd = 0.1;
// Random per-sample phase range; sub-cycle so patterns within a class stay
// correlated enough for a linear probe to get traction.
constexpr double kPhaseRange = kTwoPi * 0.65;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "'");
  return f;
}

void write_bytes(std::FILE* f, const void* data, std::size_t n,
                 const std::string& path) {
  if (std::fwrite(data, 1, n, f) != n) throw IoError("write failed: " + path);
}

void read_bytes(std::FILE* f, void* data, std::size_t n,
                const std::string& path) {
  if (std::fread(data, 1, n, f) != n) {
    throw IoError("short read / corrupt file: " + path);
  }
}

template <typename T>
void write_le(std::FILE* f, T value, const std::string& path) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(
        (static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  }
  write_bytes(f, buf, sizeof(T), path);
}

template <typename T>
T read_le(std::FILE* f, const std::string& path) {
  unsigned char buf[sizeof(T)];
  read_bytes(f, buf, sizeof(T), path);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  return static_cast<T>(v);
}

void write_f64(std::FILE* f, double value, const std::string& path) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  write_le<std::uint64_t>(f, bits, path);
}

double read_f64(std::FILE* f, const std::string& path) {
  const std::uint64_t bits = read_le<std::uint64_t>(f, path);
  double value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

std::string split_path(const std::string& stem, Split split) {
  switch (split) {
    case Split::Train: return stem + ".train";
    case Split::Val: return stem + ".val";
    case Split::Test: return stem + ".test";
  }
  throw ConfigError("unknown split");
}

// Global sample index ranges are disjoint across splits.
std::uint64_t split_base(const SyntheticDatasetSpec& spec, Split split) {
  switch (split) {
    case Split::Train: return 0;
    case Split::Val: return spec.train_count;
    case Split::Test: return spec.train_count + spec.val_count;
  }
  throw ConfigError("unknown split");
}

std::uint32_t split_count(const SyntheticDatasetSpec& spec, Split split) {
  switch (split) {
    case Split::Train: return spec.train_count;
    case Split::Val: return spec.val_count;
    case Split::Test: return spec.test_count;
  }
  throw ConfigError("unknown split");
}

}  // namespace

SyntheticDatasetSpec parse_dataset_spec(const std::string& text) {
  SyntheticDatasetSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto notspace = line.find_first_not_of(" \t\r");
    if (notspace == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("dataset spec line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "num_classes") {
        spec.num_classes = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "train") {
        spec.train_count = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "val") {
        spec.val_count = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "test") {
        spec.test_count = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "resolution") {
        spec.resolution = static_cast<std::uint16_t>(std::stoul(value));
      } else if (key == "channels") {
        spec.channels = static_cast<std::uint8_t>(std::stoul(value));
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else {
        throw ConfigError("dataset spec line " + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("dataset spec line " + std::to_string(line_no) +
                        ": bad value '" + value + "'");
    }
  }
  if (spec.num_classes == 0 || spec.resolution == 0 || spec.channels == 0) {
    throw ConfigError("dataset spec: classes, resolution, channels must be > 0");
  }
  return spec;
}

ImageBuffer DatasetSplit::image(std::size_t index) const {
  ImageBuffer img(height, width, channels);
  const std::uint8_t* src = pixels.data() + index * sample_stride();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = static_cast<double>(src[i]) / 255.0;
  }
  return img;
}

DatasetSplit generate_split(const SyntheticDatasetSpec& spec, Split split) {
  DatasetSplit out;
  out.height = spec.resolution;
  out.width = spec.resolution;
  out.channels = spec.channels;
  const std::uint32_t count = split_count(spec, split);
  const std::uint64_t base = split_base(spec, split);
  const std::size_t stride = out.sample_stride();
  out.pixels.resize(static_cast<std::size_t>(count) * stride);
  out.labels.resize(count);

  const double res = static_cast<double>(spec.resolution);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t global = base + i;
    const std::uint16_t label =
        static_cast<std::uint16_t>(global % spec.num_classes);
    out.labels[i] = label;

    RngStream phase_rng(spec.seed, 0, global, stream_tag::kDatasetPhase);
    RngStream noise_rng(spec.seed, 0, global, stream_tag::kDatasetNoise);
    const double angle =
        static_cast<double>(label) * 3.14159265358979323846 /
        static_cast<double>(spec.num_classes);
    const double freq = 2.0 + static_cast<double>(label % 5);
    const double phase = phase_rng.uniform(0.0, kPhaseRange);
    const double ca = std::cos(angle), sa = std::sin(angle);

    std::uint8_t* dst = out.pixels.data() + static_cast<std::size_t>(i) * stride;
    std::size_t p = 0;
    for (std::uint16_t r = 0; r < spec.resolution; ++r) {
      for (std::uint16_t c = 0; c < spec.resolution; ++c) {
        const double u = (ca * static_cast<double>(c) +
                          sa * static_cast<double>(r)) / res;
        const double wave = std::sin(kTwoPi * freq * u + phase);
        for (std::uint8_t ch = 0; ch < spec.channels; ++ch) {
          const double noise = noise_rng.normal(0.0, kPixelNoiseStd);
          const double v =
              std::clamp(0.5 + kGratingAmplitude * wave + noise, 0.0, 1.0);
          dst[p++] = static_cast<std::uint8_t>(std::lround(v * 255.0));
        }
      }
    }
  }
  return out;
}

void write_split(const DatasetSplit& split, const std::string& path) {
  FilePtr f = open_file(path, "wb");
  write_bytes(f.get(), kSplitMagic, 4, path);
  write_le<std::uint32_t>(f.get(), static_cast<std::uint32_t>(split.count()), path);
  write_le<std::uint16_t>(f.get(), split.height, path);
  write_le<std::uint16_t>(f.get(), split.width, path);
  write_le<std::uint8_t>(f.get(), split.channels, path);
  write_le<std::uint8_t>(f.get(), 0, path);  // reserved
  write_bytes(f.get(), split.pixels.data(), split.pixels.size(), path);
  for (std::uint16_t label : split.labels) {
    write_le<std::uint16_t>(f.get(), label, path);
  }
}

DatasetSplit read_split(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  char magic[4];
  read_bytes(f.get(), magic, 4, path);
  if (std::memcmp(magic, kSplitMagic, 4) != 0) {
    throw IoError("bad magic in '" + path + "'");
  }
  DatasetSplit split;
  const auto count = read_le<std::uint32_t>(f.get(), path);
  split.height = read_le<std::uint16_t>(f.get(), path);
  split.width = read_le<std::uint16_t>(f.get(), path);
  split.channels = read_le<std::uint8_t>(f.get(), path);
  (void)read_le<std::uint8_t>(f.get(), path);
  if (split.height == 0 || split.width == 0 || split.channels == 0) {
    throw IoError("degenerate dimensions in '" + path + "'");
  }
  split.pixels.resize(static_cast<std::size_t>(count) * split.sample_stride());
  read_bytes(f.get(), split.pixels.data(), split.pixels.size(), path);
  split.labels.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    split.labels[i] = read_le<std::uint16_t>(f.get(), path);
  }
  return split;
}

void generate_dataset_files(const SyntheticDatasetSpec& spec,
                            const std::string& stem) {
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    write_split(generate_split(spec, s), split_path(stem, s));
  }
}

Dataset open_dataset(const std::string& stem) {
  Dataset ds;
  ds.train = read_split(split_path(stem, Split::Train));
  ds.val = read_split(split_path(stem, Split::Val));
  ds.test = read_split(split_path(stem, Split::Test));
  std::uint16_t max_label = 0;
  for (const DatasetSplit* s : {&ds.train, &ds.val, &ds.test}) {
    for (std::uint16_t l : s->labels) max_label = std::max(max_label, l);
  }
  ds.num_classes = static_cast<std::uint32_t>(max_label) + 1;
  return ds;
}

NormStats compute_norm_stats(const DatasetSplit& split) {
  const std::size_t C = split.channels;
  NormStats stats;
  stats.mean.assign(C, 0.0);
  stats.stddev.assign(C, 0.0);
  const std::size_t per_channel = split.pixels.size() / C;
  if (per_channel == 0) throw ContractError("compute_norm_stats: empty split");
  for (std::size_t i = 0; i < split.pixels.size(); ++i) {
    stats.mean[i % C] += static_cast<double>(split.pixels[i]) / 255.0;
  }
  for (std::size_t ch = 0; ch < C; ++ch) {
    stats.mean[ch] /= static_cast<double>(per_channel);
  }
  for (std::size_t i = 0; i < split.pixels.size(); ++i) {
    const double d =
        static_cast<double>(split.pixels[i]) / 255.0 - stats.mean[i % C];
    stats.stddev[i % C] += d * d;
  }
  for (std::size_t ch = 0; ch < C; ++ch) {
    stats.stddev[ch] = std::sqrt(stats.stddev[ch] / static_cast<double>(per_channel));
    if (stats.stddev[ch] == 0.0) stats.stddev[ch] = 1.0;
  }
  return stats;
}

void write_weights(const std::vector<Param>& params, const std::string& path) {
  FilePtr f = open_file(path, "wb");
  write_bytes(f.get(), kWeightsMagic, 4, path);
  write_le<std::uint32_t>(f.get(), static_cast<std::uint32_t>(params.size()), path);
  for (const Param& p : params) {
    if (p.name.size() > 255) throw IoError("tensor name too long");
    if (p.shape.size() > 255) throw IoError("tensor rank too large");
    write_le<std::uint8_t>(f.get(), static_cast<std::uint8_t>(p.name.size()), path);
    write_bytes(f.get(), p.name.data(), p.name.size(), path);
    write_le<std::uint8_t>(f.get(), static_cast<std::uint8_t>(p.shape.size()), path);
    for (std::size_t d : p.shape) {
      write_le<std::uint32_t>(f.get(), static_cast<std::uint32_t>(d), path);
    }
    for (double v : p.value) write_f64(f.get(), v, path);
  }
}

std::vector<Param> read_weights(const std::string& path) {
  FilePtr f = open_file(path, "rb");
  char magic[4];
  read_bytes(f.get(), magic, 4, path);
  if (std::memcmp(magic, kWeightsMagic, 4) != 0) {
    throw IoError("bad magic in '" + path + "'");
  }
  const auto count = read_le<std::uint32_t>(f.get(), path);
  std::vector<Param> params(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Param& p = params[i];
    const auto name_len = read_le<std::uint8_t>(f.get(), path);
    p.name.resize(name_len);
    read_bytes(f.get(), p.name.data(), name_len, path);
    const auto rank = read_le<std::uint8_t>(f.get(), path);
    p.shape.resize(rank);
    for (std::uint8_t d = 0; d < rank; ++d) {
      p.shape[d] = read_le<std::uint32_t>(f.get(), path);
    }
    const std::size_t n = shape_numel(p.shape);
    p.value.resize(n);
    for (std::size_t k = 0; k < n; ++k) p.value[k] = read_f64(f.get(), path);
    p.grad.assign(n, 0.0);
  }
  return params;
}

}  // namespace rsb
