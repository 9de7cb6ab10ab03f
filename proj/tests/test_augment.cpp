// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "augment.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "rng.hpp"

using namespace rsb;

namespace {

ImageBuffer random_image(std::size_t h, std::size_t w, std::size_t c,
                         std::uint64_t seed) {
  ImageBuffer img(h, w, c);
  RngStream rng(seed, 0, 0, 77);
  for (double& p : img.pixels) p = rng.uniform();
  return img;
}

ImageBuffer checkerboard(std::size_t n) {
  ImageBuffer img(n, n, 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) img.at(r, c, 0) = (r + c) % 2 ? 1.0 : 0.0;
  }
  return img;
}

bool bitwise_equal(const ImageBuffer& a, const ImageBuffer& b) {
  return a.height == b.height && a.width == b.width && a.pixels == b.pixels;
}

}  // namespace

TEST_SUITE("augment") {

// ---------------------------------------------------------------- RRC

TEST_CASE("rrc with full scale and fixed ratio is the identity") {
  ImageBuffer img = random_image(16, 16, 3, 1);
  RrcConfig cfg;
  cfg.target_h = cfg.target_w = 16;
  cfg.scale_lo = cfg.scale_hi = 1.0;
  cfg.ratio_lo = cfg.ratio_hi = 1.0;
  RngStream rng(1, 0, 0, stream_tag::kRrc);
  CHECK(bitwise_equal(random_resized_crop(img, cfg, rng), img));
}

TEST_CASE("rrc of a constant image is constant at target size") {
  ImageBuffer img(20, 20, 3, 0.375);
  RrcConfig cfg;
  cfg.target_h = cfg.target_w = 8;
  RngStream rng(2, 0, 0, stream_tag::kRrc);
  ImageBuffer out = random_resized_crop(img, cfg, rng);
  CHECK(out.height == 8);
  CHECK(out.width == 8);
  for (double p : out.pixels) CHECK(p == 0.375);
}

TEST_CASE("rrc box replays from the stream and respects the ranges") {
  RrcConfig cfg;
  cfg.target_h = cfg.target_w = 8;
  for (std::uint64_t key = 0; key < 50; ++key) {
    RngStream rng(key, 3, 9, stream_tag::kRrc);
    const CropBox box = sample_rrc_box(8, 8, cfg, rng);

    // Independent re-derivation of the sampler from a clone of the stream.
    RngStream replay(key, 3, 9, stream_tag::kRrc);
    CropBox expect{};
    bool found = false;
    for (int attempt = 0; attempt < cfg.max_attempts && !found; ++attempt) {
      const double area = replay.uniform(cfg.scale_lo, cfg.scale_hi) * 64.0;
      const double aspect = std::exp(
          replay.uniform(std::log(cfg.ratio_lo), std::log(cfg.ratio_hi)));
      const auto w = static_cast<std::size_t>(std::llround(std::sqrt(area * aspect)));
      const auto h = static_cast<std::size_t>(std::llround(std::sqrt(area / aspect)));
      if (w > 0 && h > 0 && w <= 8 && h <= 8) {
        expect.top = replay.uniform_int(8 - h + 1);
        expect.left = replay.uniform_int(8 - w + 1);
        expect.height = h;
        expect.width = w;
        found = true;
      }
    }
    if (!found) expect = CropBox{0, 0, 8, 8};  // fallback: centered full box
    CHECK(box.top == expect.top);
    CHECK(box.left == expect.left);
    CHECK(box.height == expect.height);
    CHECK(box.width == expect.width);

    if (found) {
      const double frac = static_cast<double>(box.height * box.width) / 64.0;
      // Rounded sides can push the area fraction slightly past the range.
      CHECK(frac > cfg.scale_lo * 0.7);
      CHECK(frac < 1.0 + 1e-12);
      const double aspect =
          static_cast<double>(box.width) / static_cast<double>(box.height);
      CHECK(aspect > cfg.ratio_lo * 0.6);
      CHECK(aspect < cfg.ratio_hi * 1.7);
    }
  }
}

TEST_CASE("rrc rejects zero target and normalized input") {
  ImageBuffer img = random_image(8, 8, 1, 3);
  RrcConfig cfg;
  cfg.target_h = 0;
  RngStream rng(0, 0, 0, 0);
  CHECK_THROWS_AS(random_resized_crop(img, cfg, rng), ConfigError);
  img.normalized = true;
  cfg.target_h = 8;
  CHECK_THROWS_AS(random_resized_crop(img, cfg, rng), ContractError);
}

// ---------------------------------------------------------------- flip

TEST_CASE("forced flip is an involution") {
  ImageBuffer img = random_image(9, 7, 3, 4);
  RngStream r1(1, 0, 0, 0), r2(2, 0, 0, 0);
  ImageBuffer once = horizontal_flip(img, r1, 1.0);
  ImageBuffer twice = horizontal_flip(once, r2, 1.0);
  CHECK(bitwise_equal(twice, img));
}

TEST_CASE("flip reverses a column gradient") {
  ImageBuffer img(1, 5, 1);
  for (std::size_t c = 0; c < 5; ++c) img.at(0, c, 0) = c * 0.2;
  RngStream rng(3, 0, 0, 0);
  ImageBuffer out = horizontal_flip(img, rng, 1.0);
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(out.at(0, c, 0) == img.at(0, 4 - c, 0));
  }
}

TEST_CASE("flip rate over 10000 draws is near one half") {
  ImageBuffer img(1, 2, 1);
  img.at(0, 0, 0) = 1.0;
  int flips = 0;
  for (int i = 0; i < 10000; ++i) {
    RngStream rng(11, 0, i, stream_tag::kFlip);
    if (horizontal_flip(img, rng, 0.5).at(0, 0, 0) == 0.0) ++flips;
  }
  CHECK(flips >= 4800);
  CHECK(flips <= 5200);
}

// ----------------------------------------------------- magnitude sampling

TEST_CASE("mstd zero always returns M exactly") {
  RandAugmentConfig cfg;
  cfg.magnitude = 7.0;
  cfg.mstd = 0.0;
  RngStream rng(5, 0, 0, 0);
  for (int i = 0; i < 10; ++i) CHECK(sample_magnitude(cfg, rng) == 7.0);
}

TEST_CASE("uniform sentinel draws from [0, M]") {
  RandAugmentConfig cfg;
  cfg.magnitude = 10.0;
  cfg.uniform_mstd = true;
  RngStream rng(6, 0, 0, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double m = sample_magnitude(cfg, rng);
    REQUIRE(m >= 0.0);
    REQUIRE(m <= 10.0);
    sum += m;
  }
  CHECK(sum / n >= 4.9);
  CHECK(sum / n <= 5.1);
}

TEST_CASE("gaussian mstd has the configured spread") {
  RandAugmentConfig cfg;
  cfg.magnitude = 7.0;
  cfg.mstd = 0.5;
  RngStream rng(7, 0, 0, 0);
  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double m = sample_magnitude(cfg, rng);
    REQUIRE(m >= 0.0);
    REQUIRE(m <= 10.0);
    sum += m;
    sumsq += m * m;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(sd >= 0.45);
  CHECK(sd <= 0.55);
}

// ----------------------------------------------------- magnitude mapping

TEST_CASE("zero magnitude parameterizes the identity") {
  RngStream rng(8, 0, 0, 0);
  for (AugOpKind kind : {AugOpKind::Color, AugOpKind::Contrast,
                         AugOpKind::Brightness, AugOpKind::Sharpness}) {
    CHECK(map_magnitude(kind, 0.0, true, rng).blend_factor == 1.0);
  }
  CHECK(map_magnitude(AugOpKind::Posterize, 0.0, true, rng).posterize_bits == 8);
  CHECK(map_magnitude(AugOpKind::Solarize, 0.0, true, rng).solarize_threshold ==
        1.0);
  CHECK(map_magnitude(AugOpKind::Rotate, 0.0, true, rng).degrees == 0.0);
}

TEST_CASE("full magnitude reaches the blend extrapolation endpoints") {
  bool saw_19 = false, saw_01 = false;
  for (std::uint64_t k = 0; k < 64; ++k) {
    RngStream rng(k, 0, 0, 0);
    const double f = map_magnitude(AugOpKind::Sharpness, 10.0, true, rng).blend_factor;
    if (f == doctest::Approx(1.9)) saw_19 = true;
    if (f == doctest::Approx(0.1)) saw_01 = true;
    CHECK(std::abs(f - 1.0) == doctest::Approx(0.9));
  }
  CHECK(saw_19);
  CHECK(saw_01);
}

TEST_CASE("posterize at M=5 maps to 6 bits") {
  RngStream rng(9, 0, 0, 0);
  CHECK(map_magnitude(AugOpKind::Posterize, 5.0, true, rng).posterize_bits == 6);
  CHECK(map_magnitude(AugOpKind::Posterize, 10.0, true, rng).posterize_bits == 4);
}

TEST_CASE("distortion strength is non-decreasing in magnitude for all ops") {
  for (AugOpKind kind : default_aug_inventory()) {
    double prev = -1.0;
    for (double m = 0.0; m <= 10.0; m += 0.5) {
      RngStream rng(10, 0, static_cast<std::uint64_t>(m * 2), 0);
      const double s = distortion_strength(map_magnitude(kind, m, true, rng));
      CHECK(s >= prev - 1e-12);
      prev = s;
    }
  }
}

TEST_CASE("magnitude outside the scale is rejected") {
  RngStream rng(11, 0, 0, 0);
  CHECK_THROWS_AS(map_magnitude(AugOpKind::Rotate, 10.5, true, rng),
                  ContractError);
}

// ---------------------------------------------------------------- apply_op

TEST_CASE("blend factor one is bitwise identity for every blend op") {
  ImageBuffer img = random_image(12, 12, 3, 12);
  for (AugOpKind kind : {AugOpKind::Color, AugOpKind::Contrast,
                         AugOpKind::Brightness, AugOpKind::Sharpness}) {
    AugOpParams p;
    p.kind = kind;
    p.blend_factor = 1.0;
    CHECK(bitwise_equal(apply_op(img, p, {}), img));
  }
}

TEST_CASE("brightness factor zero selects the black degenerate") {
  ImageBuffer img = random_image(6, 6, 3, 13);
  AugOpParams p;
  p.kind = AugOpKind::Brightness;
  p.blend_factor = 0.0;
  ImageBuffer out = apply_op(img, p, {});
  for (double v : out.pixels) CHECK(v == 0.0);
}

TEST_CASE("rotating a constant image by a full turn keeps it constant") {
  ImageBuffer img(10, 10, 3, 0.6);
  AugOpParams p;
  p.kind = AugOpKind::Rotate;
  p.degrees = 360.0;
  const std::vector<double> fill = {0.6, 0.6, 0.6};
  ImageBuffer out = apply_op(img, p, fill);
  for (double v : out.pixels) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("zero-strength geometric ops are bitwise identity") {
  ImageBuffer img = random_image(7, 9, 3, 14);
  for (AugOpKind kind : {AugOpKind::Rotate, AugOpKind::ShearX, AugOpKind::ShearY,
                         AugOpKind::TranslateX, AugOpKind::TranslateY}) {
    AugOpParams p;
    p.kind = kind;
    CHECK(bitwise_equal(apply_op(img, p, {}), img));
  }
}

TEST_CASE("solarize threshold one never inverts") {
  ImageBuffer img = random_image(5, 5, 1, 15);
  img.pixels[3] = 1.0;  // even a pure-white pixel stays (strict comparison)
  AugOpParams p;
  p.kind = AugOpKind::Solarize;
  p.solarize_threshold = 1.0;
  CHECK(bitwise_equal(apply_op(img, p, {}), img));
  p.solarize_threshold = 0.5;
  ImageBuffer out = apply_op(img, p, {});
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    if (img.pixels[i] > 0.5) {
      CHECK(out.pixels[i] == 1.0 - img.pixels[i]);
    } else {
      CHECK(out.pixels[i] == img.pixels[i]);
    }
  }
}

TEST_CASE("every op keeps unit pixel range") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    ImageBuffer img = random_image(16, 16, 3, 200 + seed);
    const std::vector<double> fill = {0.45, 0.5, 0.55};
    for (AugOpKind kind : default_aug_inventory()) {
      RngStream rng(seed, 0, static_cast<int>(kind), 0);
      const AugOpParams p = map_magnitude(kind, 10.0, true, rng);
      ImageBuffer out = apply_op(img, p, fill);
      for (double v : out.pixels) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
      }
    }
  }
}

// ------------------------------------------------------------ rand_augment

TEST_CASE("zero magnitude over blend/posterize/solarize is identity") {
  ImageBuffer img = random_image(14, 14, 3, 16);
  RandAugmentConfig cfg;
  cfg.magnitude = 0.0;
  cfg.mstd = 0.0;
  cfg.num_ops = 4;
  cfg.fill = {0.5, 0.5, 0.5};
  cfg.inventory = {AugOpKind::Color,      AugOpKind::Contrast,
                   AugOpKind::Brightness, AugOpKind::Sharpness,
                   AugOpKind::Posterize,  AugOpKind::Solarize};
  for (std::uint64_t s = 0; s < 10; ++s) {
    RngStream rng(s, 0, 0, stream_tag::kRandAugment);
    CHECK(bitwise_equal(rand_augment(img, cfg, rng), img));
  }
}

TEST_CASE("fixed stream key reproduces rand_augment bitwise") {
  ImageBuffer img = random_image(16, 16, 3, 17);
  RandAugmentConfig cfg;
  cfg.magnitude = 7.0;
  cfg.mstd = 0.5;
  cfg.num_ops = 2;
  cfg.fill = {0.5, 0.5, 0.5};
  RngStream r1(21, 4, 99, stream_tag::kRandAugment);
  RngStream r2(21, 4, 99, stream_tag::kRandAugment);
  CHECK(bitwise_equal(rand_augment(img, cfg, r1), rand_augment(img, cfg, r2)));
}

// -------------------------------------------------------------- normalize

TEST_CASE("normalize with zero mean unit std only sets the flag") {
  ImageBuffer img = random_image(4, 4, 2, 18);
  NormStats stats{{0.0, 0.0}, {1.0, 1.0}};
  ImageBuffer out = normalize(img, stats);
  CHECK(out.normalized);
  CHECK(out.pixels == img.pixels);
}

TEST_CASE("normalizing the mean image gives zeros") {
  ImageBuffer img(3, 3, 2);
  NormStats stats{{0.3, 0.7}, {0.2, 0.4}};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      img.at(r, c, 0) = 0.3;
      img.at(r, c, 1) = 0.7;
    }
  }
  for (double v : normalize(img, stats).pixels) CHECK(v == 0.0);
}

TEST_CASE("denormalize inverts normalize to 1e-12") {
  ImageBuffer img = random_image(8, 8, 3, 19);
  NormStats stats{{0.48, 0.46, 0.41}, {0.27, 0.25, 0.23}};
  ImageBuffer round = denormalize(normalize(img, stats), stats);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    CHECK(round.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-12));
  }
}

TEST_CASE("normalize contract errors") {
  ImageBuffer img = random_image(4, 4, 1, 20);
  NormStats stats{{0.5}, {0.25}};
  ImageBuffer once = normalize(img, stats);
  CHECK_THROWS_AS(normalize(once, stats), ContractError);
  NormStats zero{{0.5}, {0.0}};
  CHECK_THROWS_AS(normalize(img, zero), ConfigError);
  CHECK_THROWS_AS(denormalize(img, stats), ContractError);
}

// ---------------------------------------------------------- random erasing

TEST_CASE("erasing with probability zero is the identity") {
  ImageBuffer img = random_image(8, 8, 3, 21);
  img.normalized = true;
  RandomErasingConfig cfg;
  cfg.probability = 0.0;
  RngStream rng(1, 0, 0, stream_tag::kErase);
  CHECK(bitwise_equal(random_erasing(img, cfg, rng), img));
}

TEST_CASE("erasing requires a normalized image") {
  ImageBuffer img = random_image(8, 8, 3, 22);
  RandomErasingConfig cfg;
  cfg.probability = 1.0;
  RngStream rng(1, 0, 0, stream_tag::kErase);
  CHECK_THROWS_AS(random_erasing(img, cfg, rng), ContractError);
}

TEST_CASE("erased region noise has mean 0 and std 1") {
  // One large region (>= 25% of a 64x64 image -> >= 1024 pixels).
  ImageBuffer img(64, 64, 3, 5.0);  // constant, far from N(0,1) range
  img.normalized = true;
  RandomErasingConfig cfg;
  cfg.probability = 1.0;
  cfg.count = 1;
  cfg.area_lo = 0.25;
  cfg.area_hi = 0.3;
  RngStream rng(23, 0, 0, stream_tag::kErase);
  ImageBuffer out = random_erasing(img, cfg, rng);
  double sum = 0, sumsq = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    if (out.pixels[i] != 5.0) {
      sum += out.pixels[i];
      sumsq += out.pixels[i] * out.pixels[i];
      ++n;
    }
  }
  REQUIRE(n >= 1024 * 3);
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(mean >= -0.1);
  CHECK(mean <= 0.1);
  CHECK(sd >= 0.9);
  CHECK(sd <= 1.1);
}

TEST_CASE("count regions replay exactly from the stream") {
  ImageBuffer img(32, 32, 1, 5.0);
  img.normalized = true;
  RandomErasingConfig cfg;
  cfg.probability = 1.0;
  cfg.count = 3;
  cfg.area_lo = 0.02;
  cfg.area_hi = 0.1;
  RngStream rng(24, 1, 2, stream_tag::kErase);
  ImageBuffer out = random_erasing(img, cfg, rng);

  // Replay: one gate draw, then exactly three box draws with noise fills.
  RngStream replay(24, 1, 2, stream_tag::kErase);
  REQUIRE(replay.uniform() < 1.0);
  std::set<std::size_t> expected;
  for (int k = 0; k < 3; ++k) {
    const EraseBox box = sample_erase_box(32, 32, cfg, replay);
    REQUIRE(box.ok);
    for (std::size_t r = box.top; r < box.top + box.height; ++r) {
      for (std::size_t c = box.left; c < box.left + box.width; ++c) {
        expected.insert(r * 32 + c);
        (void)replay.normal();  // consume the fill draw
      }
    }
  }
  std::set<std::size_t> changed;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    if (out.pixels[i] != 5.0) changed.insert(i);
  }
  CHECK(changed == expected);
}

TEST_CASE("erasing keeps population statistics near (0, 1)") {
  SyntheticDatasetSpec spec;
  spec.train_count = 1000;
  spec.val_count = spec.test_count = 1;
  const DatasetSplit split = generate_split(spec, Split::Train);
  const NormStats stats = compute_norm_stats(split);
  RandomErasingConfig cfg;
  cfg.probability = 0.35;
  cfg.count = 3;
  double sum = 0, sumsq = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    RngStream rng(31, 0, i, stream_tag::kErase);
    ImageBuffer img = random_erasing(normalize(split.image(i), stats), cfg, rng);
    for (double v : img.pixels) {
      sum += v;
      sumsq += v * v;
    }
    n += img.pixels.size();
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(sd - 1.0) < 0.05);
}

TEST_CASE("a3 randaugment keeps the corpus mean close to the source") {
  SyntheticDatasetSpec spec;
  spec.train_count = 1000;
  spec.val_count = spec.test_count = 1;
  const DatasetSplit split = generate_split(spec, Split::Train);
  RandAugmentConfig cfg;
  cfg.magnitude = 6.0;
  cfg.mstd = 0.5;
  cfg.num_ops = 2;
  const NormStats stats = compute_norm_stats(split);
  cfg.fill = stats.mean;
  double before = 0, after = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    ImageBuffer img = split.image(i);
    RngStream rng(41, 0, i, stream_tag::kRandAugment);
    ImageBuffer out = rand_augment(img, cfg, rng);
    for (double v : img.pixels) before += v;
    for (double v : out.pixels) after += v;
    n += img.pixels.size();
  }
  const double drift = std::abs(after / n - before / n);
  // Golden from the reference run. Solarize around M=6 inverts the bright
  // half of the grating mass, which dominates the shift on this corpus.
  CHECK(drift == doctest::Approx(0.0271984).epsilon(0.02));
  CHECK(drift < 0.035);
}

}  // TEST_SUITE
