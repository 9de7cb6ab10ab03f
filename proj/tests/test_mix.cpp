// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "error.hpp"
#include "mix.hpp"
#include "rng.hpp"
#include "tensor.hpp"

using namespace rsb;

namespace {

std::vector<double> random_batch(std::size_t b, std::size_t h, std::size_t w,
                                 std::size_t c, std::uint64_t seed) {
  RngStream rng(seed, 0, 0, 55);
  std::vector<double> v(b * h * w * c);
  for (double& x : v) x = rng.uniform();
  return v;
}

// Regularized incomplete beta tail mass P(X < x) for X ~ Beta(a, a) with
// a < 1, via the substitution t = u^a (removes the endpoint singularity),
// integrated with Simpson's rule.
double beta_cdf_oracle(double a, double x) {
  const double upper = std::pow(x, a);
  const int n = 20000;  // even
  const double hstep = upper / n;
  auto f = [&](double t) {
    return std::pow(1.0 - std::pow(t, 1.0 / a), a - 1.0);
  };
  double acc = f(0.0) + f(upper);
  for (int i = 1; i < n; ++i) {
    acc += f(i * hstep) * (i % 2 ? 4.0 : 2.0);
  }
  const double integral = acc * hstep / 3.0 / a;
  const double beta_fn = std::exp(2.0 * std::lgamma(a) - std::lgamma(2.0 * a));
  return integral / beta_fn;
}

MixOutcome manual_outcome(std::vector<MixSample> samples) {
  MixOutcome o;
  o.samples = std::move(samples);
  return o;
}

}  // namespace

TEST_SUITE("mix") {

TEST_CASE("sample_lambda rejects non-positive alpha and stays in [0,1]") {
  RngStream rng(1, 0, 0, 0);
  CHECK_THROWS_AS(sample_lambda(0.0, rng), ConfigError);
  for (double alpha : {0.1, 0.2, 1.0, 5.0}) {
    for (int i = 0; i < 200; ++i) {
      const double lam = sample_lambda(alpha, rng);
      REQUIRE(lam >= 0.0);
      REQUIRE(lam <= 1.0);
    }
  }
}

TEST_CASE("alpha 1 gives a uniform lambda") {
  RngStream rng(2, 0, 0, 0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sample_lambda(1.0, rng);
  CHECK(sum / n >= 0.495);
  CHECK(sum / n <= 0.505);
}

TEST_CASE("alpha 0.2 concentrates mass in the tails (beta cdf oracle)") {
  const double oracle_tail = 2.0 * beta_cdf_oracle(0.2, 0.1);
  REQUIRE(oracle_tail > 0.55);  // the derived bound itself
  RngStream rng(3, 0, 0, 0);
  const int n = 100000;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    const double lam = sample_lambda(0.2, rng);
    if (lam < 0.1 || lam > 0.9) ++tail;
  }
  const double frac = static_cast<double>(tail) / n;
  CHECK(frac > 0.55);
  CHECK(frac == doctest::Approx(oracle_tail).epsilon(0.02));
}

TEST_CASE("cutmix box degenerate lambdas") {
  RngStream rng(4, 0, 0, 0);
  auto [box1, adj1] = cutmix_box(1.0, 32, 32, rng);
  CHECK(box1.area() == 0);
  CHECK(adj1 == 1.0);

  // lambda = 0 covers the image whenever the center allows (a ~1/(H*W)
  // event); the box is always clipped inside the image and lambda_adj is
  // zero exactly when the clipped box covers everything.
  bool full = false;
  for (int i = 0; i < 100000 && !full; ++i) {
    auto [box, adj] = cutmix_box(0.0, 32, 32, rng);
    REQUIRE(box.row1 <= 32);
    REQUIRE(box.col1 <= 32);
    REQUIRE(box.area() >= 16 * 16);  // at least a quarter survives clipping
    if (adj == 0.0) {
      CHECK(box.area() == 32 * 32);
      full = true;
    }
  }
  CHECK(full);
}

TEST_CASE("cutmix lambda_adj equals the exact pixel fraction") {
  RngStream rng(5, 0, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const double lam = rng.uniform();
    auto [box, adj] = cutmix_box(lam, 32, 32, rng);
    std::size_t count = 0;
    for (std::size_t r = box.row0; r < box.row1; ++r) {
      for (std::size_t c = box.col0; c < box.col1; ++c) ++count;
    }
    CHECK(adj == 1.0 - static_cast<double>(count) / 1024.0);
  }
}

TEST_CASE("apply_prob zero leaves the batch untouched") {
  const auto pixels = random_batch(4, 8, 8, 3, 6);
  MixConfig cfg;
  cfg.mixup_alpha = 0.2;
  cfg.cutmix_alpha = 1.0;
  cfg.apply_prob = 0.0;
  RngStream rng(6, 0, 0, stream_tag::kMix);
  const MixResult res = mix_batch(pixels, 4, 8, 8, 3, cfg, rng);
  CHECK(res.pixels == pixels);
  for (const MixSample& s : res.outcome.samples) {
    CHECK(s.method == MixMethod::None);
  }
}

TEST_CASE("batchwise cutmix shares one box and lambda across the batch") {
  const auto pixels = random_batch(4, 16, 16, 3, 7);
  MixConfig cfg;
  cfg.cutmix_alpha = 1.0;  // mixup off -> always cutmix
  cfg.mode = MixMode::Batchwise;
  RngStream rng(7, 0, 0, stream_tag::kMix);
  const MixResult res = mix_batch(pixels, 4, 16, 16, 3, cfg, rng);
  const MixSample& first = res.outcome.samples[0];
  CHECK(first.method == MixMethod::Cutmix);
  for (const MixSample& s : res.outcome.samples) {
    CHECK(s.method == MixMethod::Cutmix);
    CHECK(s.lambda_target == first.lambda_target);
    CHECK(s.box.row0 == first.box.row0);
    CHECK(s.box.col1 == first.box.col1);
  }
  CHECK(res.outcome.samples[1].partner == 2);
  CHECK(res.outcome.samples[3].partner == 0);

  // Re-derive the whole event from a clone of the stream.
  RngStream replay(7, 0, 0, stream_tag::kMix);
  REQUIRE(replay.uniform() < 1.0);              // apply gate
  const double lam = sample_lambda(1.0, replay);  // cutmix-only: no switch draw
  auto [box, adj] = cutmix_box(lam, 16, 16, replay);
  CHECK(first.lambda_raw == lam);
  CHECK(first.lambda_target == adj);
  CHECK(first.box.row0 == box.row0);
  CHECK(first.box.row1 == box.row1);
  CHECK(first.box.col0 == box.col0);
  CHECK(first.box.col1 == box.col1);
}

TEST_CASE("mixed pixels follow the recorded outcome exactly") {
  for (MixMode mode : {MixMode::Batchwise, MixMode::Pairwise,
                       MixMode::Elementwise}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const std::size_t B = 6, H = 8, W = 8, C = 3;
      const auto pixels = random_batch(B, H, W, C, 100 + seed);
      MixConfig cfg;
      cfg.mixup_alpha = 0.2;
      cfg.cutmix_alpha = 1.0;
      cfg.mode = mode;
      RngStream rng(seed, 0, 0, stream_tag::kMix);
      const MixResult res = mix_batch(pixels, B, H, W, C, cfg, rng);
      REQUIRE(res.batch == B);
      const std::size_t stride = H * W * C;
      for (std::size_t i = 0; i < B; ++i) {
        const MixSample& s = res.outcome.samples[i];
        CHECK(s.primary == i);
        if (s.method != MixMethod::None) CHECK(s.partner != i);
        const double* out = res.pixels.data() + i * stride;
        const double* prim = pixels.data() + s.primary * stride;
        const double* part = pixels.data() + s.partner * stride;
        for (std::size_t r = 0; r < H; ++r) {
          for (std::size_t c = 0; c < W; ++c) {
            for (std::size_t ch = 0; ch < C; ++ch) {
              const std::size_t off = (r * W + c) * C + ch;
              double expect = prim[off];
              if (s.method == MixMethod::Mixup) {
                expect = s.lambda_raw * prim[off] +
                         (1.0 - s.lambda_raw) * part[off];
              } else if (s.method == MixMethod::Cutmix && r >= s.box.row0 &&
                         r < s.box.row1 && c >= s.box.col0 && c < s.box.col1) {
                expect = part[off];
              }
              REQUIRE(out[off] == expect);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("pairwise pairs are mutual and share the event") {
  const std::size_t B = 8;
  const auto pixels = random_batch(B, 4, 4, 1, 8);
  MixConfig cfg;
  cfg.mixup_alpha = 0.5;
  cfg.cutmix_alpha = 1.0;
  cfg.mode = MixMode::Pairwise;
  RngStream rng(9, 0, 0, stream_tag::kMix);
  const MixResult res = mix_batch(pixels, B, 4, 4, 1, cfg, rng);
  for (std::size_t i = 0; i < B; ++i) {
    const MixSample& s = res.outcome.samples[i];
    const MixSample& mate = res.outcome.samples[s.partner];
    CHECK(mate.partner == i);
    CHECK(mate.method == s.method);
    CHECK(mate.lambda_raw == s.lambda_raw);
  }
}

TEST_CASE("half mode keeps one output per pair, each source used once") {
  const std::size_t B = 8;
  const auto pixels = random_batch(B, 4, 4, 1, 10);
  MixConfig cfg;
  cfg.mixup_alpha = 0.5;
  cfg.mode = MixMode::Half;
  RngStream rng(11, 0, 0, stream_tag::kMix);
  const MixResult res = mix_batch(pixels, B, 4, 4, 1, cfg, rng);
  CHECK(res.batch == B / 2);
  std::set<std::size_t> used;
  for (const MixSample& s : res.outcome.samples) {
    used.insert(s.primary);
    used.insert(s.partner);
  }
  CHECK(used.size() == B);  // every source contributes exactly once

  RngStream odd(11, 0, 0, stream_tag::kMix);
  CHECK_THROWS_AS(mix_batch(random_batch(3, 4, 4, 1, 1), 3, 4, 4, 1, cfg, odd),
                  ConfigError);
}

TEST_CASE("switch probability drives the long-run cutmix fraction") {
  MixConfig cfg;
  cfg.mixup_alpha = 0.2;
  cfg.cutmix_alpha = 1.0;
  cfg.switch_prob = 0.5;
  const auto pixels = random_batch(2, 2, 2, 1, 12);
  int cutmix = 0;
  const int n = 10000;
  for (int b = 0; b < n; ++b) {
    RngStream rng(13, 0, b, stream_tag::kMix);
    const MixResult res = mix_batch(pixels, 2, 2, 2, 1, cfg, rng);
    if (res.outcome.samples[0].method == MixMethod::Cutmix) ++cutmix;
  }
  const double frac = static_cast<double>(cutmix) / n;
  CHECK(std::abs(frac - 0.5) <= 0.02);
}

// ------------------------------------------------------------- targets

TEST_CASE("unmixed unsmoothed CE targets are exact one-hots") {
  const std::vector<std::uint16_t> labels = {3, 0, 7};
  MixOutcome outcome = manual_outcome({{MixMethod::None, 0, 0, 1.0, 1.0, {}},
                                       {MixMethod::None, 1, 1, 1.0, 1.0, {}},
                                       {MixMethod::None, 2, 2, 1.0, 1.0, {}}});
  const TargetMatrix tm =
      build_targets(labels, outcome, 10, LossKind::Ce, 0.0, BceStyle::Multilabel);
  CHECK(tm.semantics == TargetSemantics::Distribution);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(tm.at(i, k) == (k == labels[i] ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("mixup 0.3 CE row per the spec example") {
  const std::vector<std::uint16_t> labels = {2, 5};
  MixOutcome outcome =
      manual_outcome({{MixMethod::Mixup, 0, 1, 0.3, 0.3, {}},
                      {MixMethod::Mixup, 1, 0, 0.3, 0.3, {}}});
  const TargetMatrix tm =
      build_targets(labels, outcome, 10, LossKind::Ce, 0.0, BceStyle::Multilabel);
  CHECK(tm.at(0, 2) == doctest::Approx(0.3));
  CHECK(tm.at(0, 5) == doctest::Approx(0.7));
  double row_sum = 0.0;
  for (std::size_t k = 0; k < 10; ++k) row_sum += tm.at(0, k);
  CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bce multilabel rows mark both classes at 1-eps") {
  const std::vector<std::uint16_t> labels = {2, 5};
  MixOutcome outcome =
      manual_outcome({{MixMethod::Mixup, 0, 1, 0.3, 0.3, {}},
                      {MixMethod::Mixup, 1, 0, 0.3, 0.3, {}}});
  const TargetMatrix tm = build_targets(labels, outcome, 10, LossKind::Bce, 0.1,
                                        BceStyle::Multilabel);
  CHECK(tm.semantics == TargetSemantics::Multilabel);
  for (std::size_t k = 0; k < 10; ++k) {
    const double expect = (k == 2 || k == 5) ? 0.9 : 0.01;
    CHECK(tm.at(0, k) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("target invariants over random mix events") {
  RngStream rng(17, 0, 0, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t B = 8, K = 10;
    std::vector<std::uint16_t> labels(B);
    for (auto& l : labels) l = static_cast<std::uint16_t>(rng.uniform_int(K));
    const auto pixels = random_batch(B, 4, 4, 1, 300 + trial);
    MixConfig cfg;
    cfg.mixup_alpha = 0.2;
    cfg.cutmix_alpha = 1.0;
    cfg.mode = trial % 2 ? MixMode::Elementwise : MixMode::Batchwise;
    RngStream mix_rng(trial, 0, 0, stream_tag::kMix);
    const MixResult res = mix_batch(pixels, B, 4, 4, 1, cfg, mix_rng);

    const double eps = trial % 3 == 0 ? 0.1 : 0.0;
    const TargetMatrix dist = build_targets(labels, res.outcome, K,
                                            LossKind::Ce, eps,
                                            BceStyle::Multilabel);
    for (std::size_t i = 0; i < B; ++i) {
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += dist.at(i, k);
      REQUIRE(std::abs(sum - 1.0) <= 1e-9);
    }
    const TargetMatrix multi = build_targets(labels, res.outcome, K,
                                             LossKind::Bce, eps,
                                             BceStyle::Multilabel);
    for (std::size_t i = 0; i < B; ++i) {
      int positives = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const double v = multi.at(i, k);
        REQUIRE((v == doctest::Approx(1.0 - eps) ||
                 v == doctest::Approx(eps / K)));
        if (v > 0.5) ++positives;
      }
      REQUIRE(positives >= 1);
      REQUIRE(positives <= 2);
    }
  }
}

// --------------------------------------------------------------- losses

TEST_CASE("ce loss of uniform logits is log K") {
  const std::size_t B = 3, K = 10;
  Tape tape;
  Tensor logits = tape.constant({B, K}, std::vector<double>(B * K, 0.7));
  TargetMatrix tm;
  tm.rows = B;
  tm.cols = K;
  tm.semantics = TargetSemantics::Distribution;
  tm.values.assign(B * K, 0.0);
  RngStream rng(19, 0, 0, 0);
  for (std::size_t i = 0; i < B; ++i) tm.values[i * K + rng.uniform_int(K)] = 1.0;
  CHECK(ce_loss(tape, logits, tm).scalar() ==
        doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("ce loss below log K when the argmax matches the target") {
  const std::size_t K = 10;
  Tape tape;
  std::vector<double> z(K, 0.0);
  z[4] = 2.0;
  Tensor logits = tape.constant({1, K}, z);
  TargetMatrix tm;
  tm.rows = 1;
  tm.cols = K;
  tm.semantics = TargetSemantics::Distribution;
  tm.values.assign(K, 0.0);
  tm.values[4] = 1.0;
  CHECK(ce_loss(tape, logits, tm).scalar() < std::log(10.0));
}

TEST_CASE("ce loss rejects multilabel targets") {
  Tape tape;
  Tensor logits = tape.constant({1, 3}, {0.0, 0.0, 0.0});
  TargetMatrix tm;
  tm.rows = 1;
  tm.cols = 3;
  tm.semantics = TargetSemantics::Multilabel;
  tm.values = {1.0, 1.0, 0.0};
  CHECK_THROWS_AS(ce_loss(tape, logits, tm), ContractError);
}

TEST_CASE("ce loss matches an independent log-sum-exp oracle") {
  const std::size_t B = 4, K = 10;
  RngStream rng(23, 0, 0, 0);
  std::vector<double> z(B * K), t(B * K, 0.0);
  for (double& v : z) v = rng.uniform(-3.0, 3.0);
  for (std::size_t i = 0; i < B; ++i) {
    // random soft distribution row
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      t[i * K + k] = rng.uniform();
      sum += t[i * K + k];
    }
    for (std::size_t k = 0; k < K; ++k) t[i * K + k] /= sum;
  }
  double oracle = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    double lse = 0.0;
    for (std::size_t k = 0; k < K; ++k) lse += std::exp(z[i * K + k]);
    lse = std::log(lse);
    for (std::size_t k = 0; k < K; ++k) {
      oracle += t[i * K + k] * (lse - z[i * K + k]);
    }
  }
  oracle /= B;

  Tape tape;
  TargetMatrix tm{B, K, TargetSemantics::Distribution, t};
  const double got = ce_loss(tape, tape.constant({B, K}, z), tm).scalar();
  CHECK(std::abs(got - oracle) < 1e-10);
}

TEST_CASE("bce loss of zero logits at half targets is log 2") {
  Tape tape;
  Tensor logits = tape.constant({2, 3}, std::vector<double>(6, 0.0));
  TargetMatrix tm{2, 3, TargetSemantics::Multilabel,
                  std::vector<double>(6, 0.5)};
  CHECK(bce_loss(tape, logits, tm).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("bce gradient vanishes when targets equal the sigmoid") {
  const std::size_t n = 6;
  RngStream rng(29, 0, 0, 0);
  std::vector<double> z(n), t(n), grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.uniform(-2.0, 2.0);
    t[i] = 1.0 / (1.0 + std::exp(-z[i]));
  }
  Tape tape;
  Tensor logits = tape.leaf({2, 3}, z.data(), grad.data());
  tape.backward(tape.bce_loss(logits, t));
  for (double g : grad) CHECK(std::abs(g) < 1e-15);
}

TEST_CASE("bce loss matches the naive sigmoid oracle at moderate logits") {
  const std::size_t B = 4, K = 10;
  RngStream rng(31, 0, 0, 0);
  std::vector<double> z(B * K), t(B * K);
  for (double& v : z) v = rng.uniform(-10.0, 10.0);
  for (double& v : t) v = rng.uniform();
  double oracle = 0.0;
  for (std::size_t i = 0; i < B * K; ++i) {
    const double sig = 1.0 / (1.0 + std::exp(-z[i]));
    oracle += -(t[i] * std::log(sig) + (1.0 - t[i]) * std::log(1.0 - sig));
  }
  oracle /= static_cast<double>(B * K);
  Tape tape;
  TargetMatrix tm{B, K, TargetSemantics::Multilabel, t};
  const double got = bce_loss(tape, tape.constant({B, K}, z), tm).scalar();
  CHECK(std::abs(got - oracle) < 1e-10);
}

TEST_CASE("bce rejects targets outside the unit interval") {
  Tape tape;
  Tensor logits = tape.constant({1, 2}, {0.0, 0.0});
  TargetMatrix tm{1, 2, TargetSemantics::Multilabel, {0.5, 1.5}};
  CHECK_THROWS_AS(bce_loss(tape, logits, tm), ContractError);
}

TEST_CASE("loss gradients pass finite-difference checks") {
  const std::size_t B = 3, K = 7;
  RngStream rng(37, 0, 0, 0);
  std::vector<double> z(B * K);
  for (double& v : z) v = rng.uniform(-2.0, 2.0);
  std::vector<std::uint16_t> labels(B);
  for (auto& l : labels) l = static_cast<std::uint16_t>(rng.uniform_int(K));
  MixOutcome outcome = manual_outcome({{MixMethod::Mixup, 0, 1, 0.4, 0.4, {}},
                                       {MixMethod::Mixup, 1, 2, 0.4, 0.4, {}},
                                       {MixMethod::None, 2, 2, 1.0, 1.0, {}}});

  const TargetMatrix ce_sm = build_targets(labels, outcome, K, LossKind::Ce,
                                           0.1, BceStyle::Multilabel);
  auto f_ce = [&](Tape& t, Tensor x) { return ce_loss(t, x, ce_sm); };
  CHECK(grad_check(f_ce, {B, K}, z, 1e-5) < 1e-4);

  const TargetMatrix bml = build_targets(labels, outcome, K, LossKind::Bce,
                                         0.1, BceStyle::Multilabel);
  auto f_bml = [&](Tape& t, Tensor x) { return bce_loss(t, x, bml); };
  CHECK(grad_check(f_bml, {B, K}, z, 1e-5) < 1e-4);

  const TargetMatrix bnorm = build_targets(labels, outcome, K, LossKind::Bce,
                                           0.0, BceStyle::Normalized);
  CHECK(bnorm.semantics == TargetSemantics::Distribution);
  auto f_bn = [&](Tape& t, Tensor x) { return bce_loss(t, x, bnorm); };
  CHECK(grad_check(f_bn, {B, K}, z, 1e-5) < 1e-4);
}

}  // TEST_SUITE
