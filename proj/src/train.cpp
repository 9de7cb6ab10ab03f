// SPDX-License-Identifier: Apache-2.0
#include "train.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "error.hpp"
#include "mix.hpp"
#include "regularize.hpp"
#include "schedule.hpp"

namespace rsb {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_or_dash(double v) { return v < 0.0 ? "-" : fmt(v); }

// Augmentation settings resolved once per run.
struct AugPlan {
  RrcConfig rrc;
  RandAugmentConfig randaug;
  RandomErasingConfig erase;
  NormStats stats;
  bool use_randaug = false;
  bool use_erase = false;
};

AugPlan make_aug_plan(const Recipe& recipe, const Dataset& dataset) {
  AugPlan plan;
  plan.stats = compute_norm_stats(dataset.train);
  plan.rrc.target_h = plan.rrc.target_w = recipe.train_res;
  plan.randaug = randaugment_config(recipe, plan.stats.mean);
  plan.use_randaug = recipe.randaugment;
  plan.erase = erasing_config(recipe);
  plan.use_erase = recipe.erase_prob > 0.0;
  return plan;
}

// One sample through the train-time pipeline. The slot index (position in
// the epoch's index stream) keys every stage so repeated-augmentation
// repeats draw independent distortions and worker count cannot matter.
ImageBuffer augment_sample(const DatasetSplit& split, std::size_t dataset_index,
                           const AugPlan& plan, std::uint64_t seed,
                           std::uint64_t epoch, std::uint64_t slot) {
  ImageBuffer img = split.image(dataset_index);
  {
    RngStream rng(seed, epoch, slot, stream_tag::kRrc);
    img = random_resized_crop(img, plan.rrc, rng);
  }
  {
    RngStream rng(seed, epoch, slot, stream_tag::kFlip);
    img = horizontal_flip(img, rng, 0.5);
  }
  if (plan.use_randaug) {
    RngStream rng(seed, epoch, slot, stream_tag::kRandAugment);
    img = rand_augment(img, plan.randaug, rng);
  }
  img = normalize(img, plan.stats);
  if (plan.use_erase) {
    RngStream rng(seed, epoch, slot, stream_tag::kErase);
    img = random_erasing(img, plan.erase, rng);
  }
  return img;
}

// Resize a (possibly normalized) image to the network's input resolution.
ImageBuffer adapt_to_net(ImageBuffer img, std::size_t net_res) {
  if (img.height == net_res && img.width == net_res) return img;
  return resize_bilinear(img, net_res, net_res);
}

void run_parallel(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, static_cast<int>(count));
  pool.reserve(n);
  for (int t = 0; t < n; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::size_t argmax_row(const double* row, std::size_t k) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

struct EvalCache {
  std::vector<double> inputs;  // count x input_dim
  std::vector<std::uint16_t> labels;
  std::size_t count = 0;
  std::size_t input_dim = 0;
};

EvalCache build_eval_cache(const DatasetSplit& split, std::size_t test_res,
                           double crop_ratio, const NormStats& stats,
                           std::size_t net_res) {
  EvalCache cache;
  cache.count = split.count();
  cache.input_dim = net_res * net_res * split.channels;
  cache.inputs.resize(cache.count * cache.input_dim);
  cache.labels = split.labels;
  for (std::size_t i = 0; i < cache.count; ++i) {
    ImageBuffer img = adapt_to_net(
        eval_preprocess(split, i, test_res, crop_ratio, stats), net_res);
    std::copy(img.pixels.begin(), img.pixels.end(),
              cache.inputs.begin() + i * cache.input_dim);
  }
  return cache;
}

double evaluate_cached(const ToyNet& net, const EvalCache& cache) {
  const std::size_t K = net.config().num_classes;
  const std::size_t batch = 256;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < cache.count; start += batch) {
    const std::size_t n = std::min(batch, cache.count - start);
    Tape tape;
    Tensor input = tape.leaf({n, cache.input_dim},
                             cache.inputs.data() + start * cache.input_dim,
                             nullptr);
    Tensor logits = net.forward(tape, input, /*training=*/false, 0, 0, 0);
    const double* z = logits.values().data();
    for (std::size_t i = 0; i < n; ++i) {
      if (argmax_row(z + i * K, K) == cache.labels[start + i]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(cache.count);
}

}  // namespace

std::size_t crop_resize_edge(std::size_t test_res, double crop_ratio) {
  if (crop_ratio <= 0.0 || crop_ratio > 1.0) {
    throw ConfigError("crop ratio outside (0,1]");
  }
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(test_res) / crop_ratio));
}

ImageBuffer eval_preprocess(const DatasetSplit& split, std::size_t index,
                            std::size_t test_res, double crop_ratio,
                            const NormStats& stats) {
  const std::size_t edge = crop_resize_edge(test_res, crop_ratio);
  ImageBuffer img = split.image(index);
  // Square sources: the shorter side is both sides.
  img = resize_bilinear(img, edge, edge);
  const std::size_t top = (edge - test_res) / 2;
  const std::size_t left = (edge - test_res) / 2;
  img = resize_bilinear(img, top, left, test_res, test_res, test_res, test_res);
  return normalize(img, stats);
}

double evaluate(const ToyNet& net, const DatasetSplit& split,
                std::size_t test_res, double crop_ratio,
                const NormStats& stats) {
  const EvalCache cache = build_eval_cache(split, test_res, crop_ratio, stats,
                                           net.config().input_res);
  return evaluate_cached(net, cache);
}

std::string TrainReport::to_tsv() const {
  std::string out = "# epoch\ttrain_loss\tval_top1\tema_val_top1\tlr\twall_s\n";
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    const EpochRow& r = epochs[e];
    out += std::to_string(e) + '\t' + fmt(r.train_loss) + '\t' +
           fmt(r.val_top1) + '\t' + fmt_or_dash(r.ema_val_top1) + '\t' +
           fmt(r.lr) + '\t' + fmt(r.wall_seconds) + '\n';
  }
  out += "# final\ttest_top1\tema_test_top1\n";
  out += "final\t" + fmt(final_test_top1) + '\t' +
         fmt_or_dash(final_ema_test_top1) + '\n';
  return out;
}

std::string TrainReport::fingerprint() const {
  std::string out;
  for (const EpochRow& r : epochs) {
    out += fmt(r.train_loss) + '\t' + fmt(r.val_top1) + '\t' +
           fmt_or_dash(r.ema_val_top1) + '\t' + fmt(r.lr) + '\n';
  }
  out += fmt(final_test_top1) + '\t' + fmt_or_dash(final_ema_test_top1) + '\t' +
         fmt(final_val_top1) + '\n';
  return out;
}

TrainReport train(const Recipe& recipe, const Dataset& dataset,
                  std::uint64_t seed, const TrainOptions& options) {
  validate_or_throw(recipe);
  const AugPlan plan = make_aug_plan(recipe, dataset);

  ToyNetConfig net_cfg;
  net_cfg.input_res = recipe.test_res;
  net_cfg.channels = dataset.train.channels;
  net_cfg.width = options.net_width;
  net_cfg.depth = options.net_depth;
  net_cfg.num_classes = dataset.num_classes;
  net_cfg.drop_path = recipe.drop_path;
  net_cfg.dropout = recipe.dropout;
  ToyNet net(net_cfg, seed);
  const std::size_t input_dim = net.input_dim();
  const std::size_t K = net_cfg.num_classes;

  std::vector<Param*> slots = net.params();
  std::vector<Param*> agc_slots;
  for (Param* p : slots) {
    if (!p->is_bias) agc_slots.push_back(p);  // biases excluded from AGC
  }

  std::unique_ptr<Optimizer> opt;
  switch (recipe.optimizer) {
    case OptimizerKind::Lamb: {
      LambConfig cfg;
      cfg.beta1 = recipe.beta1;
      cfg.beta2 = recipe.beta2;
      cfg.eps = recipe.opt_eps;
      cfg.weight_decay = recipe.weight_decay;
      if (recipe.trust_clip > 0.0) cfg.trust_clip = recipe.trust_clip;
      opt = make_lamb(slots, cfg);
      break;
    }
    case OptimizerKind::SgdNesterov: {
      SgdConfig cfg;
      cfg.momentum = recipe.momentum;
      cfg.weight_decay = recipe.weight_decay;
      opt = make_sgd_nesterov(slots, cfg);
      break;
    }
    case OptimizerKind::RmspropTf: {
      RmspropTfConfig cfg;
      cfg.rho = recipe.rho;
      cfg.eps = recipe.opt_eps;
      cfg.momentum = recipe.momentum;
      cfg.weight_decay = recipe.weight_decay;
      opt = make_rmsprop_tf(slots, cfg);
      break;
    }
    case OptimizerKind::AdamP: {
      AdamPConfig cfg;
      cfg.beta1 = recipe.beta1;
      cfg.beta2 = recipe.beta2;
      cfg.eps = recipe.opt_eps;
      cfg.weight_decay = recipe.weight_decay;
      cfg.delta = recipe.adamp_delta;
      cfg.wd_ratio = recipe.adamp_wd_ratio;
      opt = make_adamp(slots, cfg);
      break;
    }
  }

  ScheduleConfig sched = schedule_config(recipe);
  // Tie the noise stream to the run seed so seed sweeps perturb it too.
  sched.noise.seed = recipe.noise_seed ^ seed;

  std::unique_ptr<EmaState> ema;
  if (recipe.ema) ema = std::make_unique<EmaState>(recipe.ema_decay, slots);

  RepeatedAugSampler sampler;
  sampler.dataset_size = dataset.train.count();
  sampler.batch_size = recipe.batch_size;
  sampler.repeats = recipe.repeated_aug ? recipe.ra_repeats : 1;
  sampler.seed = seed;

  const MixConfig mix_cfg = mix_config(recipe);
  AgcConfig agc_cfg{recipe.agc_lambda, recipe.agc_eps};

  const EvalCache val_cache = build_eval_cache(
      dataset.val, recipe.test_res, recipe.test_crop_ratio, plan.stats,
      net_cfg.input_res);
  const EvalCache test_cache = build_eval_cache(
      dataset.test, recipe.test_res, recipe.test_crop_ratio, plan.stats,
      net_cfg.input_res);

  const std::size_t train_dim = static_cast<std::size_t>(recipe.train_res) *
                                recipe.train_res * dataset.train.channels;

  TrainReport report;
  for (std::uint32_t epoch = 0; epoch < recipe.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::uint32_t> order = sampler.epoch_indices(epoch);
    const std::size_t num_batches =
        (order.size() + recipe.batch_size - 1) / recipe.batch_size;

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    double epoch_lr = 0.0;
    for (std::size_t batch = 0; batch < num_batches; ++batch) {
      const std::size_t begin = batch * recipe.batch_size;
      const std::size_t end =
          std::min<std::size_t>(begin + recipe.batch_size, order.size());
      const std::size_t bsz = end - begin;
      try {
        // Augment (parallel; each slot's streams depend only on its index).
        std::vector<double> pixels(bsz * train_dim);
        std::vector<std::uint16_t> labels(bsz);
        run_parallel(bsz, options.aug_workers, [&](std::size_t i) {
          const std::size_t slot = begin + i;
          const std::uint32_t idx = order[slot];
          labels[i] = dataset.train.labels[idx];
          ImageBuffer img =
              augment_sample(dataset.train, idx, plan, seed, epoch, slot);
          std::copy(img.pixels.begin(), img.pixels.end(),
                    pixels.begin() + i * train_dim);
        });

        // Mix, then adapt every output image to the network resolution.
        RngStream mix_rng(seed, epoch, batch, stream_tag::kMix);
        MixResult mixed =
            mix_batch(pixels, bsz, recipe.train_res, recipe.train_res,
                      dataset.train.channels, mix_cfg, mix_rng);
        const std::size_t out_b = mixed.batch;
        std::vector<double> input(out_b * input_dim);
        for (std::size_t i = 0; i < out_b; ++i) {
          ImageBuffer img(recipe.train_res, recipe.train_res,
                          dataset.train.channels);
          img.normalized = true;
          std::copy(mixed.pixels.begin() + i * train_dim,
                    mixed.pixels.begin() + (i + 1) * train_dim,
                    img.pixels.begin());
          img = adapt_to_net(std::move(img), net_cfg.input_res);
          std::copy(img.pixels.begin(), img.pixels.end(),
                    input.begin() + i * input_dim);
        }

        const TargetMatrix targets =
            build_targets(labels, mixed.outcome, K, recipe.loss,
                          recipe.smoothing, recipe.bce_style);

        Tape tape;
        Tensor x = tape.leaf({out_b, input_dim}, input.data(), nullptr);
        Tensor logits = net.forward(tape, x, /*training=*/true, seed, epoch,
                                    batch);
        Tensor loss = recipe.loss == LossKind::Ce
                          ? ce_loss(tape, logits, targets)
                          : bce_loss(tape, logits, targets);
        zero_grads(slots);
        tape.backward(loss);

        if (recipe.grad_clip == GradClipKind::Agc) {
          agc_clip(agc_slots, agc_cfg);
        }

        // Per-step warmup interpolation; epochs hold the schedule constant.
        const double progress =
            epoch < sched.warmup_epochs
                ? static_cast<double>(epoch) +
                      static_cast<double>(batch) / static_cast<double>(num_batches)
                : static_cast<double>(epoch);
        double lr = lr_at(sched, progress);
        lr = apply_lr_noise(sched, epoch, lr);
        epoch_lr = lr;
        opt->step(lr);
        if (ema) ema->update(slots);

        loss_sum += loss.scalar() * static_cast<double>(out_b);
        loss_count += out_b;
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(batch) + ": " + e.what());
      }
    }

    EpochRow row;
    row.train_loss =
        loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    row.val_top1 = evaluate_cached(net, val_cache);
    if (ema) {
      ema->swap_with(slots);
      row.ema_val_top1 = evaluate_cached(net, val_cache);
      ema->swap_with(slots);
    }
    row.lr = epoch_lr;
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    report.epochs.push_back(row);
  }

  // Final-checkpoint rule: the test accuracy comes from the last epoch's
  // weights, never a max over intermediate checkpoints.
  report.final_test_top1 = evaluate_cached(net, test_cache);
  report.final_val_top1 = evaluate_cached(net, val_cache);
  if (ema) {
    ema->swap_with(slots);
    report.final_ema_test_top1 = evaluate_cached(net, test_cache);
    ema->swap_with(slots);
  }

  if (!options.weights_out.empty()) {
    write_weights(net.params_vec(), options.weights_out);
    if (ema) {
      ema->swap_with(slots);
      write_weights(net.params_vec(), options.weights_out + ".ema");
      ema->swap_with(slots);
    }
  }
  return report;
}

namespace {

SweepAggregate aggregate(const std::vector<double>& xs) {
  SweepAggregate a;
  if (xs.empty()) return a;
  double sum = 0.0;
  a.min = a.max = xs[0];
  for (double x : xs) {
    sum += x;
    a.min = std::min(a.min, x);
    a.max = std::max(a.max, x);
  }
  a.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

}  // namespace

std::string SeedSweepReport::table_tsv() const {
  std::string out = "# kind\tseed\tval_top1\ttest_top1\n";
  for (const SeedRunResult& r : runs) {
    if (r.failed) {
      out += "failed\t" + std::to_string(r.seed) + "\t-\t-\n";
    } else {
      out += "per-seed\t" + std::to_string(r.seed) + '\t' + fmt(r.val_top1) +
             '\t' + fmt(r.test_top1) + '\n';
    }
  }
  if (!reference.failed) {
    out += "reference\t" + std::to_string(reference.seed) + '\t' +
           fmt(reference.val_top1) + '\t' + fmt(reference.test_top1) + '\n';
  } else {
    out += "failed\t" + std::to_string(reference.seed) + "\t-\t-\n";
  }
  out += "mean\t-\t" + fmt(val.mean) + '\t' + fmt(test.mean) + '\n';
  out += "std\t-\t" + fmt(val.stddev) + '\t' + fmt(test.stddev) + '\n';
  out += "min\t-\t" + fmt(val.min) + '\t' + fmt(test.min) + '\n';
  out += "max\t-\t" + fmt(val.max) + '\t' + fmt(test.max) + '\n';
  return out;
}

std::string SeedSweepReport::band_tsv() const {
  std::string out = "# epoch\tval_mean\tval_std\tval_min\tval_max\n";
  for (std::size_t e = 0; e < epoch_band.size(); ++e) {
    const SweepAggregate& a = epoch_band[e];
    out += std::to_string(e) + '\t' + fmt(a.mean) + '\t' + fmt(a.stddev) +
           '\t' + fmt(a.min) + '\t' + fmt(a.max) + '\n';
  }
  return out;
}

SeedSweepReport seed_sweep(const Recipe& recipe, const Dataset& dataset,
                           const std::vector<std::uint64_t>& sweep_seeds,
                           std::uint64_t reference_seed, int jobs,
                           const TrainOptions& options) {
  if (sweep_seeds.size() < 2) {
    throw ConfigError("seed_sweep: need at least 2 seeds");
  }
  SeedSweepReport report;
  report.runs.resize(sweep_seeds.size());

  auto run_one = [&](SeedRunResult& slot, std::uint64_t seed) {
    slot.seed = seed;
    try {
      TrainOptions opts = options;
      opts.weights_out.clear();
      const TrainReport r = train(recipe, dataset, seed, opts);
      slot.val_top1 = r.final_val_top1;
      slot.test_top1 = r.final_test_top1;
      slot.val_curve.reserve(r.epochs.size());
      for (const EpochRow& row : r.epochs) slot.val_curve.push_back(row.val_top1);
    } catch (const std::exception& e) {
      slot.failed = true;
      slot.error = e.what();
    }
  };

  // Reference run plus sweep runs, all independent; thread pool over them.
  run_parallel(sweep_seeds.size() + 1, jobs, [&](std::size_t i) {
    if (i == 0) {
      run_one(report.reference, reference_seed);
    } else {
      run_one(report.runs[i - 1], sweep_seeds[i - 1]);
    }
  });

  std::vector<double> vals, tests;
  std::size_t max_epochs = 0;
  for (const SeedRunResult& r : report.runs) {
    if (r.failed) continue;
    vals.push_back(r.val_top1);
    tests.push_back(r.test_top1);
    max_epochs = std::max(max_epochs, r.val_curve.size());
  }
  report.val = aggregate(vals);
  report.test = aggregate(tests);
  for (std::size_t e = 0; e < max_epochs; ++e) {
    std::vector<double> at_epoch;
    for (const SeedRunResult& r : report.runs) {
      if (!r.failed && e < r.val_curve.size()) at_epoch.push_back(r.val_curve[e]);
    }
    report.epoch_band.push_back(aggregate(at_epoch));
  }
  return report;
}

std::string augment_stats_report(const Recipe& recipe, const Dataset& dataset,
                                 std::size_t max_samples,
                                 const std::string& dump_path) {
  validate_or_throw(recipe);
  const AugPlan plan = make_aug_plan(recipe, dataset);
  const std::size_t count = std::min<std::size_t>(
      max_samples == 0 ? dataset.train.count() : max_samples,
      dataset.train.count());
  if (count == 0) throw ConfigError("augment: empty train split");

  struct Acc {
    double sum = 0.0, sumsq = 0.0;
    double min = 1e300, max = -1e300;
    std::size_t n = 0;
    void add(const ImageBuffer& img) {
      for (double v : img.pixels) {
        sum += v;
        sumsq += v * v;
        min = std::min(min, v);
        max = std::max(max, v);
      }
      n += img.pixels.size();
    }
    std::string row(const std::string& name) const {
      const double mean = sum / static_cast<double>(n);
      const double var = sumsq / static_cast<double>(n) - mean * mean;
      return name + '\t' + fmt(mean) + '\t' + fmt(std::sqrt(std::max(var, 0.0))) +
             '\t' + fmt(min) + '\t' + fmt(max) + '\n';
    }
  };
  Acc source, rrc, flip, randaug, norm, erase;

  DatasetSplit dump;
  dump.height = dump.width = static_cast<std::uint16_t>(recipe.train_res);
  dump.channels = dataset.train.channels;

  const std::uint64_t seed = recipe.seed;
  for (std::size_t i = 0; i < count; ++i) {
    ImageBuffer img = dataset.train.image(i);
    source.add(img);
    {
      RngStream rng(seed, 0, i, stream_tag::kRrc);
      img = random_resized_crop(img, plan.rrc, rng);
    }
    rrc.add(img);
    {
      RngStream rng(seed, 0, i, stream_tag::kFlip);
      img = horizontal_flip(img, rng, 0.5);
    }
    flip.add(img);
    if (plan.use_randaug) {
      RngStream rng(seed, 0, i, stream_tag::kRandAugment);
      img = rand_augment(img, plan.randaug, rng);
      randaug.add(img);
    }
    if (!dump_path.empty()) {
      for (double v : img.pixels) {
        dump.pixels.push_back(static_cast<std::uint8_t>(
            std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
      }
      dump.labels.push_back(dataset.train.labels[i]);
    }
    img = normalize(img, plan.stats);
    norm.add(img);
    if (plan.use_erase) {
      RngStream rng(seed, 0, i, stream_tag::kErase);
      img = random_erasing(img, plan.erase, rng);
      erase.add(img);
    }
  }

  if (!dump_path.empty()) write_split(dump, dump_path);

  std::string out = "# stage\tmean\tstd\tmin\tmax\n";
  out += source.row("source");
  out += rrc.row("rrc");
  out += flip.row("flip");
  if (plan.use_randaug) out += randaug.row("randaugment");
  out += norm.row("normalize");
  if (plan.use_erase) out += erase.row("random_erasing");
  return out;
}

}  // namespace rsb
