// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "net.hpp"
#include "recipe.hpp"

namespace rsb {

struct TrainOptions {
  int aug_workers = 1;        // augmentation parallelism (never changes results)
  std::size_t net_width = 128;
  std::size_t net_depth = 4;
  std::string weights_out;    // final weights ("" skips); EMA adds ".ema"
};

struct EpochRow {
  double train_loss = 0.0;
  double val_top1 = 0.0;
  double ema_val_top1 = -1.0;  // < 0 when EMA is off
  double lr = 0.0;
  double wall_seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  double final_test_top1 = 0.0;
  double final_ema_test_top1 = -1.0;
  double final_val_top1 = 0.0;

  std::string to_tsv() const;
  /// Every deterministic field as one string (wall time excluded); two runs
  /// of the same (recipe, data, seed) must agree bitwise.
  std::string fingerprint() const;
};

/// Shorter-side size before the center crop: round(test_res / crop_ratio).
std::size_t crop_resize_edge(std::size_t test_res, double crop_ratio);

/// Deterministic eval preprocessing: resize the shorter side to
/// round(test_res/crop_ratio), center-crop test_res, normalize.
ImageBuffer eval_preprocess(const DatasetSplit& split, std::size_t index,
                            std::size_t test_res, double crop_ratio,
                            const NormStats& stats);

/// Top-1 accuracy of the network over a split at the given test settings.
double evaluate(const ToyNet& net, const DatasetSplit& split,
                std::size_t test_res, double crop_ratio,
                const NormStats& stats);

/// Full recipe training run. Bitwise deterministic for a fixed
/// (recipe, dataset, seed) regardless of aug_workers.
TrainReport train(const Recipe& recipe, const Dataset& dataset,
                  std::uint64_t seed, const TrainOptions& options);

struct SeedRunResult {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double val_top1 = 0.0;
  double test_top1 = 0.0;
  std::vector<double> val_curve;  // per-epoch val top-1
};

struct SweepAggregate {
  double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0;
};

struct SeedSweepReport {
  std::vector<SeedRunResult> runs;  // sweep seeds, in seed order
  SeedRunResult reference;          // the reference seed (0 by convention)
  SweepAggregate val, test;         // over successful sweep runs
  // Per-epoch val top-1 statistics across sweep seeds.
  std::vector<SweepAggregate> epoch_band;

  std::string table_tsv() const;  // per-seed rows + aggregate rows
  std::string band_tsv() const;   // per-epoch mean/std/min/max
};

/// Trains one run per sweep seed (plus the reference seed), in parallel over
/// `jobs` threads; failures are recorded, not fatal.
SeedSweepReport seed_sweep(const Recipe& recipe, const Dataset& dataset,
                           const std::vector<std::uint64_t>& sweep_seeds,
                           std::uint64_t reference_seed, int jobs,
                           const TrainOptions& options);

/// Per-stage pixel statistics (mean/std/min/max) of the train-time
/// augmentation pipeline over up to max_samples images; optionally dumps
/// the stage right before normalization as a split file.
std::string augment_stats_report(const Recipe& recipe, const Dataset& dataset,
                                 std::size_t max_samples,
                                 const std::string& dump_path);

}  // namespace rsb
