// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the rsb training-recipe engine. Talks to the
// shared library exclusively through the C API in rsb.h.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rsb.h"

namespace {

int report_failure(rsb_status status) {
  std::cerr << "error: " << rsb_last_error() << "\n";
  return static_cast<int>(status);
}

bool write_text(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

// RAII helpers over the opaque C handles.
struct Recipe {
  rsb_recipe_t* ptr = nullptr;
  ~Recipe() { rsb_recipe_free(ptr); }
};
struct DatasetHandle {
  rsb_dataset_t* ptr = nullptr;
  ~DatasetHandle() { rsb_dataset_free(ptr); }
};
struct ReportHandle {
  rsb_report_t* ptr = nullptr;
  ~ReportHandle() { rsb_report_free(ptr); }
};
struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { rsb_string_free(ptr); }
};

int load_recipe(const std::string& name, const std::string& config_path,
                Recipe& recipe) {
  rsb_status st = rsb_recipe_create(name.c_str(), &recipe.ptr);
  if (st != RSB_OK) return report_failure(st);
  if (!config_path.empty()) {
    st = rsb_recipe_apply_config_file(recipe.ptr, config_path.c_str());
    if (st != RSB_OK) return report_failure(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsb - deterministic training-recipe engine"};
  app.require_subcommand(1);

  // gen-data ---------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string gen_spec, gen_out;
  gen->add_option("--spec", gen_spec, "Dataset spec file")->required();
  gen->add_option("--out", gen_out, "Output stem (<stem>.train/.val/.test)")
      ->required();

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a recipe on a dataset");
  std::string tr_recipe, tr_data, tr_config, tr_out, tr_weights;
  std::uint64_t tr_seed = 0;
  int tr_workers = 1, tr_width = 128, tr_depth = 4;
  train->add_option("--recipe", tr_recipe, "Preset name")->required();
  train->add_option("--data", tr_data, "Dataset stem")->required();
  train->add_option("--config", tr_config, "Override config file");
  train->add_option("--seed", tr_seed, "Training seed");
  train->add_option("--out", tr_out, "Report TSV path (default stdout)");
  train->add_option("--weights-out", tr_weights, "Final weights path");
  train->add_option("--aug-workers", tr_workers, "Augmentation threads");
  train->add_option("--width", tr_width, "Toy network width");
  train->add_option("--depth", tr_depth, "Toy network depth");

  // eval -------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Evaluate stored weights");
  std::string ev_weights, ev_data, ev_split = "test";
  int ev_res = 32;
  double ev_ratio = 0.95;
  eval->add_option("--weights", ev_weights, "Weights file")->required();
  eval->add_option("--data", ev_data, "Dataset stem")->required();
  eval->add_option("--res", ev_res, "Test resolution")->required();
  eval->add_option("--crop-ratio", ev_ratio, "Test crop ratio")->required();
  eval->add_option("--split", ev_split, "Split: train|val|test");

  // seed-sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand("seed-sweep", "Train over multiple seeds");
  std::string sw_recipe, sw_data, sw_config, sw_out;
  std::uint32_t sw_seeds = 10;
  int sw_jobs = 1, sw_workers = 1, sw_width = 128, sw_depth = 4;
  sweep->add_option("--recipe", sw_recipe, "Preset name")->required();
  sweep->add_option("--data", sw_data, "Dataset stem")->required();
  sweep->add_option("--seeds", sw_seeds, "Number of sweep seeds (1..N)")
      ->required();
  sweep->add_option("--jobs", sw_jobs, "Parallel training runs");
  sweep->add_option("--config", sw_config, "Override config file");
  sweep->add_option("--out", sw_out,
                    "Output prefix (<prefix>.sweep.tsv, <prefix>.band.tsv)");
  sweep->add_option("--aug-workers", sw_workers, "Augmentation threads");
  sweep->add_option("--width", sw_width, "Toy network width");
  sweep->add_option("--depth", sw_depth, "Toy network depth");

  // lr-curve -----------------------------------------------------------------
  auto* curve = app.add_subcommand("lr-curve", "Print the epoch/lr schedule");
  std::string lc_recipe, lc_config, lc_out;
  curve->add_option("--recipe", lc_recipe, "Preset name")->required();
  curve->add_option("--config", lc_config, "Override config file");
  curve->add_option("--out", lc_out, "Output path (default stdout)");

  // augment ------------------------------------------------------------------
  auto* augment = app.add_subcommand("augment", "Augmentation statistics");
  std::string ag_recipe, ag_data, ag_config, ag_stats, ag_dump;
  std::uint32_t ag_count = 0;
  augment->add_option("--recipe", ag_recipe, "Preset name")->required();
  augment->add_option("--data", ag_data, "Dataset stem")->required();
  augment->add_option("--stats", ag_stats, "Stats report path")->required();
  augment->add_option("--config", ag_config, "Override config file");
  augment->add_option("--count", ag_count, "Sample count (0 = all)");
  augment->add_option("--dump", ag_dump, "Dump augmented images to this path");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    std::ifstream in(gen_spec);
    if (!in) {
      std::cerr << "error: cannot open '" << gen_spec << "'\n";
      return static_cast<int>(RSB_ERR_IO);
    }
    std::ostringstream text;
    text << in.rdbuf();
    const rsb_status st =
        rsb_generate_dataset(text.str().c_str(), gen_out.c_str());
    if (st != RSB_OK) return report_failure(st);
    return 0;
  }

  if (*train) {
    Recipe recipe;
    if (int rc = load_recipe(tr_recipe, tr_config, recipe); rc != 0) return rc;
    rsb_status st = rsb_recipe_set_seed(recipe.ptr, tr_seed);
    if (st != RSB_OK) return report_failure(st);
    DatasetHandle data;
    st = rsb_dataset_open(tr_data.c_str(), &data.ptr);
    if (st != RSB_OK) return report_failure(st);
    rsb_train_options opts{tr_workers, tr_width, tr_depth,
                           tr_weights.empty() ? nullptr : tr_weights.c_str()};
    ReportHandle report;
    st = rsb_train(recipe.ptr, data.ptr, &opts, &report.ptr);
    if (st != RSB_OK) return report_failure(st);
    OwnedString tsv;
    st = rsb_report_to_tsv(report.ptr, &tsv.ptr);
    if (st != RSB_OK) return report_failure(st);
    if (tr_out.empty()) {
      std::cout << tsv.ptr;
    } else if (!write_text(tr_out, tsv.ptr)) {
      std::cerr << "error: cannot write '" << tr_out << "'\n";
      return static_cast<int>(RSB_ERR_IO);
    }
    return 0;
  }

  if (*eval) {
    DatasetHandle data;
    rsb_status st = rsb_dataset_open(ev_data.c_str(), &data.ptr);
    if (st != RSB_OK) return report_failure(st);
    double top1 = 0.0;
    st = rsb_evaluate(ev_weights.c_str(), data.ptr, ev_split.c_str(), ev_res,
                      ev_ratio, &top1);
    if (st != RSB_OK) return report_failure(st);
    std::printf("# split\tres\tcrop_ratio\ttop1\n");
    std::printf("%s\t%d\t%g\t%.6f\n", ev_split.c_str(), ev_res, ev_ratio, top1);
    return 0;
  }

  if (*sweep) {
    Recipe recipe;
    if (int rc = load_recipe(sw_recipe, sw_config, recipe); rc != 0) return rc;
    DatasetHandle data;
    rsb_status st = rsb_dataset_open(sw_data.c_str(), &data.ptr);
    if (st != RSB_OK) return report_failure(st);
    rsb_train_options opts{sw_workers, sw_width, sw_depth, nullptr};
    OwnedString table, band;
    st = rsb_seed_sweep(recipe.ptr, data.ptr, &opts, sw_seeds, sw_jobs,
                        &table.ptr, &band.ptr);
    if (st != RSB_OK) return report_failure(st);
    if (sw_out.empty()) {
      std::cout << table.ptr << "\n" << band.ptr;
    } else if (!write_text(sw_out + ".sweep.tsv", table.ptr) ||
               !write_text(sw_out + ".band.tsv", band.ptr)) {
      std::cerr << "error: cannot write under prefix '" << sw_out << "'\n";
      return static_cast<int>(RSB_ERR_IO);
    }
    return 0;
  }

  if (*curve) {
    Recipe recipe;
    if (int rc = load_recipe(lc_recipe, lc_config, recipe); rc != 0) return rc;
    OwnedString text;
    const rsb_status st = rsb_lr_curve(recipe.ptr, &text.ptr);
    if (st != RSB_OK) return report_failure(st);
    if (lc_out.empty()) {
      std::cout << text.ptr;
    } else if (!write_text(lc_out, text.ptr)) {
      std::cerr << "error: cannot write '" << lc_out << "'\n";
      return static_cast<int>(RSB_ERR_IO);
    }
    return 0;
  }

  if (*augment) {
    Recipe recipe;
    if (int rc = load_recipe(ag_recipe, ag_config, recipe); rc != 0) return rc;
    DatasetHandle data;
    rsb_status st = rsb_dataset_open(ag_data.c_str(), &data.ptr);
    if (st != RSB_OK) return report_failure(st);
    OwnedString stats;
    st = rsb_augment_stats(recipe.ptr, data.ptr, ag_count,
                           ag_dump.empty() ? nullptr : ag_dump.c_str(),
                           &stats.ptr);
    if (st != RSB_OK) return report_failure(st);
    if (!write_text(ag_stats, stats.ptr)) {
      std::cerr << "error: cannot write '" << ag_stats << "'\n";
      return static_cast<int>(RSB_ERR_IO);
    }
    return 0;
  }

  return 0;
}
