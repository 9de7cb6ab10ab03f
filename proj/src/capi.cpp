// SPDX-License-Identifier: Apache-2.0
#include "rsb.h"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "dataset.hpp"
#include "error.hpp"
#include "recipe.hpp"
#include "schedule.hpp"
#include "train.hpp"

struct rsb_recipe_t {
  rsb::Recipe recipe;
};
struct rsb_dataset_t {
  rsb::Dataset dataset;
};
struct rsb_report_t {
  rsb::TrainReport report;
};

namespace {

thread_local std::string g_last_error;

rsb_status fail(rsb_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
rsb_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RSB_OK;
  } catch (const rsb::NumericError& e) {
    return fail(RSB_ERR_NUMERIC, e.what());
  } catch (const rsb::IoError& e) {
    return fail(RSB_ERR_IO, e.what());
  } catch (const rsb::ConfigError& e) {
    return fail(RSB_ERR_CONFIG, e.what());
  } catch (const rsb::ContractError& e) {
    return fail(RSB_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(RSB_ERR_CONFIG, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rsb::TrainOptions to_options(const rsb_train_options* options) {
  rsb::TrainOptions opts;
  if (options != nullptr) {
    if (options->aug_workers > 0) opts.aug_workers = options->aug_workers;
    if (options->net_width > 0) opts.net_width = options->net_width;
    if (options->net_depth > 0) opts.net_depth = options->net_depth;
    if (options->weights_out != nullptr) opts.weights_out = options->weights_out;
  }
  return opts;
}

std::string format_lr_curve(const rsb::Recipe& recipe) {
  const rsb::ScheduleConfig sched = rsb::schedule_config(recipe);
  std::string out = "# epoch\tlr\n";
  char buf[64];
  for (std::uint32_t e = 0; e < recipe.epochs; ++e) {
    const double lr = rsb::lr_at(sched, static_cast<double>(e));
    const int len = std::snprintf(buf, sizeof(buf), "%.10g", lr);
    out += std::to_string(e);
    out += '\t';
    out.append(buf, len);
    out += '\n';
  }
  return out;
}

}  // namespace

extern "C" {

const char* rsb_last_error(void) { return g_last_error.c_str(); }

void rsb_string_free(char* s) { delete[] s; }

rsb_status rsb_recipe_create(const char* preset_name, rsb_recipe_t** out) {
  return guarded([&] {
    if (preset_name == nullptr || out == nullptr) {
      throw rsb::ConfigError("rsb_recipe_create: null argument");
    }
    *out = new rsb_recipe_t{rsb::preset(preset_name)};
  });
}

rsb_status rsb_recipe_apply_config(rsb_recipe_t* recipe, const char* text) {
  return guarded([&] {
    if (recipe == nullptr || text == nullptr) {
      throw rsb::ConfigError("rsb_recipe_apply_config: null argument");
    }
    rsb::apply_config(recipe->recipe, text);
  });
}

rsb_status rsb_recipe_apply_config_file(rsb_recipe_t* recipe,
                                        const char* path) {
  return guarded([&] {
    if (recipe == nullptr || path == nullptr) {
      throw rsb::ConfigError("rsb_recipe_apply_config_file: null argument");
    }
    std::ifstream in(path);
    if (!in) throw rsb::IoError(std::string("cannot open '") + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    rsb::apply_config(recipe->recipe, text.str());
  });
}

rsb_status rsb_recipe_set_seed(rsb_recipe_t* recipe, uint64_t seed) {
  return guarded([&] {
    if (recipe == nullptr) throw rsb::ConfigError("null recipe");
    recipe->recipe.seed = seed;
  });
}

rsb_status rsb_recipe_validate(const rsb_recipe_t* recipe) {
  return guarded([&] {
    if (recipe == nullptr) throw rsb::ConfigError("null recipe");
    rsb::validate_or_throw(recipe->recipe);
  });
}

rsb_status rsb_recipe_serialize(const rsb_recipe_t* recipe, char** out_text) {
  return guarded([&] {
    if (recipe == nullptr || out_text == nullptr) {
      throw rsb::ConfigError("rsb_recipe_serialize: null argument");
    }
    *out_text = dup_string(rsb::serialize(recipe->recipe));
  });
}

void rsb_recipe_free(rsb_recipe_t* recipe) { delete recipe; }

rsb_status rsb_generate_dataset(const char* spec_text, const char* out_stem) {
  return guarded([&] {
    if (spec_text == nullptr || out_stem == nullptr) {
      throw rsb::ConfigError("rsb_generate_dataset: null argument");
    }
    rsb::generate_dataset_files(rsb::parse_dataset_spec(spec_text), out_stem);
  });
}

rsb_status rsb_dataset_open(const char* stem, rsb_dataset_t** out) {
  return guarded([&] {
    if (stem == nullptr || out == nullptr) {
      throw rsb::ConfigError("rsb_dataset_open: null argument");
    }
    *out = new rsb_dataset_t{rsb::open_dataset(stem)};
  });
}

void rsb_dataset_free(rsb_dataset_t* dataset) { delete dataset; }

rsb_status rsb_train(const rsb_recipe_t* recipe, const rsb_dataset_t* dataset,
                     const rsb_train_options* options, rsb_report_t** out) {
  return guarded([&] {
    if (recipe == nullptr || dataset == nullptr || out == nullptr) {
      throw rsb::ConfigError("rsb_train: null argument");
    }
    *out = new rsb_report_t{rsb::train(recipe->recipe, dataset->dataset,
                                       recipe->recipe.seed,
                                       to_options(options))};
  });
}

rsb_status rsb_report_to_tsv(const rsb_report_t* report, char** out_text) {
  return guarded([&] {
    if (report == nullptr || out_text == nullptr) {
      throw rsb::ConfigError("rsb_report_to_tsv: null argument");
    }
    *out_text = dup_string(report->report.to_tsv());
  });
}

rsb_status rsb_report_fingerprint(const rsb_report_t* report,
                                  char** out_text) {
  return guarded([&] {
    if (report == nullptr || out_text == nullptr) {
      throw rsb::ConfigError("rsb_report_fingerprint: null argument");
    }
    *out_text = dup_string(report->report.fingerprint());
  });
}

rsb_status rsb_report_final_top1(const rsb_report_t* report, double* val_top1,
                                 double* test_top1) {
  return guarded([&] {
    if (report == nullptr) throw rsb::ConfigError("null report");
    if (val_top1 != nullptr) *val_top1 = report->report.final_val_top1;
    if (test_top1 != nullptr) *test_top1 = report->report.final_test_top1;
  });
}

void rsb_report_free(rsb_report_t* report) { delete report; }

rsb_status rsb_evaluate(const char* weights_path, const rsb_dataset_t* dataset,
                        const char* split, int test_res, double crop_ratio,
                        double* top1_out) {
  return guarded([&] {
    if (weights_path == nullptr || dataset == nullptr || split == nullptr ||
        top1_out == nullptr) {
      throw rsb::ConfigError("rsb_evaluate: null argument");
    }
    const rsb::ToyNet net(rsb::read_weights(weights_path));
    const rsb::Dataset& ds = dataset->dataset;
    const rsb::DatasetSplit* s = nullptr;
    if (std::strcmp(split, "train") == 0) {
      s = &ds.train;
    } else if (std::strcmp(split, "val") == 0) {
      s = &ds.val;
    } else if (std::strcmp(split, "test") == 0) {
      s = &ds.test;
    } else {
      throw rsb::ConfigError(std::string("unknown split '") + split + "'");
    }
    if (test_res <= 0) throw rsb::ConfigError("test_res must be positive");
    *top1_out = rsb::evaluate(net, *s, static_cast<std::size_t>(test_res),
                              crop_ratio, rsb::compute_norm_stats(ds.train));
  });
}

rsb_status rsb_lr_curve(const rsb_recipe_t* recipe, char** out_text) {
  return guarded([&] {
    if (recipe == nullptr || out_text == nullptr) {
      throw rsb::ConfigError("rsb_lr_curve: null argument");
    }
    *out_text = dup_string(format_lr_curve(recipe->recipe));
  });
}

rsb_status rsb_seed_sweep(const rsb_recipe_t* recipe,
                          const rsb_dataset_t* dataset,
                          const rsb_train_options* options, uint32_t num_seeds,
                          int jobs, char** table_out, char** band_out) {
  return guarded([&] {
    if (recipe == nullptr || dataset == nullptr || table_out == nullptr ||
        band_out == nullptr) {
      throw rsb::ConfigError("rsb_seed_sweep: null argument");
    }
    std::vector<std::uint64_t> seeds;
    for (std::uint32_t s = 1; s <= num_seeds; ++s) seeds.push_back(s);
    const rsb::SeedSweepReport report =
        rsb::seed_sweep(recipe->recipe, dataset->dataset, seeds,
                        /*reference_seed=*/0, jobs <= 0 ? 1 : jobs,
                        to_options(options));
    *table_out = dup_string(report.table_tsv());
    *band_out = dup_string(report.band_tsv());
  });
}

rsb_status rsb_augment_stats(const rsb_recipe_t* recipe,
                             const rsb_dataset_t* dataset,
                             uint32_t sample_count, const char* dump_path,
                             char** stats_out) {
  return guarded([&] {
    if (recipe == nullptr || dataset == nullptr || stats_out == nullptr) {
      throw rsb::ConfigError("rsb_augment_stats: null argument");
    }
    *stats_out = dup_string(rsb::augment_stats_report(
        recipe->recipe, dataset->dataset, sample_count,
        dump_path == nullptr ? "" : dump_path));
  });
}

}  // extern "C"
