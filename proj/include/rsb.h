/* SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the rsb training-recipe engine. All functions return an
 * rsb_status; on failure rsb_last_error() describes the problem for the
 * calling thread. Objects are opaque handles released with their _free
 * function. Strings returned through char** are heap-allocated and must be
 * released with rsb_string_free().
 */
#ifndef RSB_H
#define RSB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsb_status {
  RSB_OK = 0,
  RSB_ERR_CONFIG = 2,  /* bad preset/config/arguments or misuse */
  RSB_ERR_NUMERIC = 3, /* non-finite values, divergence */
  RSB_ERR_IO = 4       /* filesystem / serialization failure */
} rsb_status;

typedef struct rsb_recipe_t rsb_recipe_t;
typedef struct rsb_dataset_t rsb_dataset_t;
typedef struct rsb_report_t rsb_report_t;

/* Message for the most recent failure on this thread ("" when none). */
const char* rsb_last_error(void);
void rsb_string_free(char* s);

/* --------------------------------------------------------------------- */
/* Recipes                                                                */

/* Presets: a1 a2 a3 b c1 c2 d pytorch-baseline. */
rsb_status rsb_recipe_create(const char* preset_name, rsb_recipe_t** out);
rsb_status rsb_recipe_apply_config(rsb_recipe_t* recipe, const char* text);
rsb_status rsb_recipe_apply_config_file(rsb_recipe_t* recipe, const char* path);
rsb_status rsb_recipe_set_seed(rsb_recipe_t* recipe, uint64_t seed);
/* Fails with RSB_ERR_CONFIG listing every violated invariant. */
rsb_status rsb_recipe_validate(const rsb_recipe_t* recipe);
/* Canonical config serialization (alphabetical keys, LF endings). */
rsb_status rsb_recipe_serialize(const rsb_recipe_t* recipe, char** out_text);
void rsb_recipe_free(rsb_recipe_t* recipe);

/* --------------------------------------------------------------------- */
/* Datasets                                                               */

/* spec_text keys: num_classes, train, val, test, resolution, channels,
 * seed. Writes <stem>.train/.val/.test; regeneration is byte-identical. */
rsb_status rsb_generate_dataset(const char* spec_text, const char* out_stem);
rsb_status rsb_dataset_open(const char* stem, rsb_dataset_t** out);
void rsb_dataset_free(rsb_dataset_t* dataset);

/* --------------------------------------------------------------------- */
/* Training and evaluation                                                */

typedef struct rsb_train_options {
  int aug_workers;         /* augmentation threads; results never depend on it */
  int net_width;           /* toy network width  (0 -> 128) */
  int net_depth;           /* residual blocks    (0 -> 4)   */
  const char* weights_out; /* optional path for final weights (NULL skips) */
} rsb_train_options;

rsb_status rsb_train(const rsb_recipe_t* recipe, const rsb_dataset_t* dataset,
                     const rsb_train_options* options, rsb_report_t** out);
rsb_status rsb_report_to_tsv(const rsb_report_t* report, char** out_text);
/* All deterministic report fields as one string (wall time excluded). */
rsb_status rsb_report_fingerprint(const rsb_report_t* report, char** out_text);
rsb_status rsb_report_final_top1(const rsb_report_t* report, double* val_top1,
                                 double* test_top1);
void rsb_report_free(rsb_report_t* report);

/* Top-1 of stored weights over a split ("train"|"val"|"test") at the given
 * test resolution and crop ratio. */
rsb_status rsb_evaluate(const char* weights_path, const rsb_dataset_t* dataset,
                        const char* split, int test_res, double crop_ratio,
                        double* top1_out);

/* One "epoch<TAB>lr" line per epoch (10 significant digits, pre-noise). */
rsb_status rsb_lr_curve(const rsb_recipe_t* recipe, char** out_text);

/* Sweep seeds 1..num_seeds plus reference seed 0; per-seed table and
 * per-epoch band as TSV. */
rsb_status rsb_seed_sweep(const rsb_recipe_t* recipe,
                          const rsb_dataset_t* dataset,
                          const rsb_train_options* options, uint32_t num_seeds,
                          int jobs, char** table_out, char** band_out);

/* Per-stage augmentation statistics over up to sample_count train images
 * (0 = all); dump_path optionally stores the pre-normalization stage in the
 * dataset file format. */
rsb_status rsb_augment_stats(const rsb_recipe_t* recipe,
                             const rsb_dataset_t* dataset,
                             uint32_t sample_count, const char* dump_path,
                             char** stats_out);

#ifdef __cplusplus
}
#endif

#endif /* RSB_H */
