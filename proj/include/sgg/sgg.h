/* Copyright 2026 The sgg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SGG_SGG_H_
#define SGG_SGG_H_

/* C interface of the scene-graph library.
 *
 * Every fallible call returns an sgg_status. On failure the thread-local
 * message returned by sgg_last_error_message() describes the problem.
 * Strings handed out through char** parameters are owned by the caller and
 * released with sgg_string_free(). Handles are released with their _free
 * function; passing NULL to a _free function is a no-op.
 *
 * Functions taking `config_json` accept a JSON object overlaid on the
 * built-in defaults (see sgg_config_effective); NULL means defaults only.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(SGG_BUILDING_LIBRARY)
#define SGG_API __attribute__((visibility("default")))
#else
#define SGG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SGG_OK = 0,
  SGG_ERR_INVALID_ARGUMENT = 1,
  SGG_ERR_DIMENSION = 2,
  SGG_ERR_DOMAIN = 3,
  SGG_ERR_RANGE = 4,
  SGG_ERR_DATA = 5,
  SGG_ERR_CONFIG = 6,
  SGG_ERR_NUMERICAL = 7,
  SGG_ERR_IO = 8,
  SGG_ERR_INTERNAL = 9,
} sgg_status;

typedef struct sgg_corpus sgg_corpus;
typedef struct sgg_model sgg_model;

SGG_API const char* sgg_version(void);
SGG_API const char* sgg_status_name(sgg_status status);
SGG_API const char* sgg_last_error_message(void);
SGG_API void sgg_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

/* Defaults, overlaid by `overlay_json` (may be NULL), overlaid by
 * "section.key=value" assignments. Writes the validated result. */
SGG_API sgg_status sgg_config_effective(const char* overlay_json, const char* const* assignments,
                                        size_t num_assignments, char** out_json);

/* ---- corpora ---------------------------------------------------------- */

/* Synthetic corpus from the "gen" section and "seed". */
SGG_API sgg_status sgg_corpus_generate(const char* config_json, sgg_corpus** out);
SGG_API sgg_status sgg_corpus_read(const char* dir, sgg_corpus** out);
SGG_API sgg_status sgg_corpus_write(const sgg_corpus* corpus, const char* dir);
SGG_API size_t sgg_corpus_size(const sgg_corpus* corpus);
/* {"images", "triplets", "nodes", "predicate_histogram", "predicate_names", ...} */
SGG_API sgg_status sgg_corpus_stats(const sgg_corpus* corpus, char** out_json);
/* Deterministic shuffle split; round(fraction * N) images go to `out_train`. */
SGG_API sgg_status sgg_corpus_split(const sgg_corpus* corpus, double train_fraction,
                                    uint64_t seed, sgg_corpus** out_train,
                                    sgg_corpus** out_test);
/* Split using the config's "train_fraction" and "seed". */
SGG_API sgg_status sgg_corpus_split_config(const sgg_corpus* corpus, const char* config_json,
                                           sgg_corpus** out_train, sgg_corpus** out_test);
SGG_API void sgg_corpus_free(sgg_corpus* corpus);

/* Frequency prior of the corpus as JSON (counts and probabilities). */
SGG_API sgg_status sgg_prior_write(const sgg_corpus* corpus, const char* path);

/* ---- models ----------------------------------------------------------- */

/* Fresh weights sized for `corpus`, using the "model" section and "seed". */
SGG_API sgg_status sgg_model_init(const char* config_json, const sgg_corpus* corpus,
                                  sgg_model** out);
SGG_API sgg_status sgg_model_read(const char* path, sgg_model** out);
SGG_API sgg_status sgg_model_write(const sgg_model* model, const char* path);
SGG_API void sgg_model_free(sgg_model* model);

/* ---- training --------------------------------------------------------- */

typedef void (*sgg_epoch_callback)(void* user_data, size_t epoch, double obj_loss,
                                   double rel_loss, double total);

/* Trains `model` in place on every image of `train` ("train" section).
 * Writes the loss curve CSV when `loss_csv_path` is not NULL. */
SGG_API sgg_status sgg_train(sgg_model* model, const sgg_corpus* train, const char* config_json,
                             const char* loss_csv_path, sgg_epoch_callback callback,
                             void* user_data, char** out_summary_json);

/* ---- evaluation ------------------------------------------------------- */

/* Predicts `eval_corpus` with priors counted on `prior_corpus` and scores the
 * predictions ("eval" section). `predictions_path` may be NULL. */
SGG_API sgg_status sgg_evaluate(const sgg_model* model, const sgg_corpus* prior_corpus,
                                const sgg_corpus* eval_corpus, const char* config_json,
                                const char* predictions_path, char** out_report_json,
                                char** out_report_text);

/* Scores a predictions JSONL file against the ground truth of `gt`. */
SGG_API sgg_status sgg_evaluate_predictions(const char* predictions_path, const sgg_corpus* gt,
                                            const char* config_json, char** out_report_json,
                                            char** out_report_text);

/* ---- diagnostics ------------------------------------------------------ */

/* Runs the finite-difference suite ("gradcheck" section). `out_all_passed`
 * receives 1 when every check passes. A failing check is not an error. */
SGG_API sgg_status sgg_gradcheck(const char* config_json, char** out_report_json,
                                 char** out_report_text, int* out_all_passed);

/* Writes gcmp.csv, sgcmp.csv, sgcmp_scores.csv and dmp.csv for one image.
 * DMP uses `model` (or seeded weights when NULL); the global-context variants
 * always use seeded weights. */
SGG_API sgg_status sgg_attention(const sgg_model* model, const sgg_corpus* corpus,
                                 const char* image_id, const char* out_dir,
                                 const char* config_json, char** out_json);

/* ---- scalar helpers --------------------------------------------------- */

SGG_API sgg_status sgg_gamma_map(double theta, double mu, double* out);
SGG_API double sgg_score_wtd(double r50, double wmap_rel, double wmap_phr);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* SGG_SGG_H_ */
