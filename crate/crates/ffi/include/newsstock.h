#ifndef NEWSSTOCK_H
#define NEWSSTOCK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsModelKind {
  NS_MODEL_KIND_GP = 0,
  NS_MODEL_KIND_LR = 1,
  NS_MODEL_KIND_MLP = 2,
  NS_MODEL_KIND_SMO_REG = 3,
  NS_MODEL_KIND_RF = 4,
} NsModelKind;

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_UTF8 = 2,
  NS_STATUS_INVALID_ARGUMENT = 3,
  NS_STATUS_IO = 4,
  NS_STATUS_PARSE = 5,
  NS_STATUS_MODEL = 6,
  /**
   * The result is mathematically undefined, e.g. a zero-variance correlation.
   */
  NS_STATUS_UNDEFINED = 7,
  NS_STATUS_CONFIG = 8,
  NS_STATUS_PIPELINE = 9,
  NS_STATUS_PANIC = 10,
} NsStatus;

/**
 * Opaque sentiment lexicon.
 */
typedef struct NsLexicon NsLexicon;

/**
 * Opaque trained model.
 */
typedef struct NsModel NsModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *ns_last_error(void);

/**
 * Library version as a static string.
 */
const char *ns_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ns_string_free(char *s);

/**
 * Edit distance between two UTF-8 strings, counted in Unicode scalar values.
 *
 * # Safety
 * `a` and `b` must be nul-terminated strings; `out` must be writable.
 */
enum NsStatus ns_levenshtein(const char *a, const char *b, size_t *out);

/**
 * `1 - levenshtein / max(len)`.
 *
 * # Safety
 * As [`ns_levenshtein`].
 */
enum NsStatus ns_title_similarity(const char *a, const char *b, double *out);

/**
 * Lowercases and strips markup, URLs and punctuation. The result must be
 * released with [`ns_string_free`].
 *
 * # Safety
 * `raw` must be a nul-terminated string; `out` must be writable.
 */
enum NsStatus ns_clean_text(const char *raw, char **out);

/**
 * The bundled opinion lexicon.
 *
 * # Safety
 * `out` must be writable.
 */
enum NsStatus ns_lexicon_bundled(struct NsLexicon **out);

/**
 * Loads a lexicon from positive and negative word-list files.
 *
 * # Safety
 * Paths must be nul-terminated strings; `out` must be writable.
 */
enum NsStatus ns_lexicon_from_files(const char *positive,
                                    const char *negative,
                                    struct NsLexicon **out);

/**
 * `#positive - #negative` over the whitespace-separated words of `text`.
 *
 * # Safety
 * `lex` must be a live handle, `text` a nul-terminated string, `out` writable.
 */
enum NsStatus ns_lexicon_score(const struct NsLexicon *lex, const char *text, int64_t *out);

/**
 * # Safety
 * `lex` must come from this library and not be freed twice. Null is ignored.
 */
void ns_lexicon_free(struct NsLexicon *lex);

/**
 * Percent change from `prev` to `cur`; a zero `prev` divides by one.
 */
double ns_change_rate(double prev, double cur);

/**
 * Min-max normalization of `len` values to `[-1, 1]`, written to `out`
 * (which may alias `values`).
 *
 * # Safety
 * `values` and `out` must each hold `len` doubles.
 */
enum NsStatus ns_normalize_series(const double *values, size_t len, double *out);

/**
 * Sample Pearson correlation. Returns `Undefined` if either side is constant.
 *
 * # Safety
 * `pred` and `actual` must each hold `len` doubles; `out` must be writable.
 */
enum NsStatus ns_pearson(const double *pred, const double *actual, size_t len, double *out);

/**
 * Fits a model on `n` row-major instances of `d` features.
 *
 * `hyperparams_json` may be null for defaults; otherwise it is a JSON object
 * with optional `gp`, `lr`, `mlp`, `smoreg` and `rf` sections. `seed`
 * reseeds the randomized learners. With `sign_targets` the targets are
 * treated as -1/+1 class labels.
 *
 * # Safety
 * `xs` must hold `n * d` doubles, `ys` `n` doubles; `out` must be writable.
 */
enum NsStatus ns_model_fit(enum NsModelKind kind,
                           const double *xs,
                           const double *ys,
                           size_t n,
                           size_t d,
                           bool sign_targets,
                           uint64_t seed,
                           const char *hyperparams_json,
                           struct NsModel **out);

/**
 * # Safety
 * `model` must be a live handle, `x` must hold `d` doubles, `out` writable.
 */
enum NsStatus ns_model_predict(const struct NsModel *model, const double *x, size_t d, double *out);

/**
 * Number of input features, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t ns_model_n_features(const struct NsModel *model);

/**
 * Writes the model as JSON.
 *
 * # Safety
 * `model` must be a live handle and `path` a nul-terminated string.
 */
enum NsStatus ns_model_save(const struct NsModel *model, const char *path);

/**
 * # Safety
 * `path` must be a nul-terminated string and `out` writable.
 */
enum NsStatus ns_model_load(const char *path, struct NsModel **out);

/**
 * # Safety
 * `model` must come from this library and not be freed twice. Null is ignored.
 */
void ns_model_free(struct NsModel *model);

/**
 * Generates a synthetic market and writes it as
 * `date,close,volume,sentiment,article_count` CSV.
 *
 * # Safety
 * `path` must be a nul-terminated string.
 */
enum NsStatus ns_synthetic_write(uint64_t seed,
                                 size_t n_days,
                                 size_t lag,
                                 double coupling,
                                 double noise_sd,
                                 const char *path);

/**
 * Runs the full pipeline for a TOML config. `out_dir` may be null to use
 * the configured output directory. The CSV report is returned in
 * `report_csv` (release with [`ns_string_free`]) unless it is null.
 *
 * # Safety
 * Strings must be nul-terminated; `report_csv` must be null or writable.
 */
enum NsStatus ns_run_config(const char *config_path, const char *out_dir, char **report_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEWSSTOCK_H */
