#ifndef BURSTALIGN_H
#define BURSTALIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/**
 * Result code of every fallible call.
 */
typedef enum BaStatus {
  BA_STATUS_OK = 0,
  BA_STATUS_NULL_POINTER = 1,
  BA_STATUS_INVALID_UTF8 = 2,
  BA_STATUS_IO = 3,
  BA_STATUS_PARSE = 4,
  BA_STATUS_INVALID_ARGUMENT = 5,
  BA_STATUS_OUT_OF_RANGE = 6,
  BA_STATUS_EMPTY_RESULT = 7,
  BA_STATUS_INTERNAL = 8,
} BaStatus;

/**
 * Bilingual seed lexicon.
 */
typedef struct BaLexicon BaLexicon;

/**
 * Ranked alignment pairs and word translations.
 */
typedef struct BaResult BaResult;

/**
 * Character-to-Latin romanization table.
 */
typedef struct BaRomanization BaRomanization;

/**
 * A tokenized, timestamped document stream.
 */
typedef struct BaStream BaStream;

/**
 * Run parameters. Fill with `ba_params_default` before changing fields.
 */
typedef struct BaParams {
  double alpha;
  double beta;
  double epsilon;
  double eta;
  double lambda;
  double gamma;
  double delta;
  double sn_max;
  uint32_t iterations;
  double init_mass;
  double cap;
  /**
   * 0 normalizes neighbor weights over the source node, 1 over the
   * neighbor.
   */
  uint32_t neighbor_norm;
  uint64_t min_count;
  uint32_t min_edge_weight;
} BaParams;

/**
 * One ranked pair. Strings are owned by the result handle.
 */
typedef struct BaPair {
  const char *source_word;
  size_t source_start;
  size_t source_end;
  const char *target_word;
  size_t target_start;
  size_t target_end;
  double score;
} BaPair;

/**
 * One word translation. Strings are owned by the result handle.
 */
typedef struct BaWordTranslation {
  const char *source_word;
  const char *target_word;
  double score;
} BaWordTranslation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty when none.
 * Valid until the next failing call on the same thread.
 */
const char *ba_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ba_version(void);

/**
 * Load a corpus file (`doc_id<TAB>YYYY-MM-DD<TAB>tokens`) bucketed into
 * epochs of `epoch_days` days.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum BaStatus ba_stream_load(const char *path, uint32_t epoch_days, struct BaStream **out);

/**
 * # Safety
 * `stream` must be null or a handle from `ba_stream_load` not yet freed.
 */
void ba_stream_free(struct BaStream *stream);

/**
 * Number of epochs; 0 for a null handle.
 *
 * # Safety
 * `stream` must be null or a live handle.
 */
size_t ba_stream_num_epochs(const struct BaStream *stream);

/**
 * Number of documents; 0 for a null handle.
 *
 * # Safety
 * `stream` must be null or a live handle.
 */
size_t ba_stream_num_docs(const struct BaStream *stream);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum BaStatus ba_lexicon_new(struct BaLexicon **out);

/**
 * Load a `source<TAB>target` lexicon file.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum BaStatus ba_lexicon_load(const char *path, struct BaLexicon **out);

/**
 * # Safety
 * `lexicon` must be a live handle; `source` and `target` valid C strings.
 */
enum BaStatus ba_lexicon_insert(struct BaLexicon *lexicon, const char *source, const char *target);

/**
 * Number of distinct entries; 0 for a null handle.
 *
 * # Safety
 * `lexicon` must be null or a live handle.
 */
size_t ba_lexicon_len(const struct BaLexicon *lexicon);

/**
 * # Safety
 * `lexicon` must be null or a live handle.
 */
void ba_lexicon_free(struct BaLexicon *lexicon);

/**
 * Load a `unit<TAB>romanization` file.
 *
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum BaStatus ba_romanization_load(const char *path, struct BaRomanization **out);

/**
 * # Safety
 * `table` must be null or a live handle.
 */
void ba_romanization_free(struct BaRomanization *table);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum BaStatus ba_params_default(struct BaParams *out);

/**
 * Align `source` to `target`. The two streams are put on a shared epoch
 * axis first. `romanization` and `params` may be null (empty table,
 * defaults). With `split_epoch > 0` both halves run in parallel and their
 * pairs are merged.
 *
 * # Safety
 * Handles must be live; `out` must be a valid pointer.
 */
enum BaStatus ba_decipher(const struct BaStream *source,
                          const struct BaStream *target,
                          const struct BaLexicon *lexicon,
                          const struct BaRomanization *romanization,
                          const struct BaParams *params,
                          size_t split_epoch,
                          struct BaResult **out);

/**
 * Number of ranked pairs; 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ba_result_len(const struct BaResult *result);

/**
 * Pair at rank `index` (0 = best).
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum BaStatus ba_result_pair(const struct BaResult *result, size_t index, struct BaPair *out);

/**
 * Number of word translations; 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t ba_result_num_words(const struct BaResult *result);

/**
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum BaStatus ba_result_word(const struct BaResult *result,
                             size_t index,
                             struct BaWordTranslation *out);

/**
 * Write the ranked pairs as TSV.
 *
 * # Safety
 * `result` must be a live handle and `path` a valid C string.
 */
enum BaStatus ba_result_write_pairs(const struct BaResult *result, const char *path);

/**
 * Top-`k` accuracy of the ranked pairs against a gold TSV file.
 *
 * # Safety
 * `result` must be a live handle, `gold_path` a valid C string and `out`
 * a valid pointer.
 */
enum BaStatus ba_result_accuracy(const struct BaResult *result,
                                 const char *gold_path,
                                 size_t k,
                                 double *out);

/**
 * # Safety
 * `result` must be null or a live handle. Strings obtained from it become
 * invalid.
 */
void ba_result_free(struct BaResult *result);

/**
 * Cost of a 0/1 state sequence against probabilities `p` (both of length
 * `len`) with base probability `q0` and burst probability
 * `min(alpha * q0, 1)`.
 *
 * # Safety
 * `states` and `p` must point to `len` elements; `out` must be valid.
 */
enum BaStatus ba_burst_cost(const uint8_t *states,
                            const double *p,
                            size_t len,
                            double q0,
                            double alpha,
                            double beta,
                            double epsilon,
                            double *out);

/**
 * Pronunciation clue for a normalized edit distance.
 */
double ba_pronunciation_clue(double normalized_distance);

/**
 * Translation clue for a longest-common-subsequence ratio.
 */
double ba_translation_clue(double ratio);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BURSTALIGN_H */
