#ifndef CORPUSFORGE_H
#define CORPUSFORGE_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_UTF8 = 2,
  CF_STATUS_INVALID_ARGUMENT = 3,
  CF_STATUS_IO = 4,
  CF_STATUS_PARSE = 5,
  CF_STATUS_EMPTY_INPUT = 6,
  // The caller's buffer is too small; the required length was written.
  CF_STATUS_BUFFER_TOO_SMALL = 7,
  CF_STATUS_PANIC = 8,
} CfStatus;

typedef enum CfStepKind {
  CF_STEP_KIND_MATCH = 0,
  // A source sentence left unaligned.
  CF_STEP_KIND_GAP_SOURCE = 1,
  // A target sentence left unaligned.
  CF_STEP_KIND_GAP_TARGET = 2,
} CfStepKind;

typedef struct CfLanguageModel CfLanguageModel;

typedef struct CfLexicon CfLexicon;

typedef struct CfMinedPairs CfMinedPairs;

typedef struct CfPerplexity {
  double log10_prob;
  // Scored tokens, `</s>` included.
  uint64_t tokens;
  uint64_t oov;
  double perplexity;
} CfPerplexity;

// One step of a sentence alignment path. The index of the side a gap skips
// over is -1.
typedef struct CfStep {
  enum CfStepKind kind;
  int64_t source;
  int64_t target;
} CfStep;

typedef struct CfMinedPair {
  uint64_t source_index;
  uint64_t target_index;
  double similarity;
} CfMinedPair;

typedef struct CfBleu {
  // In [0, 100].
  double score;
  double precisions[4];
  double brevity_penalty;
} CfBleu;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *cf_last_error(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void cf_string_free(char *s);

// Train an interpolated Kneser-Ney model on `text`.
//
// # Safety
// `text` must be a valid C string and `model` a valid out-pointer.
enum CfStatus cf_lm_train(const char *text,
                          uint32_t order,
                          uint32_t min_count,
                          struct CfLanguageModel **model);

// # Safety
// `path` must be a valid C string and `model` a valid out-pointer.
enum CfStatus cf_lm_read_arpa(const char *path, struct CfLanguageModel **model);

// Write the model as ARPA, replacing `path` if it exists.
//
// # Safety
// `model` must be a live handle and `path` a valid C string.
enum CfStatus cf_lm_write_arpa(const struct CfLanguageModel *model, const char *path);

// log10 P(word | context), where `context` is space-separated tokens,
// oldest first. Context and word are used verbatim, without tokenization.
//
// # Safety
// `model` must be a live handle, `context` and `word` valid C strings, and
// `log10_prob` a valid out-pointer.
enum CfStatus cf_lm_log_prob(const struct CfLanguageModel *model,
                             const char *context,
                             const char *word,
                             double *log10_prob);

// Corpus perplexity of `text` (one sentence per line).
//
// # Safety
// `model` must be a live handle, `text` a valid C string and `result` a
// valid out-pointer.
enum CfStatus cf_lm_perplexity(const struct CfLanguageModel *model,
                               const char *text,
                               struct CfPerplexity *result);

// # Safety
// `model` must be null or a live handle; it is invalid afterwards.
void cf_lm_free(struct CfLanguageModel *model);

// Train a source-to-target IBM Model 1 lexicon t(target | source) on
// line-parallel text. `log_likelihood`, when not null, must have room for
// `iterations` values and receives the log-likelihood after each iteration.
//
// # Safety
// `source` and `target` must be valid C strings, `lexicon` a valid
// out-pointer, and `log_likelihood` null or writable for `iterations` values.
enum CfStatus cf_lexicon_train(const char *source,
                               const char *target,
                               uint32_t iterations,
                               struct CfLexicon **lexicon,
                               double *log_likelihood);

// Read a `source\ttarget\tprob` lexicon file.
//
// # Safety
// `path` must be a valid C string and `lexicon` a valid out-pointer.
enum CfStatus cf_lexicon_read(const char *path, struct CfLexicon **lexicon);

// The lexicon as `source\ttarget\tprob` lines; free with [`cf_string_free`].
//
// # Safety
// `lexicon` must be a live handle and `tsv` a valid out-pointer.
enum CfStatus cf_lexicon_to_tsv(const struct CfLexicon *lexicon, char **tsv);

// t(target | source); 0 for unknown pairs. Words are used verbatim.
//
// # Safety
// `lexicon` must be a live handle, the words valid C strings and `prob` a
// valid out-pointer.
enum CfStatus cf_lexicon_prob(const struct CfLexicon *lexicon,
                              const char *source,
                              const char *target,
                              double *prob);

// # Safety
// `lexicon` must be null or a live handle; it is invalid afterwards.
void cf_lexicon_free(struct CfLexicon *lexicon);

// Lexicon-coverage similarity of one sentence pair, in [0, 1]. Lexicon
// entries below `min_prob` are ignored.
//
// # Safety
// `lexicon` must be a live handle, the sentences valid C strings and
// `similarity` a valid out-pointer.
enum CfStatus cf_score_pair(const struct CfLexicon *lexicon,
                            const char *source,
                            const char *target,
                            double min_prob,
                            double *similarity);

// Global alignment of a row-major `rows x cols` similarity matrix with a
// per-gap penalty. Writes the path into `steps` (capacity `capacity`), its
// length into `steps_len` and its score into `score`. When the buffer is
// too small, only `steps_len` is written and `BufferTooSmall` is returned;
// `rows + cols` steps always suffice.
//
// # Safety
// `scores` must be readable for `rows * cols` values (it may be null when
// that is 0), `steps` writable for `capacity` steps, and `steps_len` and
// `score` valid out-pointers.
enum CfStatus cf_nw_align(const double *scores,
                          size_t rows,
                          size_t cols,
                          double gap_penalty,
                          struct CfStep *steps,
                          size_t capacity,
                          size_t *steps_len,
                          double *score);

// Mine parallel sentences from one comparable document pair (one sentence
// per line on each side).
//
// # Safety
// `lexicon` must be a live handle, the documents valid C strings and `pairs`
// a valid out-pointer.
enum CfStatus cf_mine_documents(const struct CfLexicon *lexicon,
                                const char *source,
                                const char *target,
                                double threshold,
                                double gap_penalty,
                                double min_prob,
                                struct CfMinedPairs **pairs);

// # Safety
// `pairs` must be a live handle and `len` a valid out-pointer.
enum CfStatus cf_mined_pairs_len(const struct CfMinedPairs *pairs, size_t *len);

// Sentence indices and similarity of the `index`-th mined pair.
//
// # Safety
// `pairs` must be a live handle and `pair` a valid out-pointer.
enum CfStatus cf_mined_pairs_get(const struct CfMinedPairs *pairs,
                                 size_t index,
                                 struct CfMinedPair *pair);

// # Safety
// `pairs` must be null or a live handle; it is invalid afterwards.
void cf_mined_pairs_free(struct CfMinedPairs *pairs);

// Corpus BLEU-4 of line-aligned hypotheses against single references.
//
// # Safety
// The texts must be valid C strings and `result` a valid out-pointer.
enum CfStatus cf_bleu(const char *hypotheses,
                      const char *references,
                      bool smooth,
                      struct CfBleu *result);

// Corpus TER in percent: total edits over total reference length. With
// `shifts` false, block moves are not considered.
//
// # Safety
// The texts must be valid C strings and `ter` a valid out-pointer.
enum CfStatus cf_ter(const char *hypotheses, const char *references, bool shifts, double *ter);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORPUSFORGE_H */
