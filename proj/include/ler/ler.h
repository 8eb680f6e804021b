/*
 * C interface to the legal entity recognition pipeline.
 *
 * All objects are opaque handles released with the matching *_free call.
 * Every fallible function returns a ler_status; on failure the message and
 * the module that raised it are available from ler_last_error_message() and
 * ler_last_error_module() on the calling thread until the next call.
 */
#ifndef LER_LER_H_
#define LER_LER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LER_BUILDING_LIBRARY)
#    define LER_API __declspec(dllexport)
#  else
#    define LER_API __declspec(dllimport)
#  endif
#else
#  define LER_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ler_status {
  LER_OK = 0,
  LER_ERROR_INVALID_ARGUMENT = 1,
  LER_ERROR_IO = 2,
  LER_ERROR_FORMAT = 3,
  LER_ERROR_DIMENSION = 4,
  LER_ERROR_DIGEST = 5,
  LER_ERROR_INTERNAL = 6
} ler_status;

typedef struct ler_corpus ler_corpus;
typedef struct ler_head ler_head;
typedef struct ler_patterns ler_patterns;
typedef struct ler_report ler_report;
typedef struct ler_text ler_text;

LER_API const char *ler_version(void);
LER_API const char *ler_status_name(ler_status status);
LER_API const char *ler_last_error_message(void);
LER_API const char *ler_last_error_module(void);

/* Owned text (tables, summaries). */
LER_API const char *ler_text_data(const ler_text *text);
LER_API void ler_text_free(ler_text *text);

/* Corpus */
LER_API ler_status ler_corpus_load(const char *path, ler_corpus **out);
LER_API ler_status ler_corpus_synth(size_t n_docs, double noise, uint64_t seed,
                                    ler_corpus **out);
LER_API ler_status ler_corpus_save(const ler_corpus *corpus, const char *path);
LER_API size_t ler_corpus_size(const ler_corpus *corpus);
LER_API ler_status ler_corpus_split(const ler_corpus *corpus, double ratio, uint64_t seed,
                                    ler_corpus **train, ler_corpus **test);
LER_API void ler_corpus_free(ler_corpus *corpus);

/* Writes <dir>/<doc_id>.emb pseudo-embeddings for every document. */
LER_API ler_status ler_embed(const ler_corpus *corpus, const char *dir, size_t dim,
                             uint64_t seed, double signal, size_t workers);

/* Classification head */
LER_API ler_status ler_head_train(const ler_corpus *train, const char *embeddings_dir,
                                  size_t dim, size_t epochs, double lr, uint64_t seed,
                                  ler_head **out);
LER_API ler_status ler_head_save(const ler_head *head, const char *path);
LER_API ler_status ler_head_load(const char *path, ler_head **out);
LER_API size_t ler_head_dim(const ler_head *head);
LER_API void ler_head_free(ler_head *head);

/* Pattern registry. expected_dim == 0 skips the dimension check. */
LER_API ler_status ler_patterns_build(const ler_corpus *train, const char *embeddings_dir,
                                      size_t dim, ler_patterns **out);
LER_API ler_status ler_patterns_save(const ler_patterns *patterns, const char *path);
LER_API ler_status ler_patterns_load(const char *path, size_t expected_dim,
                                     ler_patterns **out);
LER_API void ler_patterns_free(ler_patterns *patterns);

/* Baseline + filtered predictions for every document, written as
 * line-delimited records to out_path. */
LER_API ler_status ler_extract(const ler_corpus *test, const char *embeddings_dir,
                               const ler_head *head, const ler_patterns *patterns,
                               uint64_t seed, double tau, size_t workers,
                               const char *out_path);

/* Scores a prediction file against the corpus gold spans. */
LER_API ler_status ler_evaluate(const ler_corpus *test, const char *predictions_path,
                                const char *baseline_report_path,
                                const char *hybrid_report_path);

LER_API ler_status ler_report_load(const char *path, ler_report **out);
LER_API void ler_report_micro(const ler_report *report, double *precision,
                              double *recall, double *f1);
LER_API void ler_report_free(ler_report *report);

/* Two-row comparison table. out_path may be NULL. */
LER_API ler_status ler_compare(const ler_report *baseline, const ler_report *hybrid,
                               const char *out_path, ler_text **table);

/* Threshold sweep over [tau_min, tau_max]; writes a TSV when out_path is
 * non-NULL and returns the same table text. */
LER_API ler_status ler_sweep(const ler_corpus *test, const char *embeddings_dir,
                             const ler_head *head, const ler_patterns *patterns,
                             uint64_t seed, double tau_min, double tau_max, size_t steps,
                             size_t workers, const char *out_path, ler_text **table);

typedef struct ler_run_config {
  size_t docs;
  double noise;
  double signal;
  size_t dim;
  uint64_t seed;
  double tau;
  size_t epochs;
  double lr;
  double split_ratio;
  size_t workers;
  const char *corpus_path;    /* NULL: synthesize */
  const char *embeddings_dir; /* NULL: pseudo-embed into <out_dir>/embeddings */
  const char *out_dir;
  double tau_min;
  double tau_max;
  size_t steps;
} ler_run_config;

/* Fills the demo defaults. */
LER_API void ler_run_config_init(ler_run_config *config);

/* End-to-end run; summary receives the comparison table and best sweep row. */
LER_API ler_status ler_run_pipeline(const ler_run_config *config, ler_text **summary);

#ifdef __cplusplus
}
#endif

#endif /* LER_LER_H_ */
