#ifndef PROCKIT_H
#define PROCKIT_H

#include <stddef.h>

#if defined(_WIN32)
#define PK_API __declspec(dllexport)
#else
#define PK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Same numbering as prockit::ErrorCode. */
typedef enum pk_status {
  PK_OK = 0,
  PK_ERR_IO = 1,
  PK_ERR_USAGE,
  PK_ERR_MALFORMED_MARKUP,
  PK_ERR_NOT_AN_ARTICLE,
  PK_ERR_NO_NAMED_METHODS,
  PK_ERR_DUPLICATE_ID,
  PK_ERR_VALIDATION,
  PK_ERR_NOT_IMPERATIVE,
  PK_ERR_EMPTY_QUERY,
  PK_ERR_UNKNOWN_DOCUMENT,
  PK_ERR_DIMENSION_MISMATCH,
  PK_ERR_POOL_TOO_SMALL,
  PK_ERR_ALL_FILTERED,
  PK_ERR_MISSING_COUNTERPART,
  PK_ERR_SCORER_FAILURE,
  PK_ERR_EMPTY_CORPUS,
  PK_ERR_CONFIG,
  PK_ERR_DEGENERATE_INPUT,
  PK_ERR_DUPLICATE_KEYS,
  PK_ERR_NO_HYPERLINKS,
  PK_ERR_INVALID_GRID,
  PK_ERR_UNKNOWN_ENTITY,
  PK_ERR_NOT_FOUND,
  PK_ERR_INTERNAL = 100
} pk_status;

typedef struct pk_corpus pk_corpus;
typedef struct pk_index pk_index;
typedef struct pk_linker pk_linker;
typedef struct pk_hierarchy pk_hierarchy;
typedef struct pk_service pk_service;

PK_API const char* pk_version(void);
/* "io", "usage", ... ; "ok" for PK_OK. */
PK_API const char* pk_status_name(pk_status status);

/* Message and 1-based input line (0 when none) of the last failure on the
   calling thread. */
PK_API const char* pk_last_error(void);
PK_API size_t pk_last_error_line(void);

/* Releases strings returned through char** out parameters. */
PK_API void pk_free(char* s);

/* Options are JSON objects (NULL or "" for defaults); unknown keys are
   PK_ERR_CONFIG. */

/* ---- corpus */

/* options: {"format": "auto"|"html"|"record", "keep_going": bool}.
   report (optional) receives a tab-separated summary. */
PK_API pk_status pk_corpus_ingest(const char* const* inputs, size_t n_inputs, const char* options,
                                  pk_corpus** out, char** report);
PK_API pk_status pk_corpus_load(const char* path, pk_corpus** out);
PK_API pk_status pk_corpus_save(const pk_corpus* corpus, const char* path);
PK_API size_t pk_corpus_size(const pk_corpus* corpus);
PK_API pk_status pk_corpus_article(const pk_corpus* corpus, const char* id, char** json);
PK_API void pk_corpus_free(pk_corpus* corpus);

/* ---- indexes */

/* options: {"embedder": "hashed"|"tfidf"|"external", "dim": n, "seed": n,
   "vectors": path, "fields": [...], "k1": x, "b": x} */
PK_API pk_status pk_index_build(const pk_corpus* corpus, const char* options, pk_index** out);
PK_API pk_status pk_index_save(const pk_index* index, const char* dir);
PK_API pk_status pk_index_load(const char* dir, pk_index** out);
PK_API void pk_index_free(pk_index* index);
PK_API pk_status pk_search(const pk_index* index, const char* query, size_t k, char** json);

/* ---- datasets */

/* options: {"task": "step"|"goal"|"order", "seed": n, "method": "bm25"|"embedding",
   "max_overlap": x, "per_article": n, "debias": bool, "emphasize": bool,
   "flip": bool}. `index` may be NULL; it supplies the embedder for
   embedding distractors. Writes JSON Lines and a plain-text audit. */
PK_API pk_status pk_generate(const pk_corpus* corpus, const pk_index* index, const char* options,
                             char** dataset, char** audit);

/* ---- suggestion */

/* options: {"k": n, "n_clusters": n, "seed": n, "n_init": n,
   "prior_neighbours": n, "score_file": path, "ordering": "prior"|"oracle",
   "format": "json"|"text"} */
PK_API pk_status pk_suggest(const pk_corpus* corpus, const pk_index* index, const char* goal,
                            const char* options, char** out);

/* ---- linking */

/* Titles are embedded with the index's embedder. corpus must outlive the
   linker. options: {"k_retrieve": n} */
PK_API pk_status pk_linker_create(const pk_corpus* corpus, const pk_index* index, const char* options,
                                  pk_linker** out);
PK_API pk_status pk_linker_load_model(pk_linker* linker, const char* path);
PK_API pk_status pk_linker_save_model(const pk_linker* linker, const char* path);
/* Trains on the train split of the corpus hyperlinks. options: {"seed": n,
   "test_fraction": x, "calibration_fraction": x, "iterations": n} */
PK_API pk_status pk_linker_train(pk_linker* linker, const char* options, char** report_json);
/* options: {"seed": n, "test_fraction": x, "split": "test"|"all"} */
PK_API pk_status pk_linker_evaluate(const pk_linker* linker, const char* options, char** metrics_json);
/* Tab-separated predictions for every step without a corpus hyperlink. */
PK_API pk_status pk_linker_predict(const pk_linker* linker, size_t threads, char** predictions);
PK_API pk_status pk_linker_candidates(const pk_linker* linker, const char* step_id, char** json);
PK_API void pk_linker_free(pk_linker* linker);

/* ---- hierarchy */

/* predictions: output of pk_linker_predict, or NULL for hyperlinks only.
   corpus must outlive the hierarchy. */
PK_API pk_status pk_hierarchy_build(const pk_corpus* corpus, const char* predictions, pk_hierarchy** out);
/* format: "edges" or "json" */
PK_API pk_status pk_hierarchy_export(const pk_hierarchy* hierarchy, const char* format, char** out);
PK_API pk_status pk_hierarchy_tree(const pk_hierarchy* hierarchy, const char* article_id, size_t depth,
                                   char** json);
/* 1 when the article/step digraph has a topological order. */
PK_API int pk_hierarchy_is_acyclic(const pk_hierarchy* hierarchy);
PK_API void pk_hierarchy_free(pk_hierarchy* hierarchy);

/* ---- evaluation and state annotations */

PK_API pk_status pk_eval_edits(const char* predicted_path, const char* reference_path, char** report);
/* *.tsv grid or *.jsonl timeline: {"kind", "valid", "violations": [...]} */
PK_API pk_status pk_state_validate(const char* path, char** json);
PK_API pk_status pk_state_query(const char* path, const char* entity, const char* attribute, size_t at,
                                char** json);

/* ---- service */

/* Config file, then PROCKIT_BIND / PROCKIT_CORPUS, then overrides:
   {"host": s, "port": n, "threads": n}. Loads every artifact. */
PK_API pk_status pk_service_create(const char* config_path, const char* overrides, pk_service** out);
/* Serves on a background thread; *port receives the bound port. */
PK_API pk_status pk_service_start(pk_service* service, int* port);
/* Serves on the calling thread until pk_service_stop. */
PK_API pk_status pk_service_run(pk_service* service);
PK_API void pk_service_stop(pk_service* service);
/* In-process request: target is "path?query". */
PK_API pk_status pk_service_handle(pk_service* service, const char* method, const char* target,
                                   const char* body, int* http_status, char** response);
PK_API void pk_service_free(pk_service* service);

#ifdef __cplusplus
}
#endif

#endif
