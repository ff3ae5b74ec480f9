/* Copyright 2026 The Exp4Fuse Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the exp4fuse retrieval toolkit: BM25 indexing and search,
 * LLM query expansion, modified reciprocal rank fusion and TREC-style
 * evaluation.
 *
 * Conventions:
 *   - Every fallible call returns an e4f_status. On failure a description is
 *     available from e4f_last_error() until the next call on the same thread.
 *   - Objects are opaque handles created by *_new / *_load / *_build style
 *     calls and released with the matching *_free. Passing NULL to a free
 *     function is a no-op.
 *   - Strings returned through `char**` are owned by the caller and must be
 *     released with e4f_string_free().
 */
#ifndef EXP4FUSE_H
#define EXP4FUSE_H

#include <stddef.h>

#if defined(_WIN32)
#  define E4F_API __declspec(dllexport)
#else
#  define E4F_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum e4f_status {
  E4F_OK = 0,
  E4F_ERR_INVALID_ARGUMENT = 1,
  E4F_ERR_IO = 2,
  E4F_ERR_PARSE = 3,
  E4F_ERR_LLM = 4,
  E4F_ERR_INTERNAL = 5
} e4f_status;

typedef struct e4f_config e4f_config;
typedef struct e4f_index e4f_index;
typedef struct e4f_run e4f_run;
typedef struct e4f_qrels e4f_qrels;
typedef struct e4f_report e4f_report;

E4F_API const char* e4f_version(void);
E4F_API const char* e4f_last_error(void);
E4F_API const char* e4f_status_name(e4f_status status);
E4F_API void e4f_string_free(char* s);

/* ---- configuration ------------------------------------------------------ */

E4F_API e4f_status e4f_config_new(e4f_config** out);
E4F_API void e4f_config_free(e4f_config* config);
/* Applies every `key = value` line of a config file. */
E4F_API e4f_status e4f_config_load(e4f_config* config, const char* path);
/* Sets one key; later settings override earlier ones. */
E4F_API e4f_status e4f_config_set(e4f_config* config, const char* key, const char* value);
/* Current settings in config-file syntax. */
E4F_API e4f_status e4f_config_dump(const e4f_config* config, char** out);

/* ---- index -------------------------------------------------------------- */

/* format is "tsv" or "jsonl". */
E4F_API e4f_status e4f_index_build(const char* corpus_path, const char* format, double k1, double b,
                                   e4f_index** out);
E4F_API e4f_status e4f_index_load(const char* path, e4f_index** out);
E4F_API e4f_status e4f_index_save(const e4f_index* index, const char* path);
E4F_API void e4f_index_free(e4f_index* index);
E4F_API size_t e4f_index_doc_count(const e4f_index* index);
E4F_API size_t e4f_index_vocabulary_size(const e4f_index* index);
/* Searches one query and stores the result as a single-query run. */
E4F_API e4f_status e4f_index_search(const e4f_index* index, const char* query_id, const char* query_text,
                                    size_t top_k, const char* tag, e4f_run** out);

/* ---- runs --------------------------------------------------------------- */

E4F_API e4f_status e4f_run_read(const char* path, e4f_run** out);
E4F_API e4f_status e4f_run_write(const e4f_run* run, const char* path);
E4F_API void e4f_run_free(e4f_run* run);
E4F_API size_t e4f_run_query_count(const e4f_run* run);
/* Number of entries for the query at position `query`, or 0 when out of range. */
E4F_API size_t e4f_run_list_size(const e4f_run* run, size_t query);
/* Reads entry `entry` of query `query`. Returned strings stay valid while
 * the run is alive. Any output pointer may be NULL. */
E4F_API e4f_status e4f_run_entry(const e4f_run* run, size_t query, size_t entry, const char** query_id,
                                 const char** doc_id, int* rank, double* score);

/* Fuses `count` runs query by query. `weights` may be NULL (all 1) or hold
 * `count` values. */
E4F_API e4f_status e4f_fuse(const e4f_run* const* runs, size_t count, const double* weights, double k,
                            double bonus_divisor, size_t output_depth, e4f_run** out);

/* ---- evaluation --------------------------------------------------------- */

E4F_API e4f_status e4f_qrels_load(const char* path, e4f_qrels** out);
E4F_API void e4f_qrels_free(e4f_qrels* qrels);

/* gain is "exponential" or "linear"; NULL selects exponential. */
E4F_API e4f_status e4f_evaluate(const e4f_run* run, const e4f_qrels* qrels, int relevance_threshold,
                                const char* gain, e4f_report** out);
E4F_API void e4f_report_free(e4f_report* report);
/* Aggregate value of a metric such as "map", "ndcg@10", "mrr@10" or
 * "recall@1000". */
E4F_API e4f_status e4f_report_value(const e4f_report* report, const char* metric, double* value);
E4F_API size_t e4f_report_query_count(const e4f_report* report);
E4F_API e4f_status e4f_report_json(const e4f_report* report, char** out);
E4F_API e4f_status e4f_report_table(const e4f_report* report, char** out);

/* ---- pipeline stages (driven by a config) -------------------------------- */

/* Each writes its artifacts under the configured output directory and
 * returns a human-readable summary in *summary (may be NULL). */
E4F_API e4f_status e4f_cmd_index(const e4f_config* config, char** summary);
E4F_API e4f_status e4f_cmd_search(const e4f_config* config, char** summary);
E4F_API e4f_status e4f_cmd_expand(const e4f_config* config, char** summary);
/* out_path may be NULL for <output_dir>/run.exp4fuse.trec. */
E4F_API e4f_status e4f_cmd_fuse(const e4f_config* config, const char* const* run_paths, size_t count,
                                const char* out_path, char** summary);
/* Evaluates a run against the configured qrels; *report receives a table
 * or, when as_json is nonzero, a JSON object. */
E4F_API e4f_status e4f_cmd_eval(const e4f_config* config, const char* run_path, int as_json, char** report);
E4F_API e4f_status e4f_cmd_pipeline(const e4f_config* config, char** summary);

#ifdef __cplusplus
}
#endif

#endif /* EXP4FUSE_H */
