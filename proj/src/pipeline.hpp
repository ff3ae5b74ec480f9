// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "eval.hpp"
#include "expand.hpp"
#include "fuse.hpp"
#include "index.hpp"
#include "llm.hpp"

namespace exp4fuse {

inline constexpr const char* kOriginalRouteTag = "oq";

/// Settings for every pipeline stage. Populated from a `key = value` file
/// and/or individual overrides; later assignments win.
struct PipelineConfig {
    std::string corpus;
    CorpusFormat corpus_format = CorpusFormat::Tsv;
    std::string queries;
    std::string qrels;
    std::string dataset = "msmarco";

    std::vector<std::string> strategies = {"hyde"};
    int lambda = 5;
    int lambda_multi = 2;
    int lambda_stepback = 5;
    GenerationParams generation;

    Bm25Params bm25;
    std::size_t top_k = 1000;

    FusionConfig fusion;
    /// Per-route weights used by the pipeline's fusions (default 1).
    std::map<std::string, double> route_weights;
    /// Route-tag combinations to fuse, e.g. {"oq","eq"}. Empty means the
    /// original route plus every expansion route.
    std::vector<std::vector<std::string>> fusions;

    EvalConfig eval;

    std::string output_dir = "exp4fuse-out";
    std::string index_path;  // default <output_dir>/index.bin
    std::string cache_path;  // default <output_dir>/generations.jsonl

    std::string llm_base_url = "https://api.openai.com/v1";
    std::string llm_model = "gpt-4o-mini";
    std::string llm_api_key_env = "OPENAI_API_KEY";
    int llm_timeout_seconds = 60;
    unsigned max_in_flight = 4;
    int max_attempts = 4;
    int retry_backoff_ms = 500;

    bool mock = false;
    std::string mock_fixtures;
    std::string mock_fallback = "echo";

    unsigned threads = 1;

    /// Applies one setting; throws on unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    /// Applies every `key = value` line of a file ('#' starts a comment).
    void load_file(const std::string& path);
    /// All settings in file syntax, sorted by key.
    std::string dump() const;
    static std::vector<std::string> keys();

    std::vector<ExpansionStrategy> expansion_strategies() const;
    std::string resolved_index_path() const;
    std::string resolved_cache_path() const;
    std::string route_run_path(const std::string& tag) const;
    std::string fused_run_path(const std::vector<std::string>& routes) const;
    std::vector<std::vector<std::string>> resolved_fusions() const;
};

struct IndexSummary {
    std::size_t doc_count = 0;
    std::size_t vocabulary_size = 0;
    std::string path;

    std::string to_string() const;
};

struct RouteOutput {
    std::string tag;
    std::string run_path;
    std::string expanded_path;  // empty for the original-query route
    std::size_t query_count = 0;
    std::size_t fallback_count = 0;
};

struct PipelineResult {
    IndexSummary index;
    std::vector<RouteOutput> routes;
    std::vector<std::pair<std::string, std::string>> fused;  // (label, run path)
    /// (label, report) for every route and fusion; empty without qrels.
    std::vector<std::pair<std::string, MetricReport>> reports;
    std::string report_json_path;
    std::string report_text_path;

    std::string summary() const;
};

/// Builds the client described by the config (mock or HTTP).
std::unique_ptr<LlmClient> make_client(const PipelineConfig& config);

/// Runs every query through the index; one list per query.
Run search_all(const InvertedIndex& index, std::span<const Query> queries, std::size_t top_k, const std::string& tag,
               unsigned threads = 1);

IndexSummary cmd_index(const PipelineConfig& config);
RouteOutput cmd_search(const PipelineConfig& config);
std::vector<RouteOutput> cmd_expand(const PipelineConfig& config);
/// Fuses the given run files with config.fusion; returns the output path
/// (default <output_dir>/run.exp4fuse.trec).
std::string cmd_fuse(const PipelineConfig& config, std::span<const std::string> run_paths, std::string out_path = {});
MetricReport cmd_eval(const PipelineConfig& config, const std::string& run_path);
PipelineResult cmd_pipeline(const PipelineConfig& config);

}  // namespace exp4fuse
