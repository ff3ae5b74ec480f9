// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"

namespace exp4fuse {

enum class GainMode { Exponential, Linear };

GainMode parse_gain_mode(std::string_view name);
const char* to_string(GainMode mode);

struct EvalConfig {
    /// Grade at or above which a document counts as relevant for MAP, MRR
    /// and recall. nDCG always uses graded gains.
    int relevance_threshold = 1;
    GainMode gain = GainMode::Exponential;
    std::size_t ndcg_cutoff = 10;
    std::size_t mrr_cutoff = 10;
    std::size_t recall_cutoff = 1000;

    void validate() const;
};

enum class Metric { Map, Ndcg, Mrr, Recall };

/// Canonical report name, e.g. "map", "ndcg@10", "mrr@10", "recall@1000".
std::string metric_name(Metric metric, const EvalConfig& config);

inline constexpr Metric kAllMetrics[] = {Metric::Map, Metric::Ndcg, Metric::Mrr, Metric::Recall};

// Single-query scorers. `judgments` may be null for a query without qrels.
// Entries are read in rank order.
double average_precision(const RankedList& list, const Qrels::Judgments* judgments, const EvalConfig& config);
double ndcg_at_k(const RankedList& list, const Qrels::Judgments* judgments, std::size_t k, const EvalConfig& config);
double reciprocal_rank_at_k(const RankedList& list, const Qrels::Judgments* judgments, std::size_t k,
                            const EvalConfig& config);
double recall_at_k(const RankedList& list, const Qrels::Judgments* judgments, std::size_t k,
                   const EvalConfig& config);

struct MetricReport {
    std::vector<std::string> metrics;  // column order
    std::map<std::string, std::map<std::string, double>> per_query;
    std::map<std::string, double> aggregate;
    std::size_t evaluated_query_count = 0;
    /// Run queries without any judgments; excluded from the aggregate.
    std::vector<std::string> excluded_queries;
    int relevance_threshold = 1;
    GainMode gain = GainMode::Exponential;

    std::string to_json(bool include_per_query = true) const;
    std::string to_table() const;
};

/// Evaluates the requested metrics. Every query with judgments is
/// evaluated (scoring 0 when absent from the run); the aggregate is the
/// arithmetic mean over those queries.
MetricReport evaluate(const Run& run, const Qrels& qrels, const EvalConfig& config,
                      std::span<const Metric> metrics = kAllMetrics);

MetricReport mean_average_precision(const Run& run, const Qrels& qrels, const EvalConfig& config = {});
MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k = 10, EvalConfig config = {});
MetricReport mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k = 10, EvalConfig config = {});
MetricReport recall_at_k(const Run& run, const Qrels& qrels, std::size_t k = 1000, EvalConfig config = {});

/// Side-by-side aggregate table, one row per labelled report, values with
/// four decimals.
std::string format_comparison(std::span<const std::pair<std::string, MetricReport>> reports);

}  // namespace exp4fuse
