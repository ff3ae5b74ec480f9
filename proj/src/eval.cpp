// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "error.hpp"

namespace exp4fuse {

namespace {

int grade_of(const Qrels::Judgments* judgments, const std::string& doc) {
    if (!judgments) return 0;
    auto it = judgments->find(doc);
    return it == judgments->end() ? 0 : it->second;
}

std::size_t relevant_count(const Qrels::Judgments* judgments, int threshold) {
    if (!judgments) return 0;
    return static_cast<std::size_t>(std::count_if(judgments->begin(), judgments->end(),
                                                  [&](const auto& j) { return j.second >= threshold; }));
}

double gain(int grade, GainMode mode) {
    if (grade <= 0) return 0.0;
    return mode == GainMode::Exponential ? std::exp2(static_cast<double>(grade)) - 1.0 : static_cast<double>(grade);
}

// Entries in rank order, without assuming the vector is already sorted.
std::vector<const RunEntry*> ranked(const RankedList& list) {
    std::vector<const RunEntry*> out;
    out.reserve(list.entries.size());
    for (const auto& e : list.entries) out.push_back(&e);
    std::stable_sort(out.begin(), out.end(), [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
    return out;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

GainMode parse_gain_mode(std::string_view name) {
    if (name == "exponential") return GainMode::Exponential;
    if (name == "linear") return GainMode::Linear;
    fail(ErrorCode::InvalidArgument, "unknown ndcg gain '" + std::string(name) + "' (expected exponential or linear)");
}

const char* to_string(GainMode mode) { return mode == GainMode::Exponential ? "exponential" : "linear"; }

void EvalConfig::validate() const {
    if (relevance_threshold < 1) fail(ErrorCode::InvalidArgument, "relevance threshold must be >= 1");
    if (ndcg_cutoff < 1 || mrr_cutoff < 1 || recall_cutoff < 1)
        fail(ErrorCode::InvalidArgument, "metric cutoffs must be >= 1");
}

std::string metric_name(Metric metric, const EvalConfig& config) {
    switch (metric) {
        case Metric::Map: return "map";
        case Metric::Ndcg: return "ndcg@" + std::to_string(config.ndcg_cutoff);
        case Metric::Mrr: return "mrr@" + std::to_string(config.mrr_cutoff);
        case Metric::Recall: return "recall@" + std::to_string(config.recall_cutoff);
    }
    fail(ErrorCode::Internal, "unknown metric");
}

double average_precision(const RankedList& list, const Qrels::Judgments* judgments, const EvalConfig& config) {
    const auto total = relevant_count(judgments, config.relevance_threshold);
    if (total == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (const auto* e : ranked(list)) {
        if (grade_of(judgments, e->doc_id) >= config.relevance_threshold) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(e->rank);
        }
    }
    return sum / static_cast<double>(total);
}

double ndcg_at_k(const RankedList& list, const Qrels::Judgments* judgments, std::size_t k, const EvalConfig& config) {
    if (!judgments) return 0.0;
    std::vector<int> grades;
    for (const auto& [_, g] : *judgments)
        if (g > 0) grades.push_back(g);
    if (grades.empty()) return 0.0;
    std::sort(grades.begin(), grades.end(), std::greater<>());

    double ideal = 0.0;
    for (std::size_t j = 0; j < std::min(k, grades.size()); ++j)
        ideal += gain(grades[j], config.gain) / std::log2(static_cast<double>(j + 2));

    double dcg = 0.0;
    for (const auto* e : ranked(list)) {
        if (static_cast<std::size_t>(e->rank) > k) break;
        dcg += gain(grade_of(judgments, e->doc_id), config.gain) / std::log2(static_cast<double>(e->rank + 1));
    }
    return dcg / ideal;
}

double reciprocal_rank_at_k(const RankedList& list, const Qrels::Judgments* judgments, std::size_t k,
                            const EvalConfig& config) {
    for (const auto* e : ranked(list)) {
        if (static_cast<std::size_t>(e->rank) > k) break;
        if (grade_of(judgments, e->doc_id) >= config.relevance_threshold) return 1.0 / static_cast<double>(e->rank);
    }
    return 0.0;
}

double recall_at_k(const RankedList& list, const Qrels::Judgments* judgments, std::size_t k,
                   const EvalConfig& config) {
    const auto total = relevant_count(judgments, config.relevance_threshold);
    if (total == 0) return 0.0;
    std::size_t hits = 0;
    for (const auto* e : ranked(list)) {
        if (static_cast<std::size_t>(e->rank) > k) break;
        if (grade_of(judgments, e->doc_id) >= config.relevance_threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

MetricReport evaluate(const Run& run, const Qrels& qrels, const EvalConfig& config, std::span<const Metric> metrics) {
    config.validate();
    MetricReport report;
    report.relevance_threshold = config.relevance_threshold;
    report.gain = config.gain;
    for (auto m : metrics) report.metrics.push_back(metric_name(m, config));

    std::unordered_map<std::string_view, const RankedList*> lists;
    for (const auto& list : run) {
        if (!lists.emplace(list.query_id, &list).second)
            fail(ErrorCode::InvalidArgument, "run lists query '" + list.query_id + "' twice");
        if (!qrels.contains(list.query_id)) report.excluded_queries.push_back(list.query_id);
    }

    for (const auto& [qid, judgments] : qrels.by_query()) {
        auto it = lists.find(qid);
        const RankedList empty{qid, {}, "none"};
        const RankedList& list = it == lists.end() ? empty : *it->second;
        auto& row = report.per_query[qid];
        for (auto m : metrics) {
            double value = 0.0;
            switch (m) {
                case Metric::Map: value = average_precision(list, &judgments, config); break;
                case Metric::Ndcg: value = ndcg_at_k(list, &judgments, config.ndcg_cutoff, config); break;
                case Metric::Mrr: value = reciprocal_rank_at_k(list, &judgments, config.mrr_cutoff, config); break;
                case Metric::Recall: value = recall_at_k(list, &judgments, config.recall_cutoff, config); break;
            }
            row[metric_name(m, config)] = value;
        }
    }

    report.evaluated_query_count = report.per_query.size();
    for (const auto& name : report.metrics) {
        double sum = 0.0;
        for (const auto& [_, row] : report.per_query) sum += row.at(name);
        report.aggregate[name] =
            report.evaluated_query_count ? sum / static_cast<double>(report.evaluated_query_count) : 0.0;
    }
    return report;
}

MetricReport mean_average_precision(const Run& run, const Qrels& qrels, const EvalConfig& config) {
    const Metric m[] = {Metric::Map};
    return evaluate(run, qrels, config, m);
}

MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k, EvalConfig config) {
    config.ndcg_cutoff = k;
    const Metric m[] = {Metric::Ndcg};
    return evaluate(run, qrels, config, m);
}

MetricReport mrr_at_k(const Run& run, const Qrels& qrels, std::size_t k, EvalConfig config) {
    config.mrr_cutoff = k;
    const Metric m[] = {Metric::Mrr};
    return evaluate(run, qrels, config, m);
}

MetricReport recall_at_k(const Run& run, const Qrels& qrels, std::size_t k, EvalConfig config) {
    config.recall_cutoff = k;
    const Metric m[] = {Metric::Recall};
    return evaluate(run, qrels, config, m);
}

std::string MetricReport::to_json(bool include_per_query) const {
    nlohmann::ordered_json j;
    for (const auto& name : metrics) j[name] = aggregate.at(name);
    j["evaluated_queries"] = evaluated_query_count;
    j["excluded_queries"] = excluded_queries;
    j["relevance_threshold"] = relevance_threshold;
    j["ndcg_gain"] = to_string(gain);
    if (include_per_query) {
        auto& pq = j["per_query"] = nlohmann::ordered_json::object();
        for (const auto& [qid, row] : per_query) {
            auto& r = pq[qid] = nlohmann::ordered_json::object();
            for (const auto& name : metrics) r[name] = row.at(name);
        }
    }
    return j.dump(2);
}

std::string MetricReport::to_table() const {
    std::size_t width = 7;
    for (const auto& name : metrics) width = std::max(width, name.size());
    std::ostringstream out;
    auto row = [&](const std::string& label, const std::string& value) {
        out << label << std::string(width - label.size() + 2, ' ') << value << '\n';
    };
    for (const auto& name : metrics) row(name, fixed4(aggregate.at(name)));
    row("queries", std::to_string(evaluated_query_count));
    if (!excluded_queries.empty()) row("skipped", std::to_string(excluded_queries.size()));
    return out.str();
}

std::string format_comparison(std::span<const std::pair<std::string, MetricReport>> reports) {
    if (reports.empty()) return {};
    const auto& metrics = reports.front().second.metrics;
    std::size_t label_width = 5;
    for (const auto& [label, _] : reports) label_width = std::max(label_width, label.size());
    std::vector<std::size_t> widths;
    for (const auto& m : metrics) widths.push_back(std::max<std::size_t>(m.size(), 6));

    std::ostringstream out;
    auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - std::min(w, s.size()), ' ') + s; };
    out << "route" << std::string(label_width - 5, ' ');
    for (std::size_t i = 0; i < metrics.size(); ++i) out << "  " << pad_left(metrics[i], widths[i]);
    out << '\n';
    for (const auto& [label, report] : reports) {
        out << label << std::string(label_width - label.size(), ' ');
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            auto it = report.aggregate.find(metrics[i]);
            out << "  " << pad_left(it == report.aggregate.end() ? "-" : fixed4(it->second), widths[i]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace exp4fuse
