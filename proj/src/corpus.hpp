// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace exp4fuse {

struct Document {
    std::string doc_id;
    std::string text;

    bool operator==(const Document&) const = default;
};

struct Query {
    std::string query_id;
    std::string text;

    bool operator==(const Query&) const = default;
};

/// Graded relevance judgments. Unjudged (query, doc) pairs have grade 0.
class Qrels {
  public:
    using Judgments = std::map<std::string, int>;

    void set(const std::string& query_id, const std::string& doc_id, int grade);
    int grade(std::string_view query_id, std::string_view doc_id) const;

    /// Judgments for one query, or nullptr if the query has none.
    const Judgments* judgments(std::string_view query_id) const;
    bool contains(std::string_view query_id) const { return judgments(query_id) != nullptr; }

    const std::map<std::string, Judgments, std::less<>>& by_query() const { return by_query_; }
    std::size_t size() const;

    bool operator==(const Qrels&) const = default;

  private:
    std::map<std::string, Judgments, std::less<>> by_query_;
};

struct RunEntry {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;

    bool operator==(const RunEntry&) const = default;
};

/// One route's ranked output for a single query.
struct RankedList {
    std::string query_id;
    std::vector<RunEntry> entries;
    std::string tag;

    bool operator==(const RankedList&) const = default;

    /// Throws if ranks are not exactly 1..n, doc ids repeat, or scores increase.
    void validate() const;
};

/// A run is one RankedList per query, in query order.
using Run = std::vector<RankedList>;

enum class CorpusFormat { Tsv, Jsonl };

CorpusFormat parse_corpus_format(std::string_view name);

std::vector<Document> parse_corpus(std::istream& in, CorpusFormat format,
                                   const std::string& source = "<stream>");
std::vector<Document> load_corpus(const std::string& path, CorpusFormat format);

std::vector<Query> parse_queries(std::istream& in, const std::string& source = "<stream>");
std::vector<Query> load_queries(const std::string& path);

Qrels parse_qrels(std::istream& in, const std::string& source = "<stream>");
Qrels load_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, std::ostream& out);
void write_qrels(const Qrels& qrels, const std::string& path);

/// Renders a run score with 6 significant digits (printf "%.6g").
std::string format_score(double score);

Run parse_run(std::istream& in, const std::string& source = "<stream>");
Run read_run(const std::string& path);
void write_run(const Run& run, std::ostream& out);
void write_run(const Run& run, const std::string& path);

}  // namespace exp4fuse
