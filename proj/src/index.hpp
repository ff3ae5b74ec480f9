// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"

namespace exp4fuse {

/// Okapi BM25 free parameters. Defaults follow the usual MS MARCO passage
/// settings (k1 = 0.9, b = 0.4).
struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const;
    bool operator==(const Bm25Params&) const = default;
};

/// Lowercases ASCII letters and splits on every character that is not an
/// ASCII letter or digit. Bytes >= 0x80 are kept as part of tokens so UTF-8
/// words survive intact.
std::vector<std::string> tokenize(std::string_view text);

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Immutable in-memory inverted index with BM25 scoring. Safe for concurrent
/// reads once built.
class InvertedIndex {
  public:
    static InvertedIndex build(std::span<const Document> docs, Bm25Params params = {});

    static InvertedIndex load(const std::string& path);
    static InvertedIndex deserialize(std::istream& in);
    void save(const std::string& path) const;
    void serialize(std::ostream& out) const;

    std::size_t doc_count() const { return doc_ids_.size(); }
    std::size_t vocabulary_size() const { return terms_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Bm25Params& params() const { return params_; }

    const std::string& doc_id(std::uint32_t doc) const { return doc_ids_.at(doc); }
    std::uint32_t doc_length(std::uint32_t doc) const { return doc_lengths_.at(doc); }
    std::optional<std::uint32_t> internal_id(std::string_view doc_id) const;

    /// Sorted vocabulary.
    const std::vector<std::string>& terms() const { return terms_; }
    /// Postings in ascending doc order; empty span for unknown terms.
    std::span<const Posting> postings(std::string_view term) const;
    std::size_t document_frequency(std::string_view term) const { return postings(term).size(); }

    /// Lucene-style idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    double idf(std::size_t df) const;

    /// BM25 score of one document. Each occurrence of a term in
    /// `query_terms` contributes once, so repeating a query scales its score.
    double score(std::span<const std::string> query_terms, std::uint32_t doc) const;

    /// Top-k documents with a positive score, ordered by (score desc, doc_id asc).
    RankedList search(std::string query_id, std::string_view query_text, std::size_t top_k,
                      std::string tag) const;

    bool operator==(const InvertedIndex& other) const;

  private:
    InvertedIndex() = default;

    struct QueryTerm {
        std::uint32_t term;
        std::uint32_t count;
    };

    std::vector<QueryTerm> resolve(std::span<const std::string> query_terms) const;
    double term_contribution(const QueryTerm& qt, const Posting& p) const;
    void rebuild_lookups();

    Bm25Params params_;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::vector<std::string> terms_;
    std::vector<std::vector<Posting>> postings_;
    std::unordered_map<std::string, std::uint32_t> term_lookup_;
    std::unordered_map<std::string, std::uint32_t> doc_lookup_;
};

}  // namespace exp4fuse
