// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used only by tests. They share no
// code with the library: tokenization uses std::regex, BM25 statistics are
// recounted from scratch for every query, fusion scans lists linearly and
// metrics walk explicit grade vectors.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <regex>
#include <string>
#include <utility>
#include <vector>

#include "corpus.hpp"

namespace oracle {

inline std::vector<std::string> regex_tokenize(const std::string& text) {
    static const std::regex word("[A-Za-z0-9]+");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), word); it != std::sregex_iterator(); ++it) {
        std::string t = it->str();
        for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(t);
    }
    return out;
}

struct Scored {
    std::string id;
    double score;
    int n = 0;  // list membership, fusion only
};

/// Sorts by score descending; scores within `eps` of their neighbour form a
/// tie group, ordered by n descending then id ascending. With `relative`,
/// the tolerance scales with the larger score.
inline std::vector<Scored> documented_order(std::vector<Scored> items, double eps, bool relative = false) {
    std::sort(items.begin(), items.end(), [](const Scored& a, const Scored& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    std::size_t start = 0;
    while (start < items.size()) {
        std::size_t end = start + 1;
        while (end < items.size() &&
               items[end - 1].score - items[end].score <= (relative ? eps * std::abs(items[end - 1].score) : eps))
            ++end;
        std::sort(items.begin() + static_cast<std::ptrdiff_t>(start), items.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const Scored& a, const Scored& b) { return a.n != b.n ? a.n > b.n : a.id < b.id; });
        start = end;
    }
    return items;
}

/// Exhaustive BM25: every document is scored, one query-token occurrence at
/// a time, with collection statistics recomputed from the raw text.
class Bm25 {
  public:
    Bm25(const std::vector<exp4fuse::Document>& docs, double k1, double b) : k1_(k1), b_(b) {
        double total = 0;
        for (const auto& d : docs) {
            ids_.push_back(d.doc_id);
            tokens_.push_back(regex_tokenize(d.text));
            total += static_cast<double>(tokens_.back().size());
        }
        avgdl_ = total / static_cast<double>(docs.size());
    }

    double df(const std::string& term) const {
        double n = 0;
        for (const auto& toks : tokens_)
            if (std::find(toks.begin(), toks.end(), term) != toks.end()) n += 1;
        return n;
    }

    double score(const std::vector<std::string>& query, std::size_t doc) const {
        std::map<std::string, double> dfs;
        for (const auto& t : query) dfs[t] = df(t);
        return score(query, doc, dfs);
    }

    double score(const std::vector<std::string>& query, std::size_t doc, const std::map<std::string, double>& dfs) const {
        const double n = static_cast<double>(tokens_.size());
        double s = 0.0;
        for (const auto& term : query) {
            const double tf = static_cast<double>(std::count(tokens_[doc].begin(), tokens_[doc].end(), term));
            if (tf == 0) continue;
            const double df = dfs.at(term);
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double dl = static_cast<double>(tokens_[doc].size());
            s += idf * tf * (k1_ + 1) / (tf + k1_ * (1 - b_ + b_ * dl / avgdl_));
        }
        return s;
    }

    std::vector<Scored> score_all(const std::string& query_text) const {
        const auto q = regex_tokenize(query_text);
        std::map<std::string, double> dfs;
        for (const auto& t : q) dfs[t] = df(t);
        std::vector<Scored> out;
        for (std::size_t d = 0; d < tokens_.size(); ++d) {
            double s = score(q, d, dfs);
            if (s > 0) out.push_back({ids_[d], s});
        }
        return out;
    }

    std::vector<Scored> top_k(const std::string& query_text, std::size_t k, double eps) const {
        auto all = documented_order(score_all(query_text), eps);
        if (all.size() > k) all.resize(k);
        return all;
    }

  private:
    double k1_, b_, avgdl_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::vector<std::string>> tokens_;
};

/// Direct evaluation of the fusion formula, weights inside the sum. `eps`
/// is the relative tie tolerance.
inline std::vector<Scored> fuse(const std::vector<exp4fuse::RankedList>& lists, const std::vector<double>& weights,
                                double k, double divisor, std::size_t depth, double eps) {
    std::vector<std::string> docs;
    for (const auto& l : lists)
        for (const auto& e : l.entries)
            if (std::find(docs.begin(), docs.end(), e.doc_id) == docs.end()) docs.push_back(e.doc_id);

    std::vector<Scored> out;
    for (const auto& d : docs) {
        std::vector<int> ranks(lists.size(), 0);
        int n = 0;
        for (std::size_t i = 0; i < lists.size(); ++i)
            for (const auto& e : lists[i].entries)
                if (e.doc_id == d) {
                    ranks[i] = e.rank;
                    ++n;
                }
        double s = 0.0;
        for (std::size_t i = 0; i < lists.size(); ++i)
            if (ranks[i] > 0) s += (weights[i] + n / divisor) * (1.0 / (k + ranks[i]));
        out.push_back({d, s, n});
    }
    out = documented_order(std::move(out), eps, true);
    if (out.size() > depth) out.resize(depth);
    return out;
}

// ---- metrics over explicit grade vectors -----------------------------------

/// Grades of the run's documents in rank order.
inline std::vector<int> grades_in_rank_order(const exp4fuse::RankedList& list, const exp4fuse::Qrels& qrels) {
    std::map<int, std::string> by_rank;
    for (const auto& e : list.entries) by_rank[e.rank] = e.doc_id;
    std::vector<int> g;
    for (const auto& [rank, doc] : by_rank) g.push_back(qrels.grade(list.query_id, doc));
    return g;
}

inline std::vector<int> judged_grades(const exp4fuse::Qrels& qrels, const std::string& qid) {
    std::vector<int> g;
    if (const auto* j = qrels.judgments(qid))
        for (const auto& [doc, grade] : *j) g.push_back(grade);
    return g;
}

inline double ap(const std::vector<int>& ranked, const std::vector<int>& judged, int threshold) {
    const auto total = std::count_if(judged.begin(), judged.end(), [&](int g) { return g >= threshold; });
    if (total == 0) return 0;
    double sum = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i] < threshold) continue;
        int hits_so_far = 0;
        for (std::size_t j = 0; j <= i; ++j) hits_so_far += ranked[j] >= threshold;
        sum += static_cast<double>(hits_so_far) / static_cast<double>(i + 1);
    }
    return sum / static_cast<double>(total);
}

inline double ndcg(const std::vector<int>& ranked, std::vector<int> judged, std::size_t k, bool exponential) {
    auto gain = [&](int g) { return g <= 0 ? 0.0 : exponential ? std::pow(2.0, g) - 1.0 : static_cast<double>(g); };
    double dcg = 0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) dcg += gain(ranked[i]) / std::log2(i + 2.0);
    std::sort(judged.rbegin(), judged.rend());
    double idcg = 0;
    for (std::size_t i = 0; i < judged.size() && i < k; ++i) idcg += gain(judged[i]) / std::log2(i + 2.0);
    return idcg > 0 ? dcg / idcg : 0.0;
}

inline double rr(const std::vector<int>& ranked, std::size_t k, int threshold) {
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
        if (ranked[i] >= threshold) return 1.0 / static_cast<double>(i + 1);
    return 0;
}

inline double recall(const std::vector<int>& ranked, const std::vector<int>& judged, std::size_t k, int threshold) {
    const auto total = std::count_if(judged.begin(), judged.end(), [&](int g) { return g >= threshold; });
    if (total == 0) return 0;
    double hits = 0;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) hits += ranked[i] >= threshold;
    return hits / static_cast<double>(total);
}

// ---- random generators -------------------------------------------------------

inline std::vector<exp4fuse::Document> random_corpus(std::mt19937_64& rng, std::size_t n_docs, std::size_t vocab,
                                                     std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    // Zipf-ish skew so that frequent and rare terms both occur.
    std::vector<double> w(vocab);
    for (std::size_t i = 0; i < vocab; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
    std::discrete_distribution<std::size_t> term(w.begin(), w.end());
    std::vector<exp4fuse::Document> docs;
    for (std::size_t d = 0; d < n_docs; ++d) {
        std::string text;
        const auto l = len(rng);
        for (std::size_t i = 0; i < l; ++i) {
            if (i) text += (rng() % 5 == 0) ? ", " : " ";
            text += "w" + std::to_string(term(rng));
        }
        docs.push_back({"doc" + std::to_string(d), text});
    }
    return docs;
}

inline std::string random_query(std::mt19937_64& rng, std::size_t vocab, std::size_t max_terms) {
    std::uniform_int_distribution<std::size_t> n(1, max_terms);
    std::uniform_int_distribution<std::size_t> t(0, vocab - 1);
    std::string q;
    for (std::size_t i = 0, m = n(rng); i < m; ++i) q += (i ? " " : "") + ("W" + std::to_string(t(rng) % (i % 2 ? vocab : 40)));
    return q;
}

/// A valid ranked list over doc ids drawn from a pool of `pool` documents.
inline exp4fuse::RankedList random_list(std::mt19937_64& rng, const std::string& qid, std::size_t depth,
                                        std::size_t pool, const std::string& tag = "r") {
    std::vector<std::size_t> ids(pool);
    for (std::size_t i = 0; i < pool; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    depth = std::min(depth, pool);
    exp4fuse::RankedList list{qid, {}, tag};
    double score = 100.0;
    std::uniform_real_distribution<double> step(0.0, 1.0);
    for (std::size_t r = 0; r < depth; ++r) {
        list.entries.push_back({"d" + std::to_string(ids[r]), static_cast<int>(r + 1), score});
        if (rng() % 4) score -= step(rng);  // occasional ties
    }
    return list;
}

}  // namespace oracle
