// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>

#include "error.hpp"
#include "util.hpp"

namespace exp4fuse {

namespace {

constexpr char kMagic[] = "EXP4FUSE-INDEX\n";
constexpr std::uint32_t kFormatVersion = 1;

bool is_token_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

// Little-endian binary helpers.
void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void need(std::istream& in) {
    if (!in) fail(ErrorCode::Parse, "truncated or corrupt index file");
}

std::uint64_t get_uint(std::istream& in, int bytes) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), bytes);
    need(in);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_uint(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_uint(in, 8); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_str(std::istream& in) {
    std::string s(get_u32(in), '\0');
    in.read(s.data(), static_cast<std::streamsize>(s.size()));
    need(in);
    return s;
}

}  // namespace

void Bm25Params::validate() const {
    if (!(k1 >= 0.0) || !std::isfinite(k1)) fail(ErrorCode::InvalidArgument, "bm25 k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) fail(ErrorCode::InvalidArgument, "bm25 b must be in [0, 1]");
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_token_char(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

InvertedIndex InvertedIndex::build(std::span<const Document> docs, Bm25Params params) {
    params.validate();
    if (docs.empty()) fail(ErrorCode::InvalidArgument, "cannot build an index over an empty corpus");

    InvertedIndex index;
    index.params_ = params;
    index.doc_ids_.reserve(docs.size());
    index.doc_lengths_.reserve(docs.size());

    // term -> postings; std::map keeps the vocabulary sorted for a stable
    // on-disk layout.
    std::map<std::string, std::vector<Posting>> postings;
    std::map<std::string, std::uint32_t> counts;
    std::uint64_t total_length = 0;

    for (std::size_t i = 0; i < docs.size(); ++i) {
        const auto doc = static_cast<std::uint32_t>(i);
        if (!index.doc_lookup_.emplace(docs[i].doc_id, doc).second)
            fail(ErrorCode::InvalidArgument, "duplicate doc_id '" + docs[i].doc_id + "'");
        index.doc_ids_.push_back(docs[i].doc_id);

        counts.clear();
        auto tokens = tokenize(docs[i].text);
        for (auto& t : tokens) ++counts[std::move(t)];
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        total_length += tokens.size();
        for (const auto& [term, tf] : counts) postings[term].push_back({doc, tf});
    }

    index.avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(docs.size());
    index.terms_.reserve(postings.size());
    index.postings_.reserve(postings.size());
    for (auto& [term, list] : postings) {
        index.terms_.push_back(term);
        index.postings_.push_back(std::move(list));
    }
    index.rebuild_lookups();
    return index;
}

void InvertedIndex::rebuild_lookups() {
    term_lookup_.clear();
    term_lookup_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) term_lookup_.emplace(terms_[i], static_cast<std::uint32_t>(i));
    doc_lookup_.clear();
    doc_lookup_.reserve(doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) doc_lookup_.emplace(doc_ids_[i], static_cast<std::uint32_t>(i));
}

std::optional<std::uint32_t> InvertedIndex::internal_id(std::string_view doc_id) const {
    auto it = doc_lookup_.find(std::string(doc_id));
    if (it == doc_lookup_.end()) return std::nullopt;
    return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    auto it = term_lookup_.find(std::string(term));
    if (it == term_lookup_.end()) return {};
    return postings_[it->second];
}

double InvertedIndex::idf(std::size_t df) const {
    const double n = static_cast<double>(doc_count());
    const double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

std::vector<InvertedIndex::QueryTerm> InvertedIndex::resolve(std::span<const std::string> query_terms) const {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& t : query_terms) {
        auto it = term_lookup_.find(t);
        if (it != term_lookup_.end()) ++counts[it->second];
    }
    std::vector<QueryTerm> out;
    out.reserve(counts.size());
    for (auto [term, count] : counts) out.push_back({term, count});
    return out;
}

double InvertedIndex::term_contribution(const QueryTerm& qt, const Posting& p) const {
    const double k1 = params_.k1;
    const double b = params_.b;
    const double tf = p.tf;
    const double norm = avg_doc_length_ > 0.0
                            ? 1.0 - b + b * static_cast<double>(doc_lengths_[p.doc]) / avg_doc_length_
                            : 1.0;
    const double weight = idf(postings_[qt.term].size()) * tf * (k1 + 1.0) / (tf + k1 * norm);
    return static_cast<double>(qt.count) * weight;
}

// Per-document contributions are summed in ascending order so that two
// documents with the same multiset of contributions get bit-identical
// scores regardless of which terms produced them.
double InvertedIndex::score(std::span<const std::string> query_terms, std::uint32_t doc) const {
    if (doc >= doc_count()) fail(ErrorCode::InvalidArgument, "document id out of range");
    std::vector<double> parts;
    for (const auto& qt : resolve(query_terms)) {
        const auto& list = postings_[qt.term];
        auto it = std::lower_bound(list.begin(), list.end(), doc,
                                   [](const Posting& p, std::uint32_t d) { return p.doc < d; });
        if (it != list.end() && it->doc == doc) parts.push_back(term_contribution(qt, *it));
    }
    std::sort(parts.begin(), parts.end());
    double total = 0.0;
    for (double x : parts) total += x;
    return total;
}

RankedList InvertedIndex::search(std::string query_id, std::string_view query_text, std::size_t top_k,
                                 std::string tag) const {
    if (top_k < 1) fail(ErrorCode::InvalidArgument, "top_k must be >= 1");
    RankedList result{std::move(query_id), {}, std::move(tag)};

    struct Contribution {
        std::uint32_t doc;
        double value;
    };
    std::vector<Contribution> contributions;
    const auto query_terms = tokenize(query_text);
    for (const auto& qt : resolve(query_terms))
        for (const auto& p : postings_[qt.term]) contributions.push_back({p.doc, term_contribution(qt, p)});

    std::sort(contributions.begin(), contributions.end(), [](const Contribution& a, const Contribution& b) {
        return a.doc != b.doc ? a.doc < b.doc : a.value < b.value;
    });

    struct Candidate {
        double score;
        std::uint32_t doc;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < contributions.size();) {
        const auto doc = contributions[i].doc;
        double total = 0.0;
        for (; i < contributions.size() && contributions[i].doc == doc; ++i) total += contributions[i].value;
        if (total > 0.0) candidates.push_back({total, doc});
    }

    auto better = [this](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return doc_ids_[a.doc] < doc_ids_[b.doc];
    };
    const std::size_t n = std::min(top_k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n), candidates.end(),
                      better);

    result.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        result.entries.push_back({doc_ids_[candidates[i].doc], static_cast<int>(i + 1), candidates[i].score});
    return result;
}

void InvertedIndex::serialize(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic - 1);
    put_u32(out, kFormatVersion);
    put_f64(out, params_.k1);
    put_f64(out, params_.b);
    put_u64(out, doc_ids_.size());
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        put_str(out, doc_ids_[i]);
        put_u32(out, doc_lengths_[i]);
    }
    put_u64(out, terms_.size());
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        put_str(out, terms_[t]);
        put_u64(out, postings_[t].size());
        for (const auto& p : postings_[t]) {
            put_u32(out, p.doc);
            put_u32(out, p.tf);
        }
    }
}

InvertedIndex InvertedIndex::deserialize(std::istream& in) {
    char magic[sizeof kMagic - 1];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
        fail(ErrorCode::Parse, "not an exp4fuse index file (bad magic)");
    const auto version = get_u32(in);
    if (version != kFormatVersion)
        fail(ErrorCode::Parse, "unsupported index format version " + std::to_string(version));

    InvertedIndex index;
    index.params_.k1 = get_f64(in);
    index.params_.b = get_f64(in);
    index.params_.validate();
    const auto n_docs = get_u64(in);
    if (n_docs == 0 || n_docs > UINT32_MAX) fail(ErrorCode::Parse, "corrupt index: bad document count");
    std::uint64_t total_length = 0;
    for (std::uint64_t i = 0; i < n_docs; ++i) {
        index.doc_ids_.push_back(get_str(in));
        index.doc_lengths_.push_back(get_u32(in));
        total_length += index.doc_lengths_.back();
    }
    index.avg_doc_length_ = static_cast<double>(total_length) / static_cast<double>(n_docs);

    const auto n_terms = get_u64(in);
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        index.terms_.push_back(get_str(in));
        const auto n_postings = get_u64(in);
        if (n_postings > n_docs) fail(ErrorCode::Parse, "corrupt index: posting list longer than corpus");
        std::vector<Posting> list(n_postings);
        for (auto& p : list) {
            p.doc = get_u32(in);
            p.tf = get_u32(in);
            if (p.doc >= n_docs || p.tf == 0) fail(ErrorCode::Parse, "corrupt index: invalid posting");
        }
        index.postings_.push_back(std::move(list));
    }
    index.rebuild_lookups();
    if (index.doc_lookup_.size() != index.doc_ids_.size() || index.term_lookup_.size() != index.terms_.size())
        fail(ErrorCode::Parse, "corrupt index: duplicate identifiers");
    return index;
}

void InvertedIndex::save(const std::string& path) const {
    auto out = util::open_output(path, true);
    serialize(out);
    if (!out) fail(ErrorCode::Io, "failed writing index '" + path + "'");
}

InvertedIndex InvertedIndex::load(const std::string& path) {
    auto in = util::open_input(path, true);
    try {
        return deserialize(in);
    } catch (const Error& e) {
        fail(e.code(), path + ": " + e.what());
    }
}

bool InvertedIndex::operator==(const InvertedIndex& other) const {
    return params_ == other.params_ && doc_ids_ == other.doc_ids_ && doc_lengths_ == other.doc_lengths_ &&
           terms_ == other.terms_ && postings_ == other.postings_;
}

}  // namespace exp4fuse
