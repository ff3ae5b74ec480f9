// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "fuse.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "error.hpp"
#include "util.hpp"

namespace exp4fuse {

namespace {

constexpr double kTieTolerance = 1e-12;  // relative

bool same_score(double higher, double lower) { return higher - lower <= kTieTolerance * std::abs(higher); }

}  // namespace

void FusionConfig::validate(std::size_t list_count) const {
    if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorCode::InvalidArgument, "fusion k must be > 0");
    if (!(bonus_divisor > 0.0) || !std::isfinite(bonus_divisor))
        fail(ErrorCode::InvalidArgument, "fusion bonus divisor must be > 0");
    if (output_depth < 1) fail(ErrorCode::InvalidArgument, "fusion output depth must be >= 1");
    if (!weights.empty() && weights.size() != list_count)
        fail(ErrorCode::InvalidArgument, "fusion got " + std::to_string(weights.size()) + " weights for " +
                                             std::to_string(list_count) + " lists");
    for (double w : weights)
        if (!std::isfinite(w)) fail(ErrorCode::InvalidArgument, "fusion weights must be finite");
}

std::vector<FusedEntry> fuse_entries(std::span<const RankedList> lists, const FusionConfig& config) {
    if (lists.empty()) fail(ErrorCode::InvalidArgument, "fusion needs at least one ranked list");
    config.validate(lists.size());
    for (const auto& list : lists) {
        if (list.query_id != lists.front().query_id)
            fail(ErrorCode::InvalidArgument, "cannot fuse lists of different queries ('" +
                                                 lists.front().query_id + "' and '" + list.query_id + "')");
        list.validate();
    }

    const std::size_t m = lists.size();
    std::vector<FusedEntry> fused;
    std::unordered_map<std::string_view, std::size_t> slot;
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& e : lists[i].entries) {
            auto [it, inserted] = slot.try_emplace(e.doc_id, fused.size());
            if (inserted) fused.push_back(FusedEntry{e.doc_id, 0.0, 0, std::vector<std::optional<int>>(m)});
            auto& f = fused[it->second];
            f.ranks[i] = e.rank;
            ++f.n;
        }
    }

    std::vector<double> parts;
    for (auto& f : fused) {
        parts.clear();
        const double bonus = static_cast<double>(f.n) / config.bonus_divisor;
        for (std::size_t i = 0; i < m; ++i)
            if (f.ranks[i]) parts.push_back((config.weight(i) + bonus) / (config.k + *f.ranks[i]));
        // Summing in ascending order makes the score independent of list order.
        std::sort(parts.begin(), parts.end());
        for (double x : parts) f.fr_score += x;
    }

    std::sort(fused.begin(), fused.end(), [](const FusedEntry& a, const FusedEntry& b) {
        if (a.fr_score != b.fr_score) return a.fr_score > b.fr_score;
        if (a.n != b.n) return a.n > b.n;
        return a.doc_id < b.doc_id;
    });
    // Scores that differ only by rounding are ties: order them by membership
    // then doc id and give them the group's leading score.
    for (std::size_t start = 0; start < fused.size();) {
        std::size_t end = start + 1;
        while (end < fused.size() && same_score(fused[end - 1].fr_score, fused[end].fr_score)) ++end;
        if (end - start > 1) {
            const auto first = fused.begin() + static_cast<std::ptrdiff_t>(start);
            const auto last = fused.begin() + static_cast<std::ptrdiff_t>(end);
            const double score = first->fr_score;
            std::sort(first, last, [](const FusedEntry& a, const FusedEntry& b) {
                return a.n != b.n ? a.n > b.n : a.doc_id < b.doc_id;
            });
            for (auto it = first; it != last; ++it) it->fr_score = score;
        }
        start = end;
    }
    if (fused.size() > config.output_depth) fused.resize(config.output_depth);
    return fused;
}

RankedList fuse(std::span<const RankedList> lists, const FusionConfig& config) {
    auto entries = fuse_entries(lists, config);
    RankedList out{lists.front().query_id, {}, kFusedTag};
    out.entries.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        out.entries.push_back({std::move(entries[i].doc_id), static_cast<int>(i + 1), entries[i].fr_score});
    return out;
}

Run fuse_runs(std::span<const Run> runs, const FusionConfig& config, unsigned threads) {
    if (runs.empty()) fail(ErrorCode::InvalidArgument, "fusion needs at least one run");
    config.validate(runs.size());

    std::vector<std::string> query_order;
    std::unordered_set<std::string> known;
    std::vector<std::unordered_map<std::string, const RankedList*>> by_query(runs.size());
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const auto& list : runs[r]) {
            if (!by_query[r].emplace(list.query_id, &list).second)
                fail(ErrorCode::InvalidArgument, "run " + std::to_string(r + 1) + " lists query '" +
                                                     list.query_id + "' twice");
            if (known.insert(list.query_id).second) query_order.push_back(list.query_id);
        }
    }

    bool shared = false;
    for (const auto& qid : query_order) {
        shared = std::all_of(by_query.begin(), by_query.end(), [&](const auto& m) { return m.contains(qid); });
        if (shared) break;
    }
    if (!shared) fail(ErrorCode::InvalidArgument, "the runs being fused have no query in common");

    Run out(query_order.size());
    util::parallel_for(query_order.size(), threads, [&](std::size_t q) {
        const auto& qid = query_order[q];
        std::vector<RankedList> lists;
        lists.reserve(runs.size());
        for (const auto& m : by_query) {
            auto it = m.find(qid);
            lists.push_back(it != m.end() ? *it->second : RankedList{qid, {}, "missing"});
        }
        out[q] = fuse(lists, config);
    });
    return out;
}

}  // namespace exp4fuse
