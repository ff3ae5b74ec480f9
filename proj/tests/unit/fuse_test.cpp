// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "error.hpp"
#include "fuse.hpp"
#include "oracles.hpp"

using namespace exp4fuse;

namespace {

RankedList list_of(const std::string& qid, std::vector<std::string> docs, const std::string& tag = "r") {
    RankedList l{qid, {}, tag};
    for (std::size_t i = 0; i < docs.size(); ++i)
        l.entries.push_back({docs[i], static_cast<int>(i + 1), 100.0 - static_cast<double>(i)});
    return l;
}

std::vector<std::string> ids(const RankedList& l) {
    std::vector<std::string> out;
    for (const auto& e : l.entries) out.push_back(e.doc_id);
    return out;
}

void expect_matches_oracle(const std::vector<RankedList>& lists, const FusionConfig& config) {
    std::vector<double> w;
    for (std::size_t i = 0; i < lists.size(); ++i) w.push_back(config.weight(i));
    const auto expected = oracle::fuse(lists, w, config.k, config.bonus_divisor, config.output_depth, 1e-12);
    const auto actual = fuse_entries(lists, config);
    ASSERT_EQ(actual.size(), expected.size());
    for (std::size_t i = 0; i < actual.size(); ++i) {
        EXPECT_EQ(actual[i].doc_id, expected[i].id) << "position " << i;
        EXPECT_NEAR(actual[i].fr_score, expected[i].score, 1e-12);
        EXPECT_EQ(actual[i].n, expected[i].n);
    }
}

}  // namespace

TEST(Fuse, SingleDocumentInTwoLists) {
    auto a = list_of("q", {"d"});
    auto b = list_of("q", {"d"});
    const RankedList lists[] = {a, b};
    auto fused = fuse(lists, {});
    ASSERT_EQ(fused.entries.size(), 1u);
    EXPECT_NEAR(fused.entries[0].score, 2.4 / 61.0, 1e-12);
    EXPECT_NEAR(fused.entries[0].score, 0.0393443, 1e-7);
    EXPECT_EQ(fused.tag, kFusedTag);
    EXPECT_EQ(fused.entries[0].rank, 1);
}

TEST(Fuse, SingleListKeepsOrder) {
    auto a = list_of("q", {"z", "b", "m", "a"});
    const RankedList lists[] = {a};
    EXPECT_EQ(ids(fuse(lists, {})), ids(a));
    auto entries = fuse_entries(lists, {});
    EXPECT_NEAR(entries[0].fr_score, 1.1 / 61.0, 1e-15);
    EXPECT_NEAR(entries[3].fr_score, 1.1 / 64.0, 1e-15);
}

TEST(Fuse, OverlapBonusPromotesSharedDocuments) {
    auto a = list_of("q", {"d1", "d2", "d3"});
    auto b = list_of("q", {"d2", "d3", "d4"});
    const RankedList lists[] = {a, b};
    auto entries = fuse_entries(lists, {});
    ASSERT_EQ(entries.size(), 4u);
    EXPECT_EQ(entries[0].doc_id, "d2");
    EXPECT_EQ(entries[1].doc_id, "d3");
    EXPECT_EQ(entries[2].doc_id, "d1");
    EXPECT_EQ(entries[3].doc_id, "d4");
    EXPECT_NEAR(entries[0].fr_score, 1.2 / 62 + 1.2 / 61, 1e-15);
    EXPECT_NEAR(entries[2].fr_score, 1.1 / 61, 1e-15);
    EXPECT_EQ(entries[0].ranks[0], 2);
    EXPECT_EQ(entries[0].ranks[1], 1);
    EXPECT_FALSE(entries[2].ranks[1].has_value());
}

TEST(Fuse, TiesBreakByMembershipThenId) {
    // x scores 2/61 from one list, y scores 1/61 + 1/61 from two.
    FusionConfig config;
    config.weights = {1.75, 0.5, 0.5};
    config.bonus_divisor = 4.0;
    auto entries = fuse_entries(
        std::vector<RankedList>{list_of("q", {"x"}), list_of("q", {"y"}), list_of("q", {"y"})}, config);
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[0].fr_score, entries[1].fr_score);
    EXPECT_EQ(entries[0].doc_id, "y");
    EXPECT_EQ(entries[0].n, 2);

    auto tie = fuse_entries(std::vector<RankedList>{list_of("q", {"b"}), list_of("q", {"a"})}, {});
    EXPECT_EQ(tie[0].fr_score, tie[1].fr_score);
    EXPECT_EQ(tie[0].doc_id, "a");
}

TEST(Fuse, WeightsApplyInsideTheSum) {
    FusionConfig config;
    config.weights = {2.0, 0.5};
    auto entries = fuse_entries(std::vector<RankedList>{list_of("q", {"d"}), list_of("q", {"e", "d"})}, config);
    const auto& d = entries[0].doc_id == "d" ? entries[0] : entries[1];
    EXPECT_NEAR(d.fr_score, 2.2 / 61 + 0.7 / 62, 1e-15);
}

TEST(Fuse, OutputDepthTruncates) {
    FusionConfig config;
    config.output_depth = 2;
    auto fused = fuse(std::vector<RankedList>{list_of("q", {"a", "b", "c"})}, config);
    EXPECT_EQ(ids(fused), (std::vector<std::string>{"a", "b"}));
}

TEST(Fuse, RejectsBadInput) {
    EXPECT_THROW(fuse(std::vector<RankedList>{}, {}), Error);
    EXPECT_THROW(fuse(std::vector<RankedList>{list_of("q1", {"a"}), list_of("q2", {"a"})}, {}), Error);
    FusionConfig config;
    config.weights = {1.0};
    EXPECT_THROW(fuse(std::vector<RankedList>{list_of("q", {"a"}), list_of("q", {"a"})}, config), Error);
    EXPECT_THROW(fuse(std::vector<RankedList>{list_of("q", {"a"})}, FusionConfig{0.0, {}, 10.0, 1000}), Error);
    EXPECT_THROW(fuse(std::vector<RankedList>{list_of("q", {"a"})}, FusionConfig{60.0, {}, 0.0, 1000}), Error);
    EXPECT_THROW(fuse(std::vector<RankedList>{list_of("q", {"a"})}, FusionConfig{60.0, {}, 10.0, 0}), Error);
    auto bad = list_of("q", {"a", "b"});
    bad.entries[1].rank = 3;
    EXPECT_THROW(fuse(std::vector<RankedList>{bad}, {}), Error);
}

TEST(Fuse, EmptyListsAreAllowed) {
    auto fused = fuse(std::vector<RankedList>{list_of("q", {}), list_of("q", {"a"})}, {});
    ASSERT_EQ(fused.entries.size(), 1u);
    EXPECT_NEAR(fused.entries[0].score, 1.1 / 61, 1e-15);
    EXPECT_TRUE(fuse(std::vector<RankedList>{list_of("q", {})}, {}).entries.empty());
}

TEST(FuseRuns, IdenticalRunsPreserveOrder) {
    std::mt19937_64 rng(3);
    exp4fuse::Run run;
    for (int q = 0; q < 5; ++q) run.push_back(oracle::random_list(rng, "q" + std::to_string(q), 50, 80));
    const exp4fuse::Run runs[] = {run, run};
    auto fused = fuse_runs(runs, {});
    ASSERT_EQ(fused.size(), run.size());
    for (std::size_t q = 0; q < run.size(); ++q) {
        EXPECT_EQ(fused[q].query_id, run[q].query_id);
        EXPECT_EQ(ids(fused[q]), ids(run[q]));
    }
}

TEST(FuseRuns, MissingQueriesAndEmptyRuns) {
    exp4fuse::Run a = {list_of("q1", {"a", "b"}), list_of("q2", {"c"})};
    exp4fuse::Run b = {list_of("q2", {"d", "c"}), list_of("q3", {"e"})};
    const exp4fuse::Run runs[] = {a, b};
    auto fused = fuse_runs(runs, {});
    ASSERT_EQ(fused.size(), 3u);
    EXPECT_EQ(fused[0].query_id, "q1");
    EXPECT_EQ(ids(fused[0]), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(ids(fused[1]), (std::vector<std::string>{"c", "d"}));
    EXPECT_EQ(fused[2].query_id, "q3");

    exp4fuse::Run c = {list_of("q9", {"x"})};
    const exp4fuse::Run disjoint[] = {a, c};
    EXPECT_THROW(fuse_runs(disjoint, {}), Error);
    const exp4fuse::Run none[] = {a, exp4fuse::Run{}};
    EXPECT_THROW(fuse_runs(none, {}), Error);
    EXPECT_THROW(fuse_runs(std::span<const exp4fuse::Run>{}, {}), Error);
    exp4fuse::Run dup = {list_of("q1", {"a"}), list_of("q1", {"b"})};
    const exp4fuse::Run dups[] = {dup};
    EXPECT_THROW(fuse_runs(dups, {}), Error);
}

TEST(FuseRuns, DeepListsMatchOracleAcrossThreads) {
    std::mt19937_64 rng(11);
    std::vector<exp4fuse::Run> runs(3);
    for (int q = 0; q < 4; ++q)
        for (auto& run : runs) run.push_back(oracle::random_list(rng, "q" + std::to_string(q), 1000, 1500));
    FusionConfig config;
    config.weights = {1.0, 0.7, 1.3};
    auto serial = fuse_runs(runs, config, 1);
    auto parallel = fuse_runs(runs, config, 4);
    EXPECT_EQ(serial, parallel);
    for (int q = 0; q < 4; ++q) {
        std::vector<RankedList> lists = {runs[0][q], runs[1][q], runs[2][q]};
        expect_matches_oracle(lists, config);
        EXPECT_EQ(serial[q].entries.size(), 1000u);
    }
}

TEST(FuseProperty, MatchesOracleOnRandomInstances) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng() % 4;
        FusionConfig config;
        std::uniform_real_distribution<double> w(0.1, 5.0);
        for (std::size_t i = 0; i < m; ++i) config.weights.push_back(w(rng));
        config.output_depth = 1 + rng() % 150;
        std::vector<RankedList> lists;
        for (std::size_t i = 0; i < m; ++i) lists.push_back(oracle::random_list(rng, "q", rng() % 60, 90));
        expect_matches_oracle(lists, config);
    }
}

TEST(FuseProperty, InvariantsOnRandomInstances) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng() % 4;
        std::vector<RankedList> lists;
        std::set<std::string> universe;
        for (std::size_t i = 0; i < m; ++i) {
            lists.push_back(oracle::random_list(rng, "q", 1 + rng() % 40, 60));
            for (const auto& e : lists.back().entries) universe.insert(e.doc_id);
        }
        auto entries = fuse_entries(lists, {});
        EXPECT_EQ(entries.size(), universe.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            EXPECT_GT(entries[i].fr_score, 0.0);
            EXPECT_GE(entries[i].n, 1);
            EXPECT_LE(entries[i].n, static_cast<int>(m));
            if (i) EXPECT_GE(entries[i - 1].fr_score, entries[i].fr_score);
        }

        // Symmetry: permuting the lists changes nothing.
        auto permuted = lists;
        std::shuffle(permuted.begin(), permuted.end(), rng);
        auto again = fuse(permuted, {});
        EXPECT_EQ(ids(again), ids(fuse(lists, {})));
        for (std::size_t i = 0; i < entries.size(); ++i) EXPECT_EQ(again.entries[i].score, entries[i].fr_score);

        // Monotonicity: raising a document in one list never lowers its score.
        auto& l = lists[rng() % m];
        if (l.entries.size() >= 2) {
            const std::size_t pos = 1 + rng() % (l.entries.size() - 1);
            const std::string moved = l.entries[pos].doc_id;
            const auto before = std::find_if(entries.begin(), entries.end(),
                                             [&](const FusedEntry& e) { return e.doc_id == moved; })->fr_score;
            std::swap(l.entries[pos].doc_id, l.entries[pos - 1].doc_id);
            auto after_entries = fuse_entries(lists, {});
            const auto after = std::find_if(after_entries.begin(), after_entries.end(),
                                            [&](const FusedEntry& e) { return e.doc_id == moved; })->fr_score;
            EXPECT_GT(after, before);
        }
    }
}

TEST(FuseProperty, MembershipBonusBeatsEqualRanks) {
    // A document at rank r in two lists outscores one at rank r in a single list.
    for (int r = 1; r <= 50; ++r) {
        std::vector<std::string> a(r), b(r);
        for (int i = 0; i < r; ++i) {
            a[i] = "a" + std::to_string(i);
            b[i] = "b" + std::to_string(i);
        }
        a.back() = "shared";
        b.back() = "shared";
        a.push_back("only");
        auto entries = fuse_entries(std::vector<RankedList>{list_of("q", a), list_of("q", b)}, {});
        double shared = 0, single_first = 0;
        for (const auto& e : entries) {
            if (e.doc_id == "shared") shared = e.fr_score;
            if (e.doc_id == "a0" && r > 1) single_first = e.fr_score;
        }
        EXPECT_NEAR(shared, 2 * 1.2 / (60.0 + r), 1e-15);
        if (r > 1) EXPECT_NEAR(single_first, 1.1 / 61, 1e-15);
    }
}
