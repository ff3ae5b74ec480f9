// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "eval.hpp"
#include "expand.hpp"
#include "fuse.hpp"
#include "index.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "test_util.hpp"

using namespace exp4fuse;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::string detail;

    /// Records the first failure only.
    void check(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

bool same_order(const RankedList& actual, const std::vector<oracle::Scored>& expected, double tol, std::string& why) {
    if (actual.entries.size() != expected.size()) {
        why = "length " + std::to_string(actual.entries.size()) + " != " + std::to_string(expected.size());
        return false;
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& e = actual.entries[i];
        if (e.doc_id != expected[i].id) {
            why = "position " + std::to_string(i) + ": " + e.doc_id + " != " + expected[i].id;
            return false;
        }
        if (std::abs(e.score - expected[i].score) > tol) {
            why = "score of " + e.doc_id + ": " + fmt(e.score) + " != " + fmt(expected[i].score);
            return false;
        }
    }
    return true;
}

// 1. Fusion matches a brute-force evaluator on random instances.
Outcome fusion_oracle() {
    Outcome out;
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> weight(0.1, 5.0);
    const auto start = Clock::now();
    for (int trial = 0; trial < 1000 && out.ok; ++trial) {
        const std::size_t m = 1 + rng() % 4;
        FusionConfig config;
        for (std::size_t i = 0; i < m; ++i) config.weights.push_back(weight(rng));
        std::vector<RankedList> lists;
        for (std::size_t i = 0; i < m; ++i) lists.push_back(oracle::random_list(rng, "q", rng() % 201, 300));
        const auto expected =
            oracle::fuse(lists, config.weights, config.k, config.bonus_divisor, config.output_depth, 1e-12);
        std::string why;
        out.check(same_order(fuse(lists, config), expected, 1e-12, why), "instance " + std::to_string(trial) + ": " + why);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    out.check(secs < 30.0, "took " + fmt(secs, "%.2f") + " s");
    if (out.ok) out.detail = "1000 instances in " + fmt(secs, "%.2f") + " s";
    return out;
}

// 2. Closed-form values and single-list order preservation.
Outcome closed_form() {
    Outcome out;
    const RankedList a{"q", {{"d", 1, 5.0}}, "a"};
    const RankedList b{"q", {{"d", 1, 7.0}}, "b"};
    const RankedList pair[] = {a, b};
    const double score = fuse(pair, {}).entries.at(0).score;
    out.check(std::abs(score - 2.4 / 61.0) <= 1e-12, "rank-1 score " + fmt(score) + " != 2.4/61");

    std::mt19937_64 rng(2002);
    for (int trial = 0; trial < 100 && out.ok; ++trial) {
        const RankedList single[] = {oracle::random_list(rng, "q", 1 + rng() % 200, 400)};
        const auto fused = fuse(single, {});
        bool same = fused.entries.size() == single[0].entries.size();
        for (std::size_t i = 0; same && i < fused.entries.size(); ++i)
            same = fused.entries[i].doc_id == single[0].entries[i].doc_id;
        out.check(same, "single list " + std::to_string(trial) + " reordered");
    }
    if (out.ok) out.detail = "2.4/61 = " + fmt(score, "%.12f") + ", 100 single lists preserved";
    return out;
}

// 3. BM25 search matches exhaustive scoring on random corpora.
Outcome bm25_oracle() {
    Outcome out;
    std::mt19937_64 rng(3003);
    const auto start = Clock::now();
    std::size_t queries = 0;
    for (int trial = 0; trial < 200 && out.ok; ++trial) {
        const std::size_t n_docs = 1 + rng() % 1000;
        const std::size_t vocab = 1 + rng() % 500;
        const auto docs = oracle::random_corpus(rng, n_docs, vocab, 40);
        const auto index = InvertedIndex::build(docs);
        const oracle::Bm25 ref(docs, 0.9, 0.4);
        for (int q = 0; q < 3 && out.ok; ++q, ++queries) {
            const auto text = oracle::random_query(rng, vocab, 6);
            const std::size_t k = 1 + rng() % (n_docs + 5);
            std::string why;
            out.check(same_order(index.search("q", text, k, "t"), ref.top_k(text, k, 1e-12), 1e-12, why),
                      "corpus " + std::to_string(trial) + " query '" + text + "': " + why);
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    out.check(secs < 60.0, "took " + fmt(secs, "%.2f") + " s");
    if (out.ok) out.detail = "200 corpora, " + std::to_string(queries) + " queries in " + fmt(secs, "%.2f") + " s";
    return out;
}

// 4. Repeating a query lambda times scales every score by lambda.
Outcome repetition_linearity() {
    Outcome out;
    std::mt19937_64 rng(4004);
    double worst = 0.0;
    for (int trial = 0; trial < 100 && out.ok; ++trial) {
        const std::size_t vocab = 5 + rng() % 100;
        const auto docs = oracle::random_corpus(rng, 1 + rng() % 200, vocab, 30);
        const auto index = InvertedIndex::build(docs);
        const auto query = oracle::random_query(rng, vocab, 5);
        const int lambda = 1 + static_cast<int>(rng() % 10);
        std::string repeated;
        for (int i = 0; i < lambda; ++i) repeated += (i ? " " : "") + query;

        const auto single = index.search("q", query, docs.size(), "t");
        const auto scaled = index.search("q", repeated, docs.size(), "t");
        std::map<std::string, double> base;
        for (const auto& e : single.entries) base[e.doc_id] = e.score;
        out.check(scaled.entries.size() == single.entries.size(), "triple " + std::to_string(trial) + ": result sizes differ");
        for (const auto& e : scaled.entries) {
            const double diff = std::abs(e.score - lambda * base[e.doc_id]);
            worst = std::max(worst, diff);
            out.check(diff <= 1e-9, "triple " + std::to_string(trial) + " doc " + e.doc_id + ": off by " + fmt(diff));
        }
    }
    if (out.ok) out.detail = "100 triples, max deviation " + fmt(worst, "%.3g");
    return out;
}

double aggregate(const Run& run, const Qrels& qrels, Metric m) {
    const Metric ms[] = {m};
    const EvalConfig config;
    return evaluate(run, qrels, config, ms).aggregate.at(metric_name(m, config));
}

RankedList ranked(const std::string& qid, const std::vector<std::string>& docs) {
    RankedList l{qid, {}, "r"};
    for (std::size_t i = 0; i < docs.size(); ++i)
        l.entries.push_back({docs[i], static_cast<int>(i + 1), 10.0 - static_cast<double>(i)});
    return l;
}

// 5. Metrics match a brute-force scorer, plus fixed hand cases.
Outcome metric_oracle() {
    Outcome out;
    std::mt19937_64 rng(5005);
    for (int trial = 0; trial < 100 && out.ok; ++trial) {
        Run run;
        Qrels qrels;
        const int nq = 1 + static_cast<int>(rng() % 6);
        for (int q = 0; q < nq; ++q) {
            const std::string qid = "q" + std::to_string(q);
            run.push_back(oracle::random_list(rng, qid, rng() % 1200, 1500));
            for (int d = 0; d < 1500; ++d)
                if (rng() % 20 == 0) qrels.set(qid, "d" + std::to_string(d), static_cast<int>(rng() % 4));
        }
        const auto report = evaluate(run, qrels, {});
        std::map<std::string, double> sums;
        for (const auto& [qid, _] : qrels.by_query()) {
            RankedList list{qid, {}, "none"};
            for (const auto& l : run)
                if (l.query_id == qid) list = l;
            const auto g = oracle::grades_in_rank_order(list, qrels);
            const auto judged = oracle::judged_grades(qrels, qid);
            sums["map"] += oracle::ap(g, judged, 1);
            sums["ndcg@10"] += oracle::ndcg(g, judged, 10, true);
            sums["mrr@10"] += oracle::rr(g, 10, 1);
            sums["recall@1000"] += oracle::recall(g, judged, 1000, 1);
        }
        const double n = static_cast<double>(qrels.by_query().size());
        for (const auto& [name, sum] : sums)
            out.check(std::abs(report.aggregate.at(name) - sum / n) <= 1e-12,
                      "instance " + std::to_string(trial) + " " + name + ": " + fmt(report.aggregate.at(name)) +
                          " != " + fmt(sum / n));
    }

    Qrels one;
    one.set("q", "c", 1);
    const double mrr = aggregate({ranked("q", {"a", "b", "c"})}, one, Metric::Mrr);
    out.check(std::abs(mrr - 1.0 / 3) <= 1e-12, "hand MRR " + fmt(mrr));
    Qrels two;
    two.set("q", "a", 1);
    two.set("q", "d", 1);
    const double map = aggregate({ranked("q", {"a", "b", "c", "d"})}, two, Metric::Map);
    out.check(std::abs(map - 0.75) <= 1e-12, "hand MAP " + fmt(map));
    Qrels graded;
    graded.set("q", "a", 3);
    graded.set("q", "b", 2);
    graded.set("q", "c", 1);
    const double ndcg = aggregate({ranked("q", {"a", "b", "c", "x"})}, graded, Metric::Ndcg);
    out.check(std::abs(ndcg - 1.0) <= 1e-12, "hand nDCG " + fmt(ndcg));
    if (out.ok) out.detail = "100 instances; MRR " + fmt(mrr, "%.4f") + ", MAP " + fmt(map, "%.2f") + ", nDCG " + fmt(ndcg, "%.1f");
    return out;
}

// 6. Run and qrels files survive write -> read -> write unchanged.
Outcome round_trip() {
    Outcome out;
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> mag(-8, 3);
    for (int trial = 0; trial < 50 && out.ok; ++trial) {
        Run run;
        Qrels qrels;
        const int nq = 1 + static_cast<int>(rng() % 8);
        for (int q = 0; q < nq; ++q) {
            const std::string qid = "topic-" + std::to_string(rng() % 100000);
            if (std::any_of(run.begin(), run.end(), [&](const RankedList& l) { return l.query_id == qid; })) continue;
            auto list = oracle::random_list(rng, qid, rng() % 1000, 2000, "route_" + std::to_string(trial));
            double score = std::pow(10.0, mag(rng));
            for (auto& e : list.entries) {
                e.score = score;
                if (rng() % 3) score -= score * 0.01 * static_cast<double>(rng() % 50) / 50.0;
            }
            run.push_back(std::move(list));
            for (int j = 0; j < 20; ++j) qrels.set(qid, "doc/" + std::to_string(rng() % 5000), static_cast<int>(rng() % 5));
        }
        std::ostringstream first, second, qfirst, qsecond;
        write_run(run, first);
        std::istringstream in(first.str());
        write_run(parse_run(in), second);
        out.check(first.str() == second.str(), "run " + std::to_string(trial) + " changed on round trip");

        write_qrels(qrels, qfirst);
        std::istringstream qin(qfirst.str());
        const auto reread = parse_qrels(qin);
        write_qrels(reread, qsecond);
        out.check(qfirst.str() == qsecond.str(), "qrels " + std::to_string(trial) + " changed on round trip");
        out.check(reread == qrels, "qrels " + std::to_string(trial) + " lost judgments");
    }
    if (out.ok) out.detail = "50 runs and qrels byte-identical";
    return out;
}

std::map<std::string, std::string> artifacts(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        auto content = testutil::read_file(entry.path().string());
        if (name == "generations.jsonl") {
            // Cache records carry a wall-clock timestamp and are appended in
            // completion order; compare the sorted records without it.
            std::istringstream lines(content);
            std::string line;
            std::vector<std::string> records;
            while (std::getline(lines, line)) {
                auto j = nlohmann::json::parse(line);
                j.erase("timestamp");
                records.push_back(j.dump());
            }
            std::sort(records.begin(), records.end());
            content.clear();
            for (const auto& r : records) content += r + "\n";
        }
        files[name] = std::move(content);
    }
    return files;
}

// 7. Mock end-to-end run: fusion helps and the pipeline is reproducible.
Outcome end_to_end() {
    Outcome out;
    const std::string data = std::string(EXP4FUSE_TEST_DATA_DIR) + "/synthetic";
    testutil::TempDir dir;
    auto configure = [&](const std::string& name) {
        PipelineConfig c;
        c.corpus = data + "/corpus.tsv";
        c.queries = data + "/queries.tsv";
        c.qrels = data + "/qrels.txt";
        c.mock = true;
        c.mock_fixtures = data + "/mock_fixtures.jsonl";
        c.mock_fallback = "error";
        c.output_dir = dir.file(name);
        return c;
    };
    const auto start = Clock::now();
    const auto first = cmd_pipeline(configure("a"));
    const auto second = cmd_pipeline(configure("b"));
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();

    double oq = -1, fused = -1;
    for (const auto& [label, report] : first.reports) {
        if (label == "oq") oq = report.aggregate.at("ndcg@10");
        if (label == "oq+eq") fused = report.aggregate.at("ndcg@10");
    }
    out.check(oq >= 0 && fused >= 0, "missing oq or oq+eq report");
    out.check(fused >= oq, "fused nDCG@10 " + fmt(fused, "%.4f") + " < original " + fmt(oq, "%.4f"));
    out.check(first.routes.size() == 2 && first.routes[1].fallback_count == 0, "expansion fell back to the original query");
    out.check(artifacts(dir.file("a")) == artifacts(dir.file("b")), "two invocations produced different artifacts");
    out.check(secs < 60.0, "took " + fmt(secs, "%.2f") + " s");
    if (out.ok)
        out.detail = "nDCG@10 oq " + fmt(oq, "%.4f") + " -> oq+eq " + fmt(fused, "%.4f") + ", reproducible, " +
                     fmt(secs, "%.2f") + " s";
    return out;
}

// 8. Built-in templates equal the published instructions.
Outcome prompt_fidelity() {
    Outcome out;
    const std::pair<const char*, const char*> expected[] = {
        {"dl19", "Please write a passage to answer the question. [question_text]"},
        {"dl20", "Please write a passage to answer the question. [question_text]"},
        {"msmarco", "Please write a passage to answer the question. [question_text]"},
        {"nq", "Please write a passage to answer the question. [question_text]"},
        {"fiqa", "Please write a financial article passage to answer the question. [question_text]"},
        {"trec-news", "Please write a news passage about the topic. [question_text]"},
        {"robust04", "Please write a news passage about the topic. [question_text]"},
        {"touche2020", "Please write a counter argument for the passage. [question_text]"},
        {"dbpedia", "Please write a passage to answer the question. [question_text]"},
        {"scifact", "Please write a scientific paper passage to support/refute the claim. [question_text]"},
    };
    for (const auto& [tag, text] : expected) {
        const auto tmpl = select_template(tag);
        out.check(tmpl.text == text, std::string(tag) + ": '" + tmpl.text + "'");
        out.check(tmpl.dataset_tag == tag, std::string(tag) + ": wrong dataset tag '" + tmpl.dataset_tag + "'");
    }
    if (out.ok) out.detail = "10 templates verbatim";
    return out;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"1 fusion oracle equivalence", fusion_oracle},
        {"2 fusion closed-form checks", closed_form},
        {"3 bm25 oracle equivalence", bm25_oracle},
        {"4 query repetition linearity", repetition_linearity},
        {"5 metric oracle equivalence", metric_oracle},
        {"6 run and qrels round trip", round_trip},
        {"7 mock end-to-end pipeline", end_to_end},
        {"8 prompt template fidelity", prompt_fidelity},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += !o.ok;
        std::printf("[%s] %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
