// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace exp4fuse {

namespace {

template <typename T>
bool parse_number(std::string_view s, T& value) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
    fail(ErrorCode::Parse, util::location(source, line) + ": " + what);
}

void check_id(std::string_view id, const char* kind, const std::string& source, std::size_t line) {
    if (id.empty()) parse_error(source, line, std::string("empty ") + kind);
    if (util::contains_whitespace(id))
        parse_error(source, line, std::string(kind) + " '" + std::string(id) + "' contains whitespace");
}

}  // namespace

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) fail(ErrorCode::InvalidArgument, "relevance grade must be non-negative");
    by_query_[query_id][doc_id] = grade;
}

int Qrels::grade(std::string_view query_id, std::string_view doc_id) const {
    const auto* j = judgments(query_id);
    if (!j) return 0;
    auto it = j->find(std::string(doc_id));
    return it == j->end() ? 0 : it->second;
}

const Qrels::Judgments* Qrels::judgments(std::string_view query_id) const {
    auto it = by_query_.find(query_id);
    return it == by_query_.end() ? nullptr : &it->second;
}

std::size_t Qrels::size() const {
    std::size_t n = 0;
    for (const auto& [_, j] : by_query_) n += j.size();
    return n;
}

void RankedList::validate() const {
    std::unordered_set<std::string_view> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.rank != static_cast<int>(i + 1))
            fail(ErrorCode::InvalidArgument, "query '" + query_id + "': expected rank " +
                                                 std::to_string(i + 1) + ", found " +
                                                 std::to_string(e.rank));
        if (!seen.insert(e.doc_id).second)
            fail(ErrorCode::InvalidArgument,
                 "query '" + query_id + "': duplicate document '" + e.doc_id + "'");
        if (i > 0 && e.score > entries[i - 1].score)
            fail(ErrorCode::InvalidArgument, "query '" + query_id + "': score increases at rank " +
                                                 std::to_string(e.rank));
    }
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "tsv") return CorpusFormat::Tsv;
    if (name == "jsonl") return CorpusFormat::Jsonl;
    fail(ErrorCode::InvalidArgument, "unknown corpus format '" + std::string(name) + "' (expected tsv or jsonl)");
}

std::vector<Document> parse_corpus(std::istream& in, CorpusFormat format, const std::string& source) {
    std::vector<Document> docs;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        util::chomp(line);
        if (util::trim(line).empty()) continue;

        Document doc;
        if (format == CorpusFormat::Tsv) {
            auto fields = util::split(line, '\t');
            if (fields.size() != 2)
                parse_error(source, lineno, "expected 2 tab-separated columns, found " +
                                                std::to_string(fields.size()));
            doc.doc_id = std::string(fields[0]);
            doc.text = std::string(fields[1]);
        } else {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                parse_error(source, lineno, std::string("invalid JSON: ") + e.what());
            }
            if (!obj.is_object() || !obj.contains("id") || !obj.contains("contents"))
                parse_error(source, lineno, "expected an object with \"id\" and \"contents\"");
            if (!obj["id"].is_string() || !obj["contents"].is_string())
                parse_error(source, lineno, "\"id\" and \"contents\" must be strings");
            doc.doc_id = obj["id"].get<std::string>();
            doc.text = obj["contents"].get<std::string>();
        }
        check_id(doc.doc_id, "doc_id", source, lineno);
        if (!ids.insert(doc.doc_id).second)
            parse_error(source, lineno, "duplicate doc_id '" + doc.doc_id + "'");
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Document> load_corpus(const std::string& path, CorpusFormat format) {
    auto in = util::open_input(path);
    return parse_corpus(in, format, path);
}

std::vector<Query> parse_queries(std::istream& in, const std::string& source) {
    std::vector<Query> queries;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        util::chomp(line);
        if (util::trim(line).empty()) continue;
        auto fields = util::split(line, '\t');
        if (fields.size() != 2)
            parse_error(source, lineno, "expected 2 tab-separated columns, found " +
                                            std::to_string(fields.size()));
        Query q{std::string(fields[0]), std::string(fields[1])};
        check_id(q.query_id, "query_id", source, lineno);
        if (!ids.insert(q.query_id).second)
            parse_error(source, lineno, "duplicate query_id '" + q.query_id + "'");
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<Query> load_queries(const std::string& path) {
    auto in = util::open_input(path);
    return parse_queries(in, path);
}

Qrels parse_qrels(std::istream& in, const std::string& source) {
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = util::split_whitespace(line);
        if (fields.empty()) continue;
        if (fields.size() != 4)
            parse_error(source, lineno, "expected 4 columns 'qid 0 docid rel', found " +
                                            std::to_string(fields.size()));
        int grade = 0;
        if (!parse_number(fields[3], grade))
            parse_error(source, lineno, "non-integer relevance grade '" + std::string(fields[3]) + "'");
        if (grade < 0) parse_error(source, lineno, "negative relevance grade " + std::to_string(grade));
        qrels.set(std::string(fields[0]), std::string(fields[2]), grade);
    }
    return qrels;
}

Qrels load_qrels(const std::string& path) {
    auto in = util::open_input(path);
    return parse_qrels(in, path);
}

void write_qrels(const Qrels& qrels, std::ostream& out) {
    for (const auto& [qid, judgments] : qrels.by_query())
        for (const auto& [doc, grade] : judgments) out << qid << " 0 " << doc << ' ' << grade << '\n';
}

void write_qrels(const Qrels& qrels, const std::string& path) {
    auto out = util::open_output(path);
    write_qrels(qrels, out);
}

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", score);
    return buf;
}

Run parse_run(std::istream& in, const std::string& source) {
    Run run;
    std::unordered_map<std::string, std::size_t> slot;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto f = util::split_whitespace(line);
        if (f.empty()) continue;
        if (f.size() != 6)
            parse_error(source, lineno, "expected 6 columns 'qid Q0 docid rank score tag', found " +
                                            std::to_string(f.size()));
        RunEntry e;
        e.doc_id = std::string(f[2]);
        if (!parse_number(f[3], e.rank) || e.rank < 1)
            parse_error(source, lineno, "invalid rank '" + std::string(f[3]) + "'");
        if (!parse_number(f[4], e.score))
            parse_error(source, lineno, "invalid score '" + std::string(f[4]) + "'");

        std::string qid(f[0]);
        auto [it, inserted] = slot.try_emplace(qid, run.size());
        if (inserted) run.push_back(RankedList{qid, {}, std::string(f[5])});
        run[it->second].entries.push_back(std::move(e));
    }
    for (auto& list : run) {
        std::stable_sort(list.entries.begin(), list.entries.end(),
                         [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
        try {
            list.validate();
        } catch (const Error& e) {
            fail(ErrorCode::Parse, source + ": " + e.what());
        }
    }
    return run;
}

Run read_run(const std::string& path) {
    auto in = util::open_input(path);
    return parse_run(in, path);
}

void write_run(const Run& run, std::ostream& out) {
    std::unordered_set<std::string_view> seen;
    for (const auto& list : run) {
        if (!seen.insert(list.query_id).second)
            fail(ErrorCode::InvalidArgument, "run contains query '" + list.query_id + "' twice");
        if (list.query_id.empty() || util::contains_whitespace(list.query_id))
            fail(ErrorCode::InvalidArgument, "invalid query_id '" + list.query_id + "' in run");
        if (list.tag.empty() || util::contains_whitespace(list.tag))
            fail(ErrorCode::InvalidArgument, "run tag must be a non-empty token");
        list.validate();
        for (const auto& e : list.entries) {
            if (e.doc_id.empty() || util::contains_whitespace(e.doc_id))
                fail(ErrorCode::InvalidArgument, "invalid doc_id '" + e.doc_id + "' in run");
            out << list.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' '
                << format_score(e.score) << ' ' << list.tag << '\n';
        }
    }
}

void write_run(const Run& run, const std::string& path) {
    auto out = util::open_output(path);
    write_run(run, out);
    if (!out) fail(ErrorCode::Io, "failed writing run file '" + path + "'");
}

}  // namespace exp4fuse
