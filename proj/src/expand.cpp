// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "expand.hpp"

#include <cctype>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace exp4fuse {

namespace {

constexpr std::string_view kPassageToAnswer = "Please write a passage to answer the question. [question_text]";
constexpr std::string_view kNewsPassage = "Please write a news passage about the topic. [question_text]";

const std::pair<std::string_view, std::string_view> kBuiltinTemplates[] = {
    {"msmarco", kPassageToAnswer},
    {"dl19", kPassageToAnswer},
    {"dl20", kPassageToAnswer},
    {"nq", kPassageToAnswer},
    {"dbpedia", kPassageToAnswer},
    {"fiqa", "Please write a financial article passage to answer the question. [question_text]"},
    {"trec-news", kNewsPassage},
    {"robust04", kNewsPassage},
    {"touche2020", "Please write a counter argument for the passage. [question_text]"},
    {"scifact", "Please write a scientific paper passage to support/refute the claim. [question_text]"},
};

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size()))
        ++n;
    return n;
}

std::string repeat_then(const std::string& query, int lambda, const std::vector<std::string>& tail) {
    std::vector<std::string> parts(static_cast<std::size_t>(lambda), query);
    parts.insert(parts.end(), tail.begin(), tail.end());
    return util::join(parts, " ");
}

void check_lambda(int lambda) {
    if (lambda < 0) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
}

ExpandedQuery expand_with_passage(const Query& query, const std::string& generation, int lambda,
                                  ExpansionStrategy strategy) {
    check_lambda(lambda);
    if (util::trim(generation).empty()) throw LlmError("empty generation for query '" + query.query_id + "'", false);
    strategy.lambda = lambda;
    return ExpandedQuery{query.query_id, repeat_then(query.text, lambda, {generation}), strategy, generation, false, {}};
}

// "1. foo", "2) foo", "- foo", "* foo" -> "foo"
std::string_view strip_list_marker(std::string_view line) {
    line = util::trim(line);
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')' || line[i] == ':')) {
        line.remove_prefix(i + 1);
    } else if (!line.empty() && (line.front() == '-' || line.front() == '*')) {
        line.remove_prefix(1);
    } else if (line.starts_with("•")) {
        line.remove_prefix(std::string_view("•").size());
    }
    return util::trim(line);
}

}  // namespace

void PromptTemplate::validate() const {
    if (placeholder.empty()) fail(ErrorCode::InvalidArgument, "prompt template placeholder is empty");
    const auto n = count_occurrences(text, placeholder);
    if (n != 1)
        fail(ErrorCode::InvalidArgument, "prompt template must contain exactly one " + placeholder + " placeholder, found " +
                                             std::to_string(n));
}

std::string render_prompt(const PromptTemplate& tmpl, const Query& query) {
    tmpl.validate();
    auto out = tmpl.text;
    out.replace(out.find(tmpl.placeholder), tmpl.placeholder.size(), query.text);
    return out;
}

TemplateRegistry::TemplateRegistry() {
    for (const auto& [tag, text] : kBuiltinTemplates)
        templates_.emplace(std::string(tag), PromptTemplate{std::string(text), std::string(tag)});
}

void TemplateRegistry::register_template(PromptTemplate tmpl) {
    tmpl.validate();
    if (tmpl.dataset_tag.empty()) fail(ErrorCode::InvalidArgument, "prompt template needs a dataset tag");
    auto tag = tmpl.dataset_tag;
    templates_.insert_or_assign(std::move(tag), std::move(tmpl));
}

const PromptTemplate& TemplateRegistry::select(std::string_view dataset_tag) const {
    auto it = templates_.find(dataset_tag);
    if (it == templates_.end())
        fail(ErrorCode::InvalidArgument, "unknown dataset tag '" + std::string(dataset_tag) +
                                             "'; known tags: " + util::join(tags(), ", "));
    return it->second;
}

std::vector<std::string> TemplateRegistry::tags() const {
    std::vector<std::string> out;
    for (const auto& [tag, _] : templates_) out.push_back(tag);
    return out;
}

PromptTemplate select_template(std::string_view dataset_tag) {
    static const TemplateRegistry builtin;
    return builtin.select(dataset_tag);
}

const PromptTemplate& multi_query_template() {
    static const PromptTemplate t{"Your task is to generate five different versions of the given question. [query]",
                                  "multi", std::string(kQueryPlaceholder)};
    return t;
}

const PromptTemplate& step_back_template() {
    static const PromptTemplate t{"What are the principles or mechanisms behind this question? [query]", "stepback",
                                  std::string(kQueryPlaceholder)};
    return t;
}

ExpansionStrategy ExpansionStrategy::parse(std::string_view name) {
    if (name == "hyde" || name == "hypothetical") return hypothetical();
    if (name == "multi" || name == "multi-query") return multi_query();
    if (name == "stepback" || name == "step-back") return step_back();
    fail(ErrorCode::InvalidArgument, "unknown expansion strategy '" + std::string(name) +
                                         "' (expected hyde, multi or stepback)");
}

std::string ExpansionStrategy::name() const {
    switch (kind) {
        case Kind::HypotheticalDoc: return "hyde";
        case Kind::MultiQuery: return "multi";
        case Kind::StepBack: return "stepback";
    }
    return "?";
}

std::string ExpansionStrategy::route_tag() const {
    switch (kind) {
        case Kind::HypotheticalDoc: return "eq";
        case Kind::MultiQuery: return "mq";
        case Kind::StepBack: return "sbq";
    }
    return "?";
}

ExpandedQuery expand_hypothetical(const Query& query, const std::string& generation, int lambda) {
    return expand_with_passage(query, generation, lambda, ExpansionStrategy::hypothetical(lambda));
}

ExpandedQuery expand_stepback(const Query& query, const std::string& generation, int lambda) {
    return expand_with_passage(query, generation, lambda, ExpansionStrategy::step_back(lambda));
}

std::vector<std::string> parse_query_variants(std::string_view response, const Query& query) {
    std::vector<std::string> variants;
    for (auto line : util::split(response, '\n')) {
        auto v = strip_list_marker(line);
        if (!v.empty()) variants.emplace_back(v);
        if (variants.size() == 5) break;
    }
    while (variants.size() < 5) variants.push_back(query.text);
    return variants;
}

ExpandedQuery expand_multi(const Query& query, std::span<const std::string> variants, int lambda,
                           std::string raw_generation) {
    check_lambda(lambda);
    if (variants.size() != 5)
        fail(ErrorCode::InvalidArgument, "multi-query expansion needs 5 variants, got " +
                                             std::to_string(variants.size()));
    std::vector<std::string> tail(variants.begin(), variants.end());
    if (raw_generation.empty()) raw_generation = util::join(tail, "\n");
    return ExpandedQuery{query.query_id, repeat_then(query.text, lambda, tail), ExpansionStrategy::multi_query(lambda),
                         std::move(raw_generation), false, {}};
}

std::string expansion_prompt(const Query& query, const ExpansionStrategy& strategy, const PromptTemplate& tmpl) {
    switch (strategy.kind) {
        case ExpansionStrategy::Kind::HypotheticalDoc: return render_prompt(tmpl, query);
        case ExpansionStrategy::Kind::MultiQuery: return render_prompt(multi_query_template(), query);
        case ExpansionStrategy::Kind::StepBack: return render_prompt(step_back_template(), query);
    }
    fail(ErrorCode::Internal, "unknown expansion strategy");
}

ExpandedQuery expand_query(const Query& query, const ExpansionStrategy& strategy, const PromptTemplate& tmpl,
                           Generator& generator, const GenerationParams& params) {
    const auto generation = generator.generate(expansion_prompt(query, strategy, tmpl), params);
    switch (strategy.kind) {
        case ExpansionStrategy::Kind::HypotheticalDoc: return expand_hypothetical(query, generation, strategy.lambda);
        case ExpansionStrategy::Kind::StepBack: return expand_stepback(query, generation, strategy.lambda);
        case ExpansionStrategy::Kind::MultiQuery:
            return expand_multi(query, parse_query_variants(generation, query), strategy.lambda, generation);
    }
    fail(ErrorCode::Internal, "unknown expansion strategy");
}

std::vector<ExpandedQuery> expand_queries(std::span<const Query> queries, const ExpansionStrategy& strategy,
                                          const PromptTemplate& tmpl, Generator& generator,
                                          const GenerationParams& params, unsigned max_in_flight) {
    check_lambda(strategy.lambda);
    params.validate();
    std::vector<ExpandedQuery> out(queries.size());
    util::parallel_for(queries.size(), max_in_flight, [&](std::size_t i) {
        const auto& q = queries[i];
        try {
            out[i] = expand_query(q, strategy, tmpl, generator, params);
        } catch (const LlmError& e) {
            out[i] = ExpandedQuery{q.query_id, q.text, strategy, {}, true, e.what()};
        }
    });
    return out;
}

void write_expanded(std::span<const ExpandedQuery> expanded, const std::string& path) {
    auto out = util::open_output(path);
    for (const auto& e : expanded) {
        nlohmann::ordered_json j{{"query_id", e.query_id},
                                 {"text", e.text},
                                 {"strategy", e.strategy.name()},
                                 {"lambda", e.strategy.lambda},
                                 {"raw_generation", e.raw_generation},
                                 {"fallback", e.fallback}};
        if (!e.error.empty()) j["error"] = e.error;
        out << j.dump() << '\n';
    }
    if (!out) fail(ErrorCode::Io, "failed writing '" + path + "'");
}

std::vector<ExpandedQuery> read_expanded(const std::string& path) {
    auto in = util::open_input(path);
    std::vector<ExpandedQuery> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            ExpandedQuery e;
            e.query_id = j.at("query_id").get<std::string>();
            e.text = j.at("text").get<std::string>();
            e.strategy = ExpansionStrategy::parse(j.at("strategy").get<std::string>());
            e.strategy.lambda = j.at("lambda").get<int>();
            e.raw_generation = j.at("raw_generation").get<std::string>();
            e.fallback = j.value("fallback", false);
            e.error = j.value("error", "");
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, util::location(path, lineno) + ": bad expanded query: " + e.what());
        }
    }
    return out;
}

}  // namespace exp4fuse
