// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "llm.hpp"

namespace exp4fuse {

inline constexpr std::string_view kQuestionPlaceholder = "[question_text]";
inline constexpr std::string_view kQueryPlaceholder = "[query]";

/// An instruction with exactly one placeholder that is replaced by the
/// query text.
struct PromptTemplate {
    std::string text;
    std::string dataset_tag;
    std::string placeholder = std::string(kQuestionPlaceholder);

    void validate() const;
    bool operator==(const PromptTemplate&) const = default;
};

std::string render_prompt(const PromptTemplate& tmpl, const Query& query);

/// Hypothetical-document instructions keyed by dataset tag.
class TemplateRegistry {
  public:
    /// Starts with the built-in dataset templates.
    TemplateRegistry();

    void register_template(PromptTemplate tmpl);
    const PromptTemplate& select(std::string_view dataset_tag) const;
    std::vector<std::string> tags() const;

  private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// Built-in templates only.
PromptTemplate select_template(std::string_view dataset_tag);

const PromptTemplate& multi_query_template();
const PromptTemplate& step_back_template();

struct ExpansionStrategy {
    enum class Kind { HypotheticalDoc, MultiQuery, StepBack };

    Kind kind = Kind::HypotheticalDoc;
    /// Number of copies of the original query placed before the generation.
    int lambda = 5;

    static ExpansionStrategy hypothetical(int lambda = 5) { return {Kind::HypotheticalDoc, lambda}; }
    static ExpansionStrategy multi_query(int lambda = 2) { return {Kind::MultiQuery, lambda}; }
    static ExpansionStrategy step_back(int lambda = 5) { return {Kind::StepBack, lambda}; }

    /// Parses "hyde", "multi" or "stepback" with the default lambda.
    static ExpansionStrategy parse(std::string_view name);

    /// "hyde", "multi" or "stepback".
    std::string name() const;
    /// Route tag used in run files: "eq", "mq" or "sbq".
    std::string route_tag() const;

    bool operator==(const ExpansionStrategy&) const = default;
};

struct ExpandedQuery {
    std::string query_id;
    std::string text;
    ExpansionStrategy strategy;
    std::string raw_generation;
    /// Set when generation failed and `text` is the original query.
    bool fallback = false;
    std::string error;

    bool operator==(const ExpandedQuery&) const = default;
};

/// concat(query x lambda, generation), space separated.
ExpandedQuery expand_hypothetical(const Query& query, const std::string& generation, int lambda);
ExpandedQuery expand_stepback(const Query& query, const std::string& generation, int lambda);

/// Splits a model response into exactly five query variants: one per
/// non-empty line with list markers removed, padded with the original query
/// or truncated.
std::vector<std::string> parse_query_variants(std::string_view response, const Query& query);

/// concat(query x lambda, v1, ..., v5). `variants` must hold five strings.
ExpandedQuery expand_multi(const Query& query, std::span<const std::string> variants, int lambda,
                           std::string raw_generation = {});

/// Prompt sent to the model for one query under one strategy.
std::string expansion_prompt(const Query& query, const ExpansionStrategy& strategy, const PromptTemplate& tmpl);

/// Generates and assembles the expansion for one query. Throws on LLM errors.
ExpandedQuery expand_query(const Query& query, const ExpansionStrategy& strategy, const PromptTemplate& tmpl,
                           Generator& generator, const GenerationParams& params);

/// Expands a batch with at most `max_in_flight` concurrent generations.
/// A query whose generation fails falls back to its original text and is
/// flagged. Output order follows `queries`.
std::vector<ExpandedQuery> expand_queries(std::span<const Query> queries, const ExpansionStrategy& strategy,
                                          const PromptTemplate& tmpl, Generator& generator,
                                          const GenerationParams& params, unsigned max_in_flight = 4);

void write_expanded(std::span<const ExpandedQuery> expanded, const std::string& path);
std::vector<ExpandedQuery> read_expanded(const std::string& path);

}  // namespace exp4fuse
