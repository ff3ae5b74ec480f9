// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace exp4fuse {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    fail(ErrorCode::InvalidArgument, "config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_as(const std::string& key, const std::string& raw, const char* expected) {
    auto s = util::trim(raw);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, raw, expected);
    return value;
}

double to_double(const std::string& k, const std::string& v) { return parse_as<double>(k, v, "a number"); }
int to_int(const std::string& k, const std::string& v) { return parse_as<int>(k, v, "an integer"); }

std::size_t to_size(const std::string& k, const std::string& v) {
    return parse_as<std::size_t>(k, v, "a non-negative integer");
}

unsigned to_unsigned(const std::string& k, const std::string& v) {
    return parse_as<unsigned>(k, v, "a non-negative integer");
}

bool to_bool(const std::string& k, const std::string& v) {
    auto s = util::trim(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    bad_value(k, v, "a boolean");
}

std::vector<std::string> to_list(std::string_view v, char sep) {
    std::vector<std::string> out;
    for (auto part : util::split(v, sep)) {
        auto t = util::trim(part);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Field {
    const char* key;
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Field>& fields() {
    using C = PipelineConfig;
    using S = const std::string&;
    static const std::vector<Field> table = {
        {"corpus", [](C& c, S, S v) { c.corpus = v; }, [](const C& c) { return c.corpus; }},
        {"corpus_format", [](C& c, S, S v) { c.corpus_format = parse_corpus_format(util::trim(v)); },
         [](const C& c) { return std::string(c.corpus_format == CorpusFormat::Tsv ? "tsv" : "jsonl"); }},
        {"queries", [](C& c, S, S v) { c.queries = v; }, [](const C& c) { return c.queries; }},
        {"qrels", [](C& c, S, S v) { c.qrels = v; }, [](const C& c) { return c.qrels; }},
        {"dataset", [](C& c, S, S v) { c.dataset = util::trim(v); }, [](const C& c) { return c.dataset; }},
        {"strategies",
         [](C& c, S, S v) {
             c.strategies = to_list(v, ',');
             for (const auto& s : c.strategies) ExpansionStrategy::parse(s);
         },
         [](const C& c) { return util::join(c.strategies, ","); }},
        {"lambda", [](C& c, S k, S v) { c.lambda = to_int(k, v); }, [](const C& c) { return std::to_string(c.lambda); }},
        {"lambda_multi", [](C& c, S k, S v) { c.lambda_multi = to_int(k, v); },
         [](const C& c) { return std::to_string(c.lambda_multi); }},
        {"lambda_stepback", [](C& c, S k, S v) { c.lambda_stepback = to_int(k, v); },
         [](const C& c) { return std::to_string(c.lambda_stepback); }},
        {"temperature", [](C& c, S k, S v) { c.generation.temperature = to_double(k, v); },
         [](const C& c) { return num(c.generation.temperature); }},
        {"top_p", [](C& c, S k, S v) { c.generation.top_p = to_double(k, v); },
         [](const C& c) { return num(c.generation.top_p); }},
        {"max_tokens", [](C& c, S k, S v) { c.generation.max_tokens = to_int(k, v); },
         [](const C& c) { return std::to_string(c.generation.max_tokens); }},
        {"k1", [](C& c, S k, S v) { c.bm25.k1 = to_double(k, v); }, [](const C& c) { return num(c.bm25.k1); }},
        {"b", [](C& c, S k, S v) { c.bm25.b = to_double(k, v); }, [](const C& c) { return num(c.bm25.b); }},
        {"top_k", [](C& c, S k, S v) { c.top_k = to_size(k, v); }, [](const C& c) { return std::to_string(c.top_k); }},
        {"rrf_k", [](C& c, S k, S v) { c.fusion.k = to_double(k, v); }, [](const C& c) { return num(c.fusion.k); }},
        {"weights",
         [](C& c, S k, S v) {
             c.fusion.weights.clear();
             for (const auto& w : to_list(v, ',')) c.fusion.weights.push_back(to_double(k, w));
         },
         [](const C& c) {
             std::vector<std::string> parts;
             for (double w : c.fusion.weights) parts.push_back(num(w));
             return util::join(parts, ",");
         }},
        {"bonus_divisor", [](C& c, S k, S v) { c.fusion.bonus_divisor = to_double(k, v); },
         [](const C& c) { return num(c.fusion.bonus_divisor); }},
        {"fusion_depth", [](C& c, S k, S v) { c.fusion.output_depth = to_size(k, v); },
         [](const C& c) { return std::to_string(c.fusion.output_depth); }},
        {"route_weights",
         [](C& c, S k, S v) {
             c.route_weights.clear();
             for (const auto& item : to_list(v, ',')) {
                 auto colon = item.find(':');
                 if (colon == std::string::npos) bad_value(k, v, "tag:weight pairs");
                 c.route_weights[std::string(util::trim(item.substr(0, colon)))] = to_double(k, item.substr(colon + 1));
             }
         },
         [](const C& c) {
             std::vector<std::string> parts;
             for (const auto& [tag, w] : c.route_weights) parts.push_back(tag + ":" + num(w));
             return util::join(parts, ",");
         }},
        {"fusions",
         [](C& c, S, S v) {
             c.fusions.clear();
             for (const auto& combo : to_list(v, ';')) c.fusions.push_back(to_list(combo, '+'));
         },
         [](const C& c) {
             std::vector<std::string> parts;
             for (const auto& combo : c.fusions) parts.push_back(util::join(combo, "+"));
             return util::join(parts, ";");
         }},
        {"relevance_threshold", [](C& c, S k, S v) { c.eval.relevance_threshold = to_int(k, v); },
         [](const C& c) { return std::to_string(c.eval.relevance_threshold); }},
        {"ndcg_gain", [](C& c, S, S v) { c.eval.gain = parse_gain_mode(util::trim(v)); },
         [](const C& c) { return std::string(to_string(c.eval.gain)); }},
        {"ndcg_cutoff", [](C& c, S k, S v) { c.eval.ndcg_cutoff = to_size(k, v); },
         [](const C& c) { return std::to_string(c.eval.ndcg_cutoff); }},
        {"mrr_cutoff", [](C& c, S k, S v) { c.eval.mrr_cutoff = to_size(k, v); },
         [](const C& c) { return std::to_string(c.eval.mrr_cutoff); }},
        {"recall_cutoff", [](C& c, S k, S v) { c.eval.recall_cutoff = to_size(k, v); },
         [](const C& c) { return std::to_string(c.eval.recall_cutoff); }},
        {"output_dir", [](C& c, S, S v) { c.output_dir = v; }, [](const C& c) { return c.output_dir; }},
        {"index_path", [](C& c, S, S v) { c.index_path = v; }, [](const C& c) { return c.index_path; }},
        {"cache_path", [](C& c, S, S v) { c.cache_path = v; }, [](const C& c) { return c.cache_path; }},
        {"llm_base_url", [](C& c, S, S v) { c.llm_base_url = v; }, [](const C& c) { return c.llm_base_url; }},
        {"llm_model", [](C& c, S, S v) { c.llm_model = v; }, [](const C& c) { return c.llm_model; }},
        {"llm_api_key_env", [](C& c, S, S v) { c.llm_api_key_env = v; }, [](const C& c) { return c.llm_api_key_env; }},
        {"llm_timeout", [](C& c, S k, S v) { c.llm_timeout_seconds = to_int(k, v); },
         [](const C& c) { return std::to_string(c.llm_timeout_seconds); }},
        {"max_in_flight", [](C& c, S k, S v) { c.max_in_flight = to_unsigned(k, v); },
         [](const C& c) { return std::to_string(c.max_in_flight); }},
        {"max_attempts", [](C& c, S k, S v) { c.max_attempts = to_int(k, v); },
         [](const C& c) { return std::to_string(c.max_attempts); }},
        {"retry_backoff_ms", [](C& c, S k, S v) { c.retry_backoff_ms = to_int(k, v); },
         [](const C& c) { return std::to_string(c.retry_backoff_ms); }},
        {"mock", [](C& c, S k, S v) { c.mock = to_bool(k, v); }, [](const C& c) { return std::string(c.mock ? "true" : "false"); }},
        {"mock_fixtures", [](C& c, S, S v) { c.mock_fixtures = v; }, [](const C& c) { return c.mock_fixtures; }},
        {"mock_fallback",
         [](C& c, S k, S v) {
             auto s = std::string(util::trim(v));
             if (s != "echo" && s != "upper" && s != "error") bad_value(k, v, "echo, upper or error");
             c.mock_fallback = s;
         },
         [](const C& c) { return c.mock_fallback; }},
        {"threads", [](C& c, S k, S v) { c.threads = to_unsigned(k, v); },
         [](const C& c) { return std::to_string(c.threads); }},
    };
    return table;
}

std::string route_label(const std::vector<std::string>& routes) { return util::join(routes, "+"); }

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(*this, key, value);
            return;
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void PipelineConfig::load_file(const std::string& path) {
    auto in = util::open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        util::chomp(line);
        auto body = util::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto eq = body.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::Parse, util::location(path, lineno) + ": expected 'key = value'");
        try {
            set(std::string(util::trim(body.substr(0, eq))), std::string(util::trim(body.substr(eq + 1))));
        } catch (const Error& e) {
            fail(e.code(), util::location(path, lineno) + ": " + e.what());
        }
    }
}

std::string PipelineConfig::dump() const {
    std::map<std::string, std::string> sorted;
    for (const auto& f : fields()) sorted[f.key] = f.get(*this);
    std::ostringstream out;
    for (const auto& [k, v] : sorted) out << k << " = " << v << '\n';
    return out.str();
}

std::vector<std::string> PipelineConfig::keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
}

std::vector<ExpansionStrategy> PipelineConfig::expansion_strategies() const {
    std::vector<ExpansionStrategy> out;
    std::set<std::string> seen;
    for (const auto& name : strategies) {
        auto s = ExpansionStrategy::parse(name);
        switch (s.kind) {
            case ExpansionStrategy::Kind::HypotheticalDoc: s.lambda = lambda; break;
            case ExpansionStrategy::Kind::MultiQuery: s.lambda = lambda_multi; break;
            case ExpansionStrategy::Kind::StepBack: s.lambda = lambda_stepback; break;
        }
        if (s.lambda < 0) fail(ErrorCode::InvalidArgument, "lambda for " + s.name() + " must be >= 0");
        if (!seen.insert(s.name()).second)
            fail(ErrorCode::InvalidArgument, "strategy '" + s.name() + "' listed twice");
        out.push_back(s);
    }
    return out;
}

std::string PipelineConfig::resolved_index_path() const {
    return index_path.empty() ? (fs::path(output_dir) / "index.bin").string() : index_path;
}

std::string PipelineConfig::resolved_cache_path() const {
    return cache_path.empty() ? (fs::path(output_dir) / "generations.jsonl").string() : cache_path;
}

std::string PipelineConfig::route_run_path(const std::string& tag) const {
    return (fs::path(output_dir) / ("run." + tag + ".trec")).string();
}

std::string PipelineConfig::fused_run_path(const std::vector<std::string>& routes) const {
    return (fs::path(output_dir) / ("run.fused." + route_label(routes) + ".trec")).string();
}

std::vector<std::vector<std::string>> PipelineConfig::resolved_fusions() const {
    if (!fusions.empty()) return fusions;
    std::vector<std::string> all{kOriginalRouteTag};
    for (const auto& s : expansion_strategies()) all.push_back(s.route_tag());
    return {all};
}

std::string IndexSummary::to_string() const {
    return "indexed " + std::to_string(doc_count) + " documents, " + std::to_string(vocabulary_size) + " terms -> " +
           path;
}

std::string PipelineResult::summary() const {
    std::ostringstream out;
    out << index.to_string() << '\n';
    for (const auto& r : routes) {
        out << "route " << r.tag << ": " << r.query_count << " queries -> " << r.run_path;
        if (r.fallback_count) out << " (" << r.fallback_count << " fell back to the original query)";
        out << '\n';
    }
    for (const auto& [label, path] : fused) out << "fused " << label << " -> " << path << '\n';
    if (!reports.empty()) out << '\n' << format_comparison(reports);
    return out.str();
}

std::unique_ptr<LlmClient> make_client(const PipelineConfig& config) {
    if (config.mock) {
        MockClient::Rule rule = MockClient::echo;
        if (config.mock_fallback == "upper") rule = MockClient::uppercase;
        if (config.mock_fallback == "error") rule = MockClient::refuse;
        auto client = std::make_unique<MockClient>(rule);
        if (!config.mock_fixtures.empty()) client->load_fixtures(config.mock_fixtures);
        return client;
    }
    OpenAiClient::Options options;
    options.base_url = config.llm_base_url;
    options.model = config.llm_model;
    options.timeout_seconds = config.llm_timeout_seconds;
    if (!config.llm_api_key_env.empty())
        if (const char* key = std::getenv(config.llm_api_key_env.c_str())) options.api_key = key;
    return std::make_unique<OpenAiClient>(options);
}

Run search_all(const InvertedIndex& index, std::span<const Query> queries, std::size_t top_k, const std::string& tag,
               unsigned threads) {
    Run run(queries.size());
    util::parallel_for(queries.size(), threads,
                       [&](std::size_t i) { run[i] = index.search(queries[i].query_id, queries[i].text, top_k, tag); });
    return run;
}

namespace {

void ensure_output_dir(const PipelineConfig& config) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create output directory '" + config.output_dir + "': " + ec.message());
}

void require_path(const std::string& value, const char* key) {
    if (value.empty()) fail(ErrorCode::InvalidArgument, std::string("config key '") + key + "' is required");
}

InvertedIndex load_index(const PipelineConfig& config) {
    const auto path = config.resolved_index_path();
    if (!fs::exists(path))
        fail(ErrorCode::Io, "index '" + path + "' not found; run the index stage first");
    return InvertedIndex::load(path);
}

}  // namespace

IndexSummary cmd_index(const PipelineConfig& config) {
    require_path(config.corpus, "corpus");
    const auto docs = load_corpus(config.corpus, config.corpus_format);
    if (docs.empty()) fail(ErrorCode::InvalidArgument, "corpus '" + config.corpus + "' is empty");
    const auto index = InvertedIndex::build(docs, config.bm25);
    ensure_output_dir(config);
    const auto path = config.resolved_index_path();
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    index.save(path);
    return {index.doc_count(), index.vocabulary_size(), path};
}

RouteOutput cmd_search(const PipelineConfig& config) {
    require_path(config.queries, "queries");
    const auto index = load_index(config);
    const auto queries = load_queries(config.queries);
    ensure_output_dir(config);
    RouteOutput out{kOriginalRouteTag, config.route_run_path(kOriginalRouteTag), {}, queries.size(), 0};
    write_run(search_all(index, queries, config.top_k, kOriginalRouteTag, config.threads), out.run_path);
    return out;
}

std::vector<RouteOutput> cmd_expand(const PipelineConfig& config) {
    require_path(config.queries, "queries");
    config.generation.validate();
    const auto strategies = config.expansion_strategies();
    if (strategies.empty()) fail(ErrorCode::InvalidArgument, "no expansion strategies configured");
    const auto index = load_index(config);
    const auto queries = load_queries(config.queries);
    const auto tmpl = select_template(config.dataset);
    ensure_output_dir(config);

    auto client = make_client(config);
    GenerationCache cache(config.resolved_cache_path());
    RetryPolicy retry;
    retry.max_attempts = config.max_attempts;
    retry.initial_backoff = std::chrono::milliseconds(config.retry_backoff_ms);
    Generator generator(*client, cache, retry);

    std::vector<RouteOutput> outputs;
    for (const auto& strategy : strategies) {
        const auto tag = strategy.route_tag();
        auto expanded = expand_queries(queries, strategy, tmpl, generator, config.generation, config.max_in_flight);
        RouteOutput out{tag, config.route_run_path(tag),
                        (fs::path(config.output_dir) / ("expanded." + tag + ".jsonl")).string(), queries.size(), 0};
        std::vector<Query> expanded_queries;
        expanded_queries.reserve(expanded.size());
        for (const auto& e : expanded) {
            if (e.fallback) ++out.fallback_count;
            expanded_queries.push_back({e.query_id, e.text});
        }
        write_expanded(expanded, out.expanded_path);
        write_run(search_all(index, expanded_queries, config.top_k, tag, config.threads), out.run_path);
        outputs.push_back(std::move(out));
    }
    return outputs;
}

std::string cmd_fuse(const PipelineConfig& config, std::span<const std::string> run_paths, std::string out_path) {
    if (run_paths.empty()) fail(ErrorCode::InvalidArgument, "fuse needs at least one run file");
    std::vector<Run> runs;
    for (const auto& p : run_paths) runs.push_back(read_run(p));
    auto fused = fuse_runs(runs, config.fusion, config.threads);
    if (out_path.empty()) {
        ensure_output_dir(config);
        out_path = (fs::path(config.output_dir) / "run.exp4fuse.trec").string();
    }
    write_run(fused, out_path);
    return out_path;
}

MetricReport cmd_eval(const PipelineConfig& config, const std::string& run_path) {
    require_path(config.qrels, "qrels");
    return evaluate(read_run(run_path), load_qrels(config.qrels), config.eval);
}

PipelineResult cmd_pipeline(const PipelineConfig& config) {
    const auto combos = config.resolved_fusions();
    PipelineResult result;
    result.index = cmd_index(config);
    result.routes.push_back(cmd_search(config));
    if (!config.strategies.empty())
        for (auto& r : cmd_expand(config)) result.routes.push_back(std::move(r));

    std::map<std::string, std::string> route_paths;
    for (const auto& r : result.routes) route_paths[r.tag] = r.run_path;

    for (const auto& combo : combos) {
        if (combo.empty()) fail(ErrorCode::InvalidArgument, "empty fusion combination");
        std::vector<std::string> paths;
        PipelineConfig fuse_config = config;
        fuse_config.fusion.weights.clear();
        for (const auto& tag : combo) {
            auto it = route_paths.find(tag);
            if (it == route_paths.end())
                fail(ErrorCode::InvalidArgument, "fusion refers to route '" + tag + "' which this pipeline does not produce");
            paths.push_back(it->second);
            auto w = config.route_weights.find(tag);
            fuse_config.fusion.weights.push_back(w == config.route_weights.end() ? 1.0 : w->second);
        }
        result.fused.emplace_back(route_label(combo), cmd_fuse(fuse_config, paths, config.fused_run_path(combo)));
    }

    if (!config.qrels.empty()) {
        const auto qrels = load_qrels(config.qrels);
        auto add = [&](const std::string& label, const std::string& path) {
            result.reports.emplace_back(label, evaluate(read_run(path), qrels, config.eval));
        };
        for (const auto& r : result.routes) add(r.tag, r.run_path);
        for (const auto& [label, path] : result.fused) add(label, path);

        nlohmann::ordered_json j;
        j["relevance_threshold"] = config.eval.relevance_threshold;
        j["ndcg_gain"] = to_string(config.eval.gain);
        auto& routes = j["routes"] = nlohmann::ordered_json::object();
        for (const auto& [label, report] : result.reports) {
            auto& row = routes[label] = nlohmann::ordered_json::object();
            for (const auto& m : report.metrics) row[m] = report.aggregate.at(m);
            row["evaluated_queries"] = report.evaluated_query_count;
        }
        auto& fallbacks = j["fallbacks"] = nlohmann::ordered_json::object();
        for (const auto& r : result.routes)
            if (!r.expanded_path.empty()) fallbacks[r.tag] = r.fallback_count;

        result.report_json_path = (fs::path(config.output_dir) / "report.json").string();
        result.report_text_path = (fs::path(config.output_dir) / "report.txt").string();
        auto json_out = util::open_output(result.report_json_path);
        json_out << j.dump(2) << '\n';
        auto text_out = util::open_output(result.report_text_path);
        text_out << format_comparison(result.reports);
    }
    return result;
}

}  // namespace exp4fuse
