// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "exp4fuse/exp4fuse.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "corpus.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "fuse.hpp"
#include "index.hpp"
#include "pipeline.hpp"

struct e4f_config {
    exp4fuse::PipelineConfig value;
};
struct e4f_index {
    exp4fuse::InvertedIndex value;
};
struct e4f_run {
    exp4fuse::Run value;
};
struct e4f_qrels {
    exp4fuse::Qrels value;
};
struct e4f_report {
    exp4fuse::MetricReport value;
};

namespace {

thread_local std::string last_error;

e4f_status to_status(exp4fuse::ErrorCode code) {
    switch (code) {
        case exp4fuse::ErrorCode::InvalidArgument: return E4F_ERR_INVALID_ARGUMENT;
        case exp4fuse::ErrorCode::Io: return E4F_ERR_IO;
        case exp4fuse::ErrorCode::Parse: return E4F_ERR_PARSE;
        case exp4fuse::ErrorCode::Llm: return E4F_ERR_LLM;
        case exp4fuse::ErrorCode::Internal: return E4F_ERR_INTERNAL;
    }
    return E4F_ERR_INTERNAL;
}

template <typename Fn>
e4f_status guarded(Fn&& fn) {
    last_error.clear();
    try {
        fn();
        return E4F_OK;
    } catch (const exp4fuse::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return E4F_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return E4F_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return E4F_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) exp4fuse::fail(exp4fuse::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void maybe_return(char** out, const std::string& s) {
    if (out) *out = dup_string(s);
}

}  // namespace

extern "C" {

const char* e4f_version(void) { return "0.1.0"; }

const char* e4f_last_error(void) { return last_error.c_str(); }

const char* e4f_status_name(e4f_status status) {
    switch (status) {
        case E4F_OK: return "ok";
        case E4F_ERR_INVALID_ARGUMENT: return "invalid argument";
        case E4F_ERR_IO: return "i/o error";
        case E4F_ERR_PARSE: return "parse error";
        case E4F_ERR_LLM: return "llm error";
        case E4F_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

void e4f_string_free(char* s) { std::free(s); }

e4f_status e4f_config_new(e4f_config** out) {
    return guarded([&] {
        require(out, "out");
        *out = new e4f_config{};
    });
}

void e4f_config_free(e4f_config* config) { delete config; }

e4f_status e4f_config_load(e4f_config* config, const char* path) {
    return guarded([&] {
        require(config, "config");
        require(path, "path");
        config->value.load_file(path);
    });
}

e4f_status e4f_config_set(e4f_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        config->value.set(key, value);
    });
}

e4f_status e4f_config_dump(const e4f_config* config, char** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = dup_string(config->value.dump());
    });
}

e4f_status e4f_index_build(const char* corpus_path, const char* format, double k1, double b, e4f_index** out) {
    return guarded([&] {
        require(corpus_path, "corpus_path");
        require(out, "out");
        auto docs = exp4fuse::load_corpus(corpus_path, exp4fuse::parse_corpus_format(format ? format : "tsv"));
        *out = new e4f_index{exp4fuse::InvertedIndex::build(docs, {k1, b})};
    });
}

e4f_status e4f_index_load(const char* path, e4f_index** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new e4f_index{exp4fuse::InvertedIndex::load(path)};
    });
}

e4f_status e4f_index_save(const e4f_index* index, const char* path) {
    return guarded([&] {
        require(index, "index");
        require(path, "path");
        index->value.save(path);
    });
}

void e4f_index_free(e4f_index* index) { delete index; }

size_t e4f_index_doc_count(const e4f_index* index) { return index ? index->value.doc_count() : 0; }

size_t e4f_index_vocabulary_size(const e4f_index* index) { return index ? index->value.vocabulary_size() : 0; }

e4f_status e4f_index_search(const e4f_index* index, const char* query_id, const char* query_text, size_t top_k,
                            const char* tag, e4f_run** out) {
    return guarded([&] {
        require(index, "index");
        require(query_id, "query_id");
        require(query_text, "query_text");
        require(out, "out");
        auto list = index->value.search(query_id, query_text, top_k, tag ? tag : "bm25");
        *out = new e4f_run{{std::move(list)}};
    });
}

e4f_status e4f_run_read(const char* path, e4f_run** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new e4f_run{exp4fuse::read_run(path)};
    });
}

e4f_status e4f_run_write(const e4f_run* run, const char* path) {
    return guarded([&] {
        require(run, "run");
        require(path, "path");
        exp4fuse::write_run(run->value, std::string(path));
    });
}

void e4f_run_free(e4f_run* run) { delete run; }

size_t e4f_run_query_count(const e4f_run* run) { return run ? run->value.size() : 0; }

size_t e4f_run_list_size(const e4f_run* run, size_t query) {
    if (!run || query >= run->value.size()) return 0;
    return run->value[query].entries.size();
}

e4f_status e4f_run_entry(const e4f_run* run, size_t query, size_t entry, const char** query_id, const char** doc_id,
                         int* rank, double* score) {
    return guarded([&] {
        require(run, "run");
        if (query >= run->value.size() || entry >= run->value[query].entries.size())
            exp4fuse::fail(exp4fuse::ErrorCode::InvalidArgument, "run entry index out of range");
        const auto& list = run->value[query];
        const auto& e = list.entries[entry];
        if (query_id) *query_id = list.query_id.c_str();
        if (doc_id) *doc_id = e.doc_id.c_str();
        if (rank) *rank = e.rank;
        if (score) *score = e.score;
    });
}

e4f_status e4f_fuse(const e4f_run* const* runs, size_t count, const double* weights, double k, double bonus_divisor,
                    size_t output_depth, e4f_run** out) {
    return guarded([&] {
        require(runs, "runs");
        require(out, "out");
        std::vector<exp4fuse::Run> inputs;
        for (size_t i = 0; i < count; ++i) {
            require(runs[i], "runs[i]");
            inputs.push_back(runs[i]->value);
        }
        exp4fuse::FusionConfig config;
        config.k = k;
        config.bonus_divisor = bonus_divisor;
        config.output_depth = output_depth;
        if (weights) config.weights.assign(weights, weights + count);
        *out = new e4f_run{exp4fuse::fuse_runs(inputs, config)};
    });
}

e4f_status e4f_qrels_load(const char* path, e4f_qrels** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new e4f_qrels{exp4fuse::load_qrels(path)};
    });
}

void e4f_qrels_free(e4f_qrels* qrels) { delete qrels; }

e4f_status e4f_evaluate(const e4f_run* run, const e4f_qrels* qrels, int relevance_threshold, const char* gain,
                        e4f_report** out) {
    return guarded([&] {
        require(run, "run");
        require(qrels, "qrels");
        require(out, "out");
        exp4fuse::EvalConfig config;
        config.relevance_threshold = relevance_threshold;
        if (gain) config.gain = exp4fuse::parse_gain_mode(gain);
        *out = new e4f_report{exp4fuse::evaluate(run->value, qrels->value, config)};
    });
}

void e4f_report_free(e4f_report* report) { delete report; }

e4f_status e4f_report_value(const e4f_report* report, const char* metric, double* value) {
    return guarded([&] {
        require(report, "report");
        require(metric, "metric");
        require(value, "value");
        auto it = report->value.aggregate.find(metric);
        if (it == report->value.aggregate.end())
            exp4fuse::fail(exp4fuse::ErrorCode::InvalidArgument, std::string("report has no metric '") + metric + "'");
        *value = it->second;
    });
}

size_t e4f_report_query_count(const e4f_report* report) { return report ? report->value.evaluated_query_count : 0; }

e4f_status e4f_report_json(const e4f_report* report, char** out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        *out = dup_string(report->value.to_json());
    });
}

e4f_status e4f_report_table(const e4f_report* report, char** out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        *out = dup_string(report->value.to_table());
    });
}

e4f_status e4f_cmd_index(const e4f_config* config, char** summary) {
    return guarded([&] {
        require(config, "config");
        maybe_return(summary, exp4fuse::cmd_index(config->value).to_string());
    });
}

e4f_status e4f_cmd_search(const e4f_config* config, char** summary) {
    return guarded([&] {
        require(config, "config");
        auto r = exp4fuse::cmd_search(config->value);
        maybe_return(summary, "route " + r.tag + ": " + std::to_string(r.query_count) + " queries -> " + r.run_path);
    });
}

e4f_status e4f_cmd_expand(const e4f_config* config, char** summary) {
    return guarded([&] {
        require(config, "config");
        std::ostringstream text;
        for (const auto& r : exp4fuse::cmd_expand(config->value)) {
            text << "route " << r.tag << ": " << r.query_count << " queries -> " << r.run_path << " (expansions in "
                 << r.expanded_path;
            if (r.fallback_count) text << ", " << r.fallback_count << " fell back to the original query";
            text << ")\n";
        }
        maybe_return(summary, text.str());
    });
}

e4f_status e4f_cmd_fuse(const e4f_config* config, const char* const* run_paths, size_t count, const char* out_path,
                        char** summary) {
    return guarded([&] {
        require(config, "config");
        require(run_paths, "run_paths");
        std::vector<std::string> paths;
        for (size_t i = 0; i < count; ++i) {
            require(run_paths[i], "run_paths[i]");
            paths.emplace_back(run_paths[i]);
        }
        auto path = exp4fuse::cmd_fuse(config->value, paths, out_path ? out_path : "");
        maybe_return(summary, "fused " + std::to_string(paths.size()) + " runs -> " + path);
    });
}

e4f_status e4f_cmd_eval(const e4f_config* config, const char* run_path, int as_json, char** report) {
    return guarded([&] {
        require(config, "config");
        require(run_path, "run_path");
        auto r = exp4fuse::cmd_eval(config->value, run_path);
        maybe_return(report, as_json ? r.to_json() : r.to_table());
    });
}

e4f_status e4f_cmd_pipeline(const e4f_config* config, char** summary) {
    return guarded([&] {
        require(config, "config");
        maybe_return(summary, exp4fuse::cmd_pipeline(config->value).summary());
    });
}

}  // extern "C"
