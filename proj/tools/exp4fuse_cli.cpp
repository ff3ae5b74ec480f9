// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library exclusively through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exp4fuse/exp4fuse.h"

namespace {

struct ConfigDeleter {
    void operator()(e4f_config* c) const { e4f_config_free(c); }
};
using ConfigPtr = std::unique_ptr<e4f_config, ConfigDeleter>;

struct Failure {
    e4f_status status;
    std::string message;
};

void check(e4f_status status) {
    if (status != E4F_OK) throw Failure{status, e4f_last_error()};
}

void print_and_free(char* text) {
    if (!text) return;
    std::string s(text);
    e4f_string_free(text);
    if (!s.empty() && s.back() != '\n') s.push_back('\n');
    std::fputs(s.c_str(), stdout);
}

/// Options shared by every subcommand. Named flags map onto config keys and
/// are applied after the config file; --set pairs are applied last.
struct CommonOptions {
    std::string config_file;
    std::vector<std::string> overrides;
    std::map<std::string, std::string> flags;
    bool mock = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
        cmd->add_option("-s,--set", overrides, "override a config key (KEY=VALUE), repeatable");
        cmd->add_flag("--mock", mock, "use the deterministic mock LLM instead of the HTTP endpoint");
        flag(cmd, "--corpus", "corpus", "corpus file");
        flag(cmd, "--format", "corpus_format", "corpus format: tsv or jsonl");
        flag(cmd, "--queries", "queries", "queries TSV (query_id<TAB>text)");
        flag(cmd, "--qrels", "qrels", "TREC qrels file");
        flag(cmd, "-o,--output-dir", "output_dir", "directory for all artifacts");
        flag(cmd, "--index", "index_path", "index file (default <output-dir>/index.bin)");
        flag(cmd, "--dataset", "dataset", "dataset tag selecting the prompt template");
        flag(cmd, "--strategies", "strategies", "expansion strategies: hyde,multi,stepback");
        flag(cmd, "--lambda", "lambda", "query repetitions for hypothetical-document expansion");
        flag(cmd, "--top-k", "top_k", "retrieval depth per route");
        flag(cmd, "--fusions", "fusions", "route combinations to fuse, e.g. 'oq+eq;oq+eq+mq'");
        flag(cmd, "--fixtures", "mock_fixtures", "JSON-lines fixtures for the mock LLM");
        flag(cmd, "--cache", "cache_path", "generation cache (JSON lines)");
        flag(cmd, "--model", "llm_model", "model name sent to the endpoint");
        flag(cmd, "--base-url", "llm_base_url", "OpenAI-compatible base URL");
        flag(cmd, "--threshold", "relevance_threshold", "minimum grade counted as relevant");
        flag(cmd, "--threads", "threads", "worker threads for per-query work");
    }

    void flag(CLI::App* cmd, const std::string& name, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(name, [this, key](const std::string& v) { flags[key] = v; }, help);
    }

    ConfigPtr build() const {
        e4f_config* raw = nullptr;
        check(e4f_config_new(&raw));
        ConfigPtr config(raw);
        if (!config_file.empty()) check(e4f_config_load(config.get(), config_file.c_str()));
        for (const auto& [key, value] : flags) check(e4f_config_set(config.get(), key.c_str(), value.c_str()));
        if (mock) check(e4f_config_set(config.get(), "mock", "true"));
        for (const auto& kv : overrides) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw Failure{E4F_ERR_INVALID_ARGUMENT, "--set expects KEY=VALUE, got '" + kv + "'"};
            check(e4f_config_set(config.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
        }
        return config;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exp4fuse: sparse retrieval with LLM query expansion and rank fusion"};
    app.set_version_flag("--version", std::string(e4f_version()));
    app.require_subcommand(1);

    CommonOptions common;

    auto* index_cmd = app.add_subcommand("index", "build and save the BM25 index");
    auto* search_cmd = app.add_subcommand("search", "retrieve the original-query route (tag oq)");
    auto* expand_cmd = app.add_subcommand("expand", "generate expansions and retrieve the expanded routes");
    auto* fuse_cmd = app.add_subcommand("fuse", "fuse TREC run files with modified reciprocal rank fusion");
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a run against qrels");
    auto* pipeline_cmd = app.add_subcommand("pipeline", "index, search, expand, fuse and evaluate");
    auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
    for (auto* cmd : {index_cmd, search_cmd, expand_cmd, fuse_cmd, eval_cmd, pipeline_cmd, config_cmd}) common.add_to(cmd);

    std::vector<std::string> fuse_runs;
    std::string fuse_output;
    fuse_cmd->add_option("runs", fuse_runs, "run files to fuse")->required()->check(CLI::ExistingFile);
    fuse_cmd->add_option("--out", fuse_output, "fused run path (default <output-dir>/run.exp4fuse.trec)");
    common.flag(fuse_cmd, "--weights", "weights", "comma-separated weight per run (default all 1)");
    common.flag(fuse_cmd, "--k", "rrf_k", "rank constant k (default 60)");
    common.flag(fuse_cmd, "--bonus-divisor", "bonus_divisor", "divisor of the list-count bonus (default 10)");
    common.flag(fuse_cmd, "--depth", "fusion_depth", "fused list depth (default 1000)");

    std::string eval_run;
    bool eval_json = false;
    eval_cmd->add_option("run", eval_run, "run file to evaluate")->required()->check(CLI::ExistingFile);
    eval_cmd->add_flag("--json", eval_json, "print the report as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = common.build();
        char* out = nullptr;
        if (index_cmd->parsed()) {
            check(e4f_cmd_index(config.get(), &out));
        } else if (search_cmd->parsed()) {
            check(e4f_cmd_search(config.get(), &out));
        } else if (expand_cmd->parsed()) {
            check(e4f_cmd_expand(config.get(), &out));
        } else if (fuse_cmd->parsed()) {
            std::vector<const char*> paths;
            for (const auto& p : fuse_runs) paths.push_back(p.c_str());
            check(e4f_cmd_fuse(config.get(), paths.data(), paths.size(),
                               fuse_output.empty() ? nullptr : fuse_output.c_str(), &out));
        } else if (eval_cmd->parsed()) {
            check(e4f_cmd_eval(config.get(), eval_run.c_str(), eval_json ? 1 : 0, &out));
        } else if (pipeline_cmd->parsed()) {
            check(e4f_cmd_pipeline(config.get(), &out));
        } else if (config_cmd->parsed()) {
            check(e4f_config_dump(config.get(), &out));
        }
        print_and_free(out);
    } catch (const Failure& f) {
        std::fprintf(stderr, "exp4fuse: %s: %s\n", e4f_status_name(f.status), f.message.c_str());
        return static_cast<int>(f.status);
    }
    return 0;
}
