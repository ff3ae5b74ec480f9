// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace exp4fuse {

/// Sampling parameters sent with every completion request.
struct GenerationParams {
    double temperature = 0.6;
    double top_p = 0.9;
    int max_tokens = 128;

    void validate() const;
    bool operator==(const GenerationParams&) const = default;
};

/// A text-completion backend. Implementations must be safe to call from
/// several threads at once.
class LlmClient {
  public:
    virtual ~LlmClient() = default;
    virtual std::string model_id() const = 0;
    /// Throws LlmError on failure.
    virtual std::string complete(const std::string& prompt, const GenerationParams& params) = 0;
};

/// Client for OpenAI-compatible chat-completions endpoints.
class OpenAiClient final : public LlmClient {
  public:
    struct Options {
        std::string base_url = "https://api.openai.com/v1";
        std::string model = "gpt-4o-mini";
        std::string api_key;  // sent as a bearer token when non-empty
        int timeout_seconds = 60;
    };

    explicit OpenAiClient(Options options);

    std::string model_id() const override { return options_.model; }
    std::string complete(const std::string& prompt, const GenerationParams& params) override;

    /// Request body for one completion; exposed for tests.
    static std::string request_body(const std::string& model, const std::string& prompt,
                                    const GenerationParams& params);
    /// Extracts choices[0].message.content; throws LlmError on malformed JSON.
    static std::string parse_response(const std::string& body);

  private:
    Options options_;
    std::string origin_;  // scheme://host[:port]
    std::string path_prefix_;
};

/// Deterministic stand-in for an LLM. Prompts are answered from a fixture
/// table (exact prompt match first, then the longest registered substring
/// match) and otherwise by the fallback rule.
class MockClient final : public LlmClient {
  public:
    using Rule = std::function<std::string(const std::string& prompt)>;

    static std::string echo(const std::string& prompt) { return prompt; }
    static std::string uppercase(const std::string& prompt);
    static std::string refuse(const std::string& prompt);  // throws a non-retryable LlmError

    explicit MockClient(Rule fallback = echo, std::string model = "mock");

    /// Loads JSON-lines fixtures: {"prompt": ..., "response": ...} for exact
    /// matches or {"match": ..., "response": ...} for substring matches.
    void load_fixtures(const std::string& path);
    void add_exact(std::string prompt, std::string response);
    void add_match(std::string fragment, std::string response);

    std::string model_id() const override { return model_; }
    std::string complete(const std::string& prompt, const GenerationParams& params) override;

    std::size_t calls() const { return calls_.load(); }

  private:
    Rule fallback_;
    std::string model_;
    std::unordered_map<std::string, std::string> exact_;
    std::vector<std::pair<std::string, std::string>> matches_;
    std::atomic<std::size_t> calls_{0};
};

struct GenerationRecord {
    std::string key;
    std::string model;
    std::string prompt;
    GenerationParams params;
    std::string response;
    std::string timestamp;  // ISO-8601 UTC
};

/// Hex SHA-256 over the model id, prompt and sampling parameters.
std::string generation_key(const std::string& model, const std::string& prompt, const GenerationParams& params);

/// Append-only JSON-lines store of generations. Reads are lock-free after
/// load; writes are serialized.
class GenerationCache {
  public:
    GenerationCache() = default;  // in-memory only
    explicit GenerationCache(std::string path);

    std::optional<std::string> lookup(const std::string& key) const;
    void store(GenerationRecord record);
    std::size_t size() const;
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, GenerationRecord> records_;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

/// Cache-first generation with bounded retries. Concurrent requests for the
/// same key share a single client call.
class Generator {
  public:
    Generator(LlmClient& client, GenerationCache& cache, RetryPolicy retry = {});

    /// Throws LlmError once retries are exhausted or the model returns
    /// nothing but whitespace.
    std::string generate(const std::string& prompt, const GenerationParams& params);

    std::size_t client_calls() const { return client_calls_.load(); }
    std::size_t cache_hits() const { return cache_hits_.load(); }
    const LlmClient& client() const { return client_; }

  private:
    std::string call_with_retries(const std::string& prompt, const GenerationParams& params);

    LlmClient& client_;
    GenerationCache& cache_;
    RetryPolicy retry_;
    std::mutex inflight_mutex_;
    std::map<std::string, std::shared_future<std::string>> inflight_;
    std::atomic<std::size_t> client_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace exp4fuse
