// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "error.hpp"
#include "util.hpp"

namespace exp4fuse {

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::Internal, "SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

bool is_blank(const std::string& s) { return util::trim(s).empty(); }

nlohmann::json to_json(const GenerationRecord& r) {
    return nlohmann::json{{"key", r.key},
                          {"model", r.model},
                          {"prompt", r.prompt},
                          {"temperature", r.params.temperature},
                          {"top_p", r.params.top_p},
                          {"max_tokens", r.params.max_tokens},
                          {"response", r.response},
                          {"timestamp", r.timestamp}};
}

}  // namespace

void GenerationParams::validate() const {
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
        fail(ErrorCode::InvalidArgument, "temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) fail(ErrorCode::InvalidArgument, "top_p must be in (0, 1]");
    if (max_tokens < 1) fail(ErrorCode::InvalidArgument, "max_tokens must be >= 1");
}

// ---------------------------------------------------------------------------
// OpenAiClient

OpenAiClient::OpenAiClient(Options options) : options_(std::move(options)) {
    const auto& url = options_.base_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        fail(ErrorCode::InvalidArgument, "LLM base URL '" + url + "' has no scheme");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        fail(ErrorCode::InvalidArgument, "LLM base URL must use http or https");
    auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (options_.model.empty()) fail(ErrorCode::InvalidArgument, "LLM model name is empty");
}

std::string OpenAiClient::request_body(const std::string& model, const std::string& prompt,
                                       const GenerationParams& params) {
    nlohmann::json body{{"model", model},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
                        {"temperature", params.temperature},
                        {"top_p", params.top_p},
                        {"max_tokens", params.max_tokens}};
    return body.dump();
}

std::string OpenAiClient::parse_response(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw LlmError(std::string("malformed chat-completions response: ") + e.what(), false);
    }
}

std::string OpenAiClient::complete(const std::string& prompt, const GenerationParams& params) {
    params.validate();
    httplib::Client client(origin_);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    client.set_write_timeout(options_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = client.Post(path_prefix_ + "/chat/completions", headers,
                           request_body(options_.model, prompt, params), "application/json");
    if (!res) throw LlmError("LLM request failed: " + httplib::to_string(res.error()), true);
    if (res->status < 200 || res->status >= 300)
        throw LlmError("LLM endpoint returned HTTP " + std::to_string(res->status), true);
    return parse_response(res->body);
}

// ---------------------------------------------------------------------------
// MockClient

std::string MockClient::uppercase(const std::string& prompt) {
    std::string out = prompt;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

std::string MockClient::refuse(const std::string& prompt) {
    throw LlmError("mock client has no fixture for prompt: " + prompt.substr(0, 80), false);
}

MockClient::MockClient(Rule fallback, std::string model) : fallback_(std::move(fallback)), model_(std::move(model)) {}

void MockClient::add_exact(std::string prompt, std::string response) {
    exact_[std::move(prompt)] = std::move(response);
}

void MockClient::add_match(std::string fragment, std::string response) {
    matches_.emplace_back(std::move(fragment), std::move(response));
}

void MockClient::load_fixtures(const std::string& path) {
    auto in = util::open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            auto response = j.at("response").get<std::string>();
            if (j.contains("prompt"))
                add_exact(j["prompt"].get<std::string>(), std::move(response));
            else
                add_match(j.at("match").get<std::string>(), std::move(response));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, util::location(path, lineno) + ": bad fixture: " + e.what());
        }
    }
}

std::string MockClient::complete(const std::string& prompt, const GenerationParams& params) {
    params.validate();
    ++calls_;
    if (auto it = exact_.find(prompt); it != exact_.end()) return it->second;
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& m : matches_)
        if (prompt.find(m.first) != std::string::npos && (!best || m.first.size() > best->first.size())) best = &m;
    if (best) return best->second;
    return fallback_(prompt);
}

// ---------------------------------------------------------------------------
// GenerationCache

std::string generation_key(const std::string& model, const std::string& prompt, const GenerationParams& params) {
    nlohmann::json canonical = nlohmann::json::array(
        {model, prompt, params.temperature, params.top_p, params.max_tokens});
    return sha256_hex(canonical.dump());
}

GenerationCache::GenerationCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // created on first store
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (util::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            GenerationRecord r;
            r.key = j.at("key").get<std::string>();
            r.model = j.at("model").get<std::string>();
            r.prompt = j.at("prompt").get<std::string>();
            r.params.temperature = j.at("temperature").get<double>();
            r.params.top_p = j.at("top_p").get<double>();
            r.params.max_tokens = j.at("max_tokens").get<int>();
            r.response = j.at("response").get<std::string>();
            r.timestamp = j.value("timestamp", "");
            records_.insert_or_assign(r.key, std::move(r));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, util::location(path_, lineno) + ": bad cache record: " + e.what());
        }
    }
}

std::optional<std::string> GenerationCache::lookup(const std::string& key) const {
    std::lock_guard lock(mutex_);
    auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second.response;
}

void GenerationCache::store(GenerationRecord record) {
    if (record.timestamp.empty()) record.timestamp = utc_timestamp();
    std::lock_guard lock(mutex_);
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app);
        if (!out) fail(ErrorCode::Io, "cannot append to generation cache '" + path_ + "'");
        out << to_json(record).dump() << '\n';
        out.flush();
        if (!out) fail(ErrorCode::Io, "failed writing generation cache '" + path_ + "'");
    }
    auto key = record.key;
    records_.insert_or_assign(std::move(key), std::move(record));
}

std::size_t GenerationCache::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(LlmClient& client, GenerationCache& cache, RetryPolicy retry)
    : client_(client), cache_(cache), retry_(retry) {
    if (retry_.max_attempts < 1) fail(ErrorCode::InvalidArgument, "retry policy needs at least one attempt");
}

std::string Generator::call_with_retries(const std::string& prompt, const GenerationParams& params) {
    auto backoff = std::chrono::duration<double, std::milli>(retry_.initial_backoff);
    for (int attempt = 1;; ++attempt) {
        try {
            ++client_calls_;
            auto text = client_.complete(prompt, params);
            if (is_blank(text)) throw LlmError("LLM returned an empty generation", false);
            return text;
        } catch (const LlmError& e) {
            if (!e.retryable()) throw;
            if (attempt >= retry_.max_attempts)
                throw LlmError(std::string(e.what()) + " (gave up after " + std::to_string(attempt) + " attempts)",
                               false);
        }
        std::this_thread::sleep_for(backoff);
        backoff *= retry_.multiplier;
    }
}

std::string Generator::generate(const std::string& prompt, const GenerationParams& params) {
    params.validate();
    const auto key = generation_key(client_.model_id(), prompt, params);
    if (auto hit = cache_.lookup(key)) {
        ++cache_hits_;
        return *hit;
    }

    std::promise<std::string> promise;
    std::shared_future<std::string> pending;
    {
        std::lock_guard lock(inflight_mutex_);
        if (auto hit = cache_.lookup(key)) {
            ++cache_hits_;
            return *hit;
        }
        if (auto it = inflight_.find(key); it != inflight_.end()) {
            pending = it->second;
        } else {
            inflight_.emplace(key, promise.get_future().share());
        }
    }
    if (pending.valid()) {
        ++cache_hits_;
        return pending.get();
    }

    try {
        auto text = call_with_retries(prompt, params);
        cache_.store(GenerationRecord{key, client_.model_id(), prompt, params, text, {}});
        promise.set_value(text);
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(key);
        return text;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(key);
        throw;
    }
}

}  // namespace exp4fuse
