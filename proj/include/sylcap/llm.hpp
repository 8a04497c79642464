#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sylcap/errors.hpp"

namespace sylcap::llm {

enum class ErrorKind {
    auth_failed,            // bad or missing credentials; retrying cannot help
    rate_limited_exhausted, // still throttled after every allowed attempt
    timeout_exhausted,      // connection/timeout/server errors on every attempt
    provider_error,         // the provider rejected the request outright
};

inline constexpr std::string_view to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::auth_failed: return "auth_failed";
    case ErrorKind::rate_limited_exhausted: return "rate_limited_exhausted";
    case ErrorKind::timeout_exhausted: return "timeout_exhausted";
    case ErrorKind::provider_error: return "provider_error";
    }
    return "unknown";
}

class CompletionError : public Error {
public:
    CompletionError(ErrorKind kind, const std::string& message)
        : Error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Scripted stand-in for a provider. Shared by pointer so concurrent callers
/// observe one call history.
struct MockBehavior {
    enum class Mode {
        table,          // completions looked up by exact prompt text
        echo_reference, // replies with the reference for the request's pair id
        fixed,          // every call returns fixed_completion
    };

    Mode mode = Mode::table;
    std::map<std::string, std::string> table;
    std::map<std::string, std::string> references; // pair_id -> reference sentence
    std::string fixed_completion;

    std::atomic<int> fail_transient{0}; // first N calls fail retryably
    bool fail_auth = false;             // every call fails authentication
    int delay_ms = 0;

    std::atomic<int> calls{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
};

struct ModelEndpoint {
    std::string name;           // short identifier used in records and reports
    std::string model;          // model name sent on the wire
    std::string base_url;       // e.g. https://api.openai.com/v1
    std::string credential_ref; // environment variable holding the API key
    double temperature = 1.0;
    int max_tokens = 1024;
    std::shared_ptr<MockBehavior> mock; // when set, no network traffic happens
};

struct CompletionRequest {
    std::string prompt;
    std::string request_id; // pair_id::strategy::model, used for bookkeeping
};

struct CompletionResult {
    std::string text;
    int attempts = 1;
    long latency_ms = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    int base_delay_ms = 1000;
    double multiplier = 2.0;
    bool jitter = true;
};

/// Pre-jitter backoff for the wait after attempt `attempt` (1-based):
/// base * multiplier^(attempt-1). Jitter is applied on top by the client.
inline long delay_for_attempt(const RetryPolicy& policy, int attempt) {
    if (attempt < 1) throw std::invalid_argument("delay_for_attempt: attempt must be >= 1");
    double delay = policy.base_delay_ms;
    for (int i = 1; i < attempt; ++i) delay *= policy.multiplier;
    return static_cast<long>(delay);
}

namespace detail {

struct ParsedUrl {
    std::string root;   // scheme://host[:port]
    std::string prefix; // path prefix without trailing slash, may be empty
    bool https = false;
};

inline ParsedUrl parse_base_url(std::string_view url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        throw DataError("endpoint URL \"" + std::string(url) + "\" has no scheme");
    std::string_view scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw DataError("endpoint URL scheme \"" + std::string(scheme) + "\" not supported");
    std::size_t host_start = scheme_end + 3;
    if (host_start >= url.size() || url[host_start] == '/')
        throw DataError("endpoint URL \"" + std::string(url) + "\" has no host");
    std::size_t path_start = url.find('/', host_start);
    ParsedUrl out;
    out.https = scheme == "https";
    if (path_start == std::string_view::npos) {
        out.root = std::string(url);
    } else {
        out.root = std::string(url.substr(0, path_start));
        std::string_view prefix = url.substr(path_start);
        while (prefix.ends_with('/')) prefix.remove_suffix(1);
        out.prefix = std::string(prefix);
    }
    return out;
}

inline long jittered(long delay_ms, bool jitter) {
    if (!jitter || delay_ms <= 1) return delay_ms;
    thread_local std::mt19937 rng{std::random_device{}()};
    std::uniform_int_distribution<long> dist(delay_ms / 2, delay_ms);
    return dist(rng);
}

struct InFlightGuard {
    MockBehavior& behavior;

    explicit InFlightGuard(MockBehavior& b) : behavior(b) {
        int now = behavior.in_flight.fetch_add(1) + 1;
        int prev = behavior.max_in_flight.load();
        while (now > prev && !behavior.max_in_flight.compare_exchange_weak(prev, now)) {
        }
    }
    ~InFlightGuard() { behavior.in_flight.fetch_sub(1); }
};

} // namespace detail

/// Issues chat completions against an OpenAI-style endpoint with bounded
/// retries and a per-endpoint concurrency ceiling. Transient failures (429,
/// 5xx, timeouts) back off exponentially; authentication and other client
/// errors surface immediately.
class Client {
public:
    explicit Client(RetryPolicy policy = {}, int per_endpoint_concurrency = 4)
        : policy_(policy), per_endpoint_(per_endpoint_concurrency) {
        if (policy_.max_attempts < 1)
            throw std::invalid_argument("RetryPolicy.max_attempts must be >= 1");
        if (per_endpoint_ < 1)
            throw std::invalid_argument("per_endpoint_concurrency must be >= 1");
    }

    CompletionResult complete(const ModelEndpoint& endpoint, const CompletionRequest& request) {
        auto& gate = gate_for(endpoint.name);
        gate.acquire();
        struct Release {
            std::counting_semaphore<>& gate;
            ~Release() { gate.release(); }
        } release{gate};

        auto start = std::chrono::steady_clock::now();
        std::string last_failure = "no attempts made";
        bool last_was_rate_limit = false;
        for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
            std::optional<std::string> transient;
            std::string text = endpoint.mock
                                   ? mock_attempt(endpoint, request, transient,
                                                  last_was_rate_limit)
                                   : http_attempt(endpoint, request, transient,
                                                  last_was_rate_limit);
            if (!transient) {
                auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - start)
                                   .count();
                return {std::move(text), attempt, static_cast<long>(elapsed)};
            }
            last_failure = *transient;
            if (attempt < policy_.max_attempts) {
                long delay = detail::jittered(delay_for_attempt(policy_, attempt),
                                              policy_.jitter);
                if (delay > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            }
        }
        throw CompletionError(last_was_rate_limit ? ErrorKind::rate_limited_exhausted
                                                  : ErrorKind::timeout_exhausted,
                              "request " + request.request_id + " failed after " +
                                  std::to_string(policy_.max_attempts) + " attempts: " +
                                  last_failure);
    }

    const RetryPolicy& policy() const { return policy_; }
    int per_endpoint_concurrency() const { return per_endpoint_; }

private:
    std::counting_semaphore<>& gate_for(const std::string& endpoint_name) {
        std::lock_guard lock(gates_mutex_);
        auto it = gates_.find(endpoint_name);
        if (it == gates_.end())
            it = gates_.emplace(endpoint_name,
                                std::make_unique<std::counting_semaphore<>>(per_endpoint_))
                     .first;
        return *it->second;
    }

    std::string mock_attempt(const ModelEndpoint& endpoint, const CompletionRequest& request,
                             std::optional<std::string>& transient, bool& last_was_rate_limit) {
        MockBehavior& mock = *endpoint.mock;
        mock.calls.fetch_add(1);
        detail::InFlightGuard guard(mock);
        if (mock.delay_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(mock.delay_ms));
        if (mock.fail_auth)
            throw CompletionError(ErrorKind::auth_failed,
                                  "mock rejected credentials for " + endpoint.name);
        if (mock.fail_transient.fetch_sub(1) > 0) {
            transient = "mock transient failure";
            last_was_rate_limit = true;
            return {};
        }
        switch (mock.mode) {
        case MockBehavior::Mode::fixed:
            return mock.fixed_completion;
        case MockBehavior::Mode::table: {
            auto it = mock.table.find(request.prompt);
            if (it == mock.table.end())
                throw CompletionError(ErrorKind::provider_error,
                                      "mock table has no completion for request " +
                                          request.request_id);
            return it->second;
        }
        case MockBehavior::Mode::echo_reference: {
            std::string pair_id = request.request_id.substr(0, request.request_id.find("::"));
            auto it = mock.references.find(pair_id);
            if (it == mock.references.end())
                throw CompletionError(ErrorKind::provider_error,
                                      "mock has no reference for pair \"" + pair_id + "\"");
            if (request.prompt.find("Best Translation:") != std::string::npos)
                return "Best Translation: " + it->second;
            std::size_t syl = request.prompt.rfind("Sylheti:");
            std::size_t ban = request.prompt.rfind("Bangla:");
            const char* label =
                ban != std::string::npos && (syl == std::string::npos || ban > syl)
                    ? "Bangla: "
                    : "Sylheti: ";
            return label + it->second;
        }
        }
        throw CompletionError(ErrorKind::provider_error, "mock misconfigured");
    }

    std::string http_attempt(const ModelEndpoint& endpoint, const CompletionRequest& request,
                             std::optional<std::string>& transient, bool& last_was_rate_limit) {
        const char* key = endpoint.credential_ref.empty()
                              ? nullptr
                              : std::getenv(endpoint.credential_ref.c_str());
        if (!key || !*key)
            throw CompletionError(ErrorKind::auth_failed,
                                  "environment variable " + endpoint.credential_ref +
                                      " is not set");
        detail::ParsedUrl url = detail::parse_base_url(endpoint.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (url.https)
            throw CompletionError(ErrorKind::provider_error,
                                  "built without TLS support; https endpoints unavailable");
#endif
        httplib::Client client(url.root);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        client.set_write_timeout(30, 0);
        client.set_bearer_token_auth(key);

        nlohmann::json body = {
            {"model", endpoint.model},
            {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"},
                                                               {"content", request.prompt}}})},
            {"temperature", endpoint.temperature},
            {"max_tokens", endpoint.max_tokens},
        };
        auto res = client.Post(url.prefix + "/chat/completions", body.dump(),
                               "application/json");
        if (!res) {
            transient = "connection failed: " + httplib::to_string(res.error());
            last_was_rate_limit = false;
            return {};
        }
        if (res->status == 401 || res->status == 403)
            throw CompletionError(ErrorKind::auth_failed,
                                  endpoint.name + " rejected credentials (HTTP " +
                                      std::to_string(res->status) + ")");
        if (res->status == 429) {
            transient = "HTTP 429";
            last_was_rate_limit = true;
            return {};
        }
        if (res->status >= 500) {
            transient = "HTTP " + std::to_string(res->status);
            last_was_rate_limit = false;
            return {};
        }
        if (res->status != 200)
            throw CompletionError(ErrorKind::provider_error,
                                  endpoint.name + " returned HTTP " +
                                      std::to_string(res->status) + ": " +
                                      res->body.substr(0, 300));
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message") ||
            !reply["choices"][0]["message"].contains("content"))
            throw CompletionError(ErrorKind::provider_error,
                                  endpoint.name + " returned an unexpected response shape");
        return reply["choices"][0]["message"]["content"].get<std::string>();
    }

    RetryPolicy policy_;
    int per_endpoint_;
    std::mutex gates_mutex_;
    std::map<std::string, std::unique_ptr<std::counting_semaphore<>>> gates_;
};

/// OpenAI-compatible presets for the models the toolkit targets. Credentials
/// are read from the named environment variables, never from flags or files.
inline std::vector<ModelEndpoint> endpoint_presets() {
    return {
        {"openai", "gpt-4.1", "https://api.openai.com/v1", "OPENAI_API_KEY"},
        {"gemini", "gemini-2.5-flash", "https://generativelanguage.googleapis.com/v1beta/openai",
         "GEMINI_API_KEY"},
        {"meta", "llama-4-maverick", "https://api.llama.com/compat/v1", "META_API_KEY"},
        {"xai", "grok-3", "https://api.x.ai/v1", "XAI_API_KEY"},
        {"deepseek", "deepseek-chat", "https://api.deepseek.com/v1", "DEEPSEEK_API_KEY"},
    };
}

inline std::optional<ModelEndpoint> find_preset(std::string_view name) {
    for (auto& preset : endpoint_presets())
        if (preset.name == name) return preset;
    return std::nullopt;
}

} // namespace sylcap::llm
