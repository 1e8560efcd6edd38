#pragma once

// HTTP transport for remote providers. Each provider is a single endpoint
// accepting POST with the kind's JSON request body (or a JSON array of them
// for batches) and answering with the JSON response (or an array).

#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "thematic/providers/client.hpp"

namespace thematic::providers {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // always starts with '/'
};

inline Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::config_invalid, "endpoint must be an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class RemoteClient final : public ProviderClient {
public:
    explicit RemoteClient(ProviderConfig cfg) : cfg_(std::move(cfg)), limiter_(cfg_.max_in_flight) {
        cfg_.validate();
        endpoint_ = split_endpoint(*cfg_.endpoint);
    }

    ProviderKind kind() const override { return cfg_.kind; }

    json call(std::string_view operation, const json& request, const CallContext& ctx = {}) override {
        return post(operation, request, ctx);
    }

    std::vector<json> call_batch(std::string_view operation, const std::vector<json>& requests,
                                 const CallContext& ctx = {}) override {
        if (requests.size() == 1) return {post(operation, requests.front(), ctx)};
        json response = post(operation, json(requests), ctx);
        if (!response.is_array() || response.size() != requests.size())
            fail(ErrorCode::contract_violation, "batch response does not match request count");
        return std::vector<json>(response.begin(), response.end());
    }

    bool reachable() override {
        auto client = make_client();
        client.set_connection_timeout(std::chrono::milliseconds(std::min(cfg_.timeout_ms, 2000)));
        auto res = client.Get(endpoint_.path);
        return static_cast<bool>(res);
    }

    /// Full-jitter exponential backoff before retry number `attempt` (1-based).
    std::chrono::milliseconds backoff(int attempt) {
        double cap = cfg_.backoff_base_ms * std::pow(2.0, attempt - 1);
        std::lock_guard lock(rng_mu_);
        std::uniform_real_distribution<double> dist(0.0, cap);
        return std::chrono::milliseconds(static_cast<long long>(dist(rng_)));
    }

private:
    httplib::Client make_client() const {
        httplib::Client client(endpoint_.origin);
        auto t = std::chrono::milliseconds(cfg_.timeout_ms);
        client.set_connection_timeout(t);
        client.set_read_timeout(t);
        client.set_write_timeout(t);
        return client;
    }

    httplib::Headers headers(std::string_view operation) const {
        httplib::Headers h{{"X-Thematic-Operation", std::string(operation)}};
        if (cfg_.auth_env_var) {
            if (const char* secret = std::getenv(cfg_.auth_env_var->c_str()); secret && *secret)
                h.emplace("Authorization", std::string("Bearer ") + secret);
        }
        return h;
    }

    json post(std::string_view operation, const json& body, const CallContext& ctx) {
        InFlightLimiter::Permit permit(limiter_);
        const int max_attempts = 1 + cfg_.max_retries;
        std::string last_error;
        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            if (ctx.is_cancelled()) fail(ErrorCode::cancelled, "provider call cancelled");
            if (attempt > 1) std::this_thread::sleep_for(backoff(attempt - 1));
            if (ctx.meta) {
                ctx.meta->attempts = attempt;
                ctx.meta->network_calls += 1;
            }
            auto client = make_client();
            auto res = client.Post(endpoint_.path, headers(operation), body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status >= 400) {
                // Client errors are not retried; the body is not echoed since
                // it may reflect request headers.
                fail(ErrorCode::provider_unavailable,
                     std::string(to_string(cfg_.kind)) + " provider rejected the request with status " +
                         std::to_string(res->status),
                     json{{"status", res->status}, {"attempts", attempt}});
            }
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) {
                last_error = "malformed JSON response";
                continue;
            }
            return parsed;
        }
        fail(ErrorCode::provider_unavailable,
             std::string(to_string(cfg_.kind)) + " provider unavailable after " + std::to_string(max_attempts) +
                 " attempts: " + last_error,
             json{{"attempts", max_attempts}});
    }

    ProviderConfig cfg_;
    Endpoint endpoint_;
    InFlightLimiter limiter_;
    std::mutex rng_mu_;
    std::mt19937_64 rng_{std::random_device{}()};
};

inline std::shared_ptr<ProviderClient> make_client(const ProviderConfig& cfg,
                                                   const std::filesystem::path& base_dir = {}) {
    cfg.validate();
    if (cfg.mode == ProviderMode::mock) return MockClient::from_config(cfg, base_dir);
    return std::make_shared<RemoteClient>(cfg);
}

}  // namespace thematic::providers
