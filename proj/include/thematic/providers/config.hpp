#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "thematic/error.hpp"

namespace thematic::providers {

using json = nlohmann::json;

enum class ProviderKind { language_model, embedder, generator };
enum class ProviderMode { mock, remote };

inline std::string_view to_string(ProviderKind k) {
    switch (k) {
        case ProviderKind::language_model: return "language_model";
        case ProviderKind::embedder: return "embedder";
        case ProviderKind::generator: return "generator";
    }
    return "language_model";
}

struct ProviderConfig {
    ProviderKind kind = ProviderKind::language_model;
    ProviderMode mode = ProviderMode::mock;
    std::optional<std::string> endpoint;
    std::optional<std::string> auth_env_var;  // name of the variable, never its value
    int timeout_ms = 30000;
    int max_retries = 2;
    std::optional<std::string> fixture_path;
    int backoff_base_ms = 250;
    int max_in_flight = 8;
    int batch_size = 16;

    bool operator==(const ProviderConfig&) const = default;

    void validate() const {
        auto bad = [&](const std::string& why) {
            fail(ErrorCode::config_invalid, std::string(to_string(kind)) + " provider: " + why);
        };
        if (mode == ProviderMode::remote && (!endpoint || endpoint->empty())) bad("mode=remote requires endpoint");
        if (mode == ProviderMode::mock && (!fixture_path || fixture_path->empty())) bad("mode=mock requires fixture_path");
        if (timeout_ms <= 0) bad("timeout_ms must be positive");
        if (max_retries < 0) bad("max_retries must be >= 0");
        if (backoff_base_ms < 0) bad("backoff_base_ms must be >= 0");
        if (max_in_flight < 1) bad("max_in_flight must be >= 1");
        if (batch_size < 1) bad("batch_size must be >= 1");
    }
};

inline void to_json(json& j, const ProviderConfig& c) {
    j = json{{"kind", std::string(to_string(c.kind))},
             {"mode", c.mode == ProviderMode::mock ? "mock" : "remote"},
             {"timeout_ms", c.timeout_ms},
             {"max_retries", c.max_retries},
             {"backoff_base_ms", c.backoff_base_ms},
             {"max_in_flight", c.max_in_flight},
             {"batch_size", c.batch_size}};
    if (c.endpoint) j["endpoint"] = *c.endpoint;
    if (c.auth_env_var) j["auth_env_var"] = *c.auth_env_var;
    if (c.fixture_path) j["fixture_path"] = *c.fixture_path;
}

/// Strict parse: unknown keys are rejected so a credential pasted into the
/// config never gets silently carried around.
inline ProviderConfig parse_provider_config(const json& j, ProviderKind expected) {
    static const char* const kKnown[] = {"kind",         "mode",        "endpoint",        "auth_env_var",
                                         "timeout_ms",   "max_retries", "fixture_path",    "backoff_base_ms",
                                         "max_in_flight", "batch_size"};
    if (!j.is_object()) fail(ErrorCode::config_invalid, "provider config must be an object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
            fail(ErrorCode::config_invalid, "unknown provider config key '" + key + "'");
    }
    ProviderConfig c;
    c.kind = expected;
    try {
        if (j.contains("kind") && j.at("kind").get<std::string>() != to_string(expected))
            fail(ErrorCode::config_invalid, "provider kind mismatch: expected " + std::string(to_string(expected)));
        auto mode = j.at("mode").get<std::string>();
        if (mode == "mock") c.mode = ProviderMode::mock;
        else if (mode == "remote") c.mode = ProviderMode::remote;
        else fail(ErrorCode::config_invalid, "provider mode must be mock or remote");
        if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
        if (j.contains("auth_env_var")) c.auth_env_var = j.at("auth_env_var").get<std::string>();
        if (j.contains("fixture_path")) c.fixture_path = j.at("fixture_path").get<std::string>();
        c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.backoff_base_ms = j.value("backoff_base_ms", c.backoff_base_ms);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
        c.batch_size = j.value("batch_size", c.batch_size);
    } catch (const json::exception& e) {
        fail(ErrorCode::config_invalid, std::string("provider config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace thematic::providers
