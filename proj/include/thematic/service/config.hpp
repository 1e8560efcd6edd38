#pragma once

// Service configuration file (JSON):
//
// {
//   "providers": {
//     "language_model": {"mode": "mock", "fixture_path": "fixtures.json"},
//     "embedder":       {"mode": "remote", "endpoint": "https://...", "auth_env_var": "EMBED_KEY"},
//     "generator":      {...}
//   },
//   "limits":      {"max_themes": 4, "default_k": 3, "max_upload_bytes": 20971520,
//                   "session_ttl_seconds": 86400, "embedding_cache_capacity": 1024,
//                   "axis_concurrency": 4},
//   "ranking":     {"polarity": "compatibility_first" | "novelty_first"},
//   "generation":  {"send_reference_image": true},
//   "storage":     {"root": "var/thematic"},            // omitted: in-memory
//   "determinism": {"clock": "system" | "logical", "id_seed": 7},
//   "auth":        {"bearer_token_env": "THEMATIC_TOKEN"}
// }
//
// Relative paths resolve against the directory holding the config file.
// Credentials only ever appear as environment variable names.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "thematic/orchestrator/orchestrator.hpp"
#include "thematic/providers/config.hpp"

namespace thematic::service {

namespace fs = std::filesystem;

struct Limits {
    int max_themes = 4;
    int default_k = orchestrator::kDefaultDescriptorCount;
    std::size_t max_upload_bytes = orchestrator::kDefaultMaxUploadBytes;
    std::int64_t session_ttl_seconds = 24 * 3600;
    std::size_t embedding_cache_capacity = 1024;
    int axis_concurrency = 4;
};

struct AppConfig {
    providers::ProviderConfig language_model{providers::ProviderKind::language_model};
    providers::ProviderConfig embedder{providers::ProviderKind::embedder};
    providers::ProviderConfig generator{providers::ProviderKind::generator};
    Limits limits;
    ranking::Polarity polarity = ranking::Polarity::compatibility_first;
    bool send_reference_image = true;
    std::optional<fs::path> storage_root;
    bool logical_clock = false;
    std::optional<std::uint64_t> id_seed;
    std::optional<std::string> bearer_token_env;
    fs::path base_dir;

    bool all_mock() const {
        return language_model.mode == providers::ProviderMode::mock &&
               embedder.mode == providers::ProviderMode::mock && generator.mode == providers::ProviderMode::mock;
    }

    fs::path resolve(const fs::path& p) const { return p.is_relative() ? base_dir / p : p; }
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
    if (!j.is_object()) fail(ErrorCode::config_invalid, std::string(where) + " must be an object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            fail(ErrorCode::config_invalid, "unknown key '" + key + "' in " + std::string(where));
}

}  // namespace detail

inline AppConfig parse_config(const json& j, fs::path base_dir = {}) {
    AppConfig c;
    c.base_dir = std::move(base_dir);
    detail::reject_unknown(j, {"providers", "limits", "ranking", "generation", "storage", "determinism", "auth"},
                           "config");
    try {
        const auto& p = j.at("providers");
        detail::reject_unknown(p, {"language_model", "embedder", "generator"}, "providers");
        c.language_model = providers::parse_provider_config(p.at("language_model"), providers::ProviderKind::language_model);
        c.embedder = providers::parse_provider_config(p.at("embedder"), providers::ProviderKind::embedder);
        c.generator = providers::parse_provider_config(p.at("generator"), providers::ProviderKind::generator);

        if (j.contains("limits")) {
            const auto& l = j.at("limits");
            detail::reject_unknown(l, {"max_themes", "default_k", "max_upload_bytes", "session_ttl_seconds",
                                       "embedding_cache_capacity", "axis_concurrency"},
                                   "limits");
            c.limits.max_themes = l.value("max_themes", c.limits.max_themes);
            c.limits.default_k = l.value("default_k", c.limits.default_k);
            c.limits.max_upload_bytes = l.value("max_upload_bytes", c.limits.max_upload_bytes);
            c.limits.session_ttl_seconds = l.value("session_ttl_seconds", c.limits.session_ttl_seconds);
            c.limits.embedding_cache_capacity = l.value("embedding_cache_capacity", c.limits.embedding_cache_capacity);
            c.limits.axis_concurrency = l.value("axis_concurrency", c.limits.axis_concurrency);
            if (c.limits.max_themes < 1 || c.limits.default_k < 1 || c.limits.session_ttl_seconds < 1 ||
                c.limits.embedding_cache_capacity < 1 || c.limits.axis_concurrency < 1 || c.limits.max_upload_bytes < 1)
                fail(ErrorCode::config_invalid, "limits must be positive");
        }
        if (j.contains("ranking")) {
            const auto& r = j.at("ranking");
            detail::reject_unknown(r, {"polarity"}, "ranking");
            auto polarity = r.value("polarity", std::string("compatibility_first"));
            if (polarity == "compatibility_first") c.polarity = ranking::Polarity::compatibility_first;
            else if (polarity == "novelty_first") c.polarity = ranking::Polarity::novelty_first;
            else fail(ErrorCode::config_invalid, "ranking.polarity must be compatibility_first or novelty_first");
        }
        if (j.contains("generation")) {
            const auto& g = j.at("generation");
            detail::reject_unknown(g, {"send_reference_image"}, "generation");
            c.send_reference_image = g.value("send_reference_image", true);
        }
        if (j.contains("storage")) {
            const auto& s = j.at("storage");
            detail::reject_unknown(s, {"root"}, "storage");
            if (s.contains("root")) c.storage_root = c.resolve(s.at("root").get<std::string>());
        }
        if (j.contains("determinism")) {
            const auto& d = j.at("determinism");
            detail::reject_unknown(d, {"clock", "id_seed"}, "determinism");
            auto clock = d.value("clock", std::string("system"));
            if (clock != "system" && clock != "logical")
                fail(ErrorCode::config_invalid, "determinism.clock must be system or logical");
            c.logical_clock = clock == "logical";
            if (d.contains("id_seed")) c.id_seed = d.at("id_seed").get<std::uint64_t>();
        }
        if (j.contains("auth")) {
            const auto& a = j.at("auth");
            detail::reject_unknown(a, {"bearer_token_env"}, "auth");
            if (a.contains("bearer_token_env")) c.bearer_token_env = a.at("bearer_token_env").get<std::string>();
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::config_invalid, std::string("config: ") + e.what());
    }
    return c;
}

inline AppConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::config_invalid, "cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::config_invalid, "config file " + path.string() + " is not valid JSON");
    try {
        return parse_config(j, fs::absolute(path).parent_path());
    } catch (const Error& e) {
        fail(ErrorCode::config_invalid, path.string() + ": " + e.what());
    }
}

/// The config as it may be logged or echoed: it holds no secret values.
inline json redacted_view(const AppConfig& c) {
    json j{{"providers", {{"language_model", c.language_model}, {"embedder", c.embedder}, {"generator", c.generator}}}};
    if (c.bearer_token_env) j["auth"] = {{"bearer_token_env", *c.bearer_token_env}};
    return j;
}

}  // namespace thematic::service
