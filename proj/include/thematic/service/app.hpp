#pragma once

// Transport-independent request handlers. The HTTP binding (http.hpp) and the
// tests both drive this class; every handler returns a status + JSON body and
// never lets an exception escape.

#include <memory>
#include <string>
#include <vector>

#include "thematic/orchestrator/orchestrator.hpp"
#include "thematic/orchestrator/registry.hpp"
#include "thematic/providers/remote.hpp"
#include "thematic/service/config.hpp"
#include "thematic/service/log.hpp"

namespace thematic::service {

struct Response {
    int status = 200;
    json body;
    std::string content_type = "application/json";
    Bytes raw;  // used instead of body for binary responses

    bool ok() const { return status < 400; }
};

inline Response error_response(const Error& e) { return {http_status(e.code()), e.to_json()}; }

struct Runtime {
    providers::ProviderSet providers;
    std::vector<std::shared_ptr<providers::ProviderClient>> clients;  // language_model, embedder, generator
    std::shared_ptr<ranking::EmbeddingService> embeddings;
    std::shared_ptr<orchestrator::BlobStore> blobs;
    std::shared_ptr<orchestrator::SessionStore> sessions;
    std::shared_ptr<Clock> clock;
    std::shared_ptr<IdSource> ids;
};

/// Wires providers, stores, clock and id source from a config.
inline Runtime build_runtime(const AppConfig& cfg) {
    Runtime rt;
    auto lm = providers::make_client(cfg.language_model, cfg.base_dir);
    auto em = providers::make_client(cfg.embedder, cfg.base_dir);
    auto gen = providers::make_client(cfg.generator, cfg.base_dir);
    rt.clients = {lm, em, gen};
    rt.providers.language_model = std::make_shared<providers::LanguageModel>(lm);
    rt.providers.embedder = std::make_shared<providers::Embedder>(em, cfg.embedder.batch_size);
    rt.providers.generator = std::make_shared<providers::Generator>(gen, cfg.send_reference_image);

    std::string space_key = cfg.embedder.endpoint.value_or("");
    if (auto mock = std::dynamic_pointer_cast<providers::MockClient>(em)) space_key = mock->fixtures().header().space_tag;
    rt.embeddings = std::make_shared<ranking::EmbeddingService>(rt.providers.embedder, space_key,
                                                                cfg.limits.embedding_cache_capacity);
    if (cfg.storage_root) {
        rt.blobs = std::make_shared<orchestrator::FileBlobStore>(*cfg.storage_root);
        rt.sessions = std::make_shared<orchestrator::FileSessionStore>(*cfg.storage_root);
    } else {
        rt.blobs = std::make_shared<orchestrator::MemoryBlobStore>();
        rt.sessions = std::make_shared<orchestrator::MemorySessionStore>();
    }
    if (cfg.logical_clock) rt.clock = std::make_shared<LogicalClock>();
    else rt.clock = std::make_shared<SystemClock>();
    rt.ids = std::make_shared<IdSource>(cfg.id_seed);
    return rt;
}

inline orchestrator::OrchestratorOptions orchestrator_options(const AppConfig& cfg) {
    return {cfg.limits.max_themes, cfg.limits.default_k, cfg.polarity, cfg.send_reference_image,
            cfg.limits.max_upload_bytes};
}

class Application {
public:
    Application(AppConfig cfg, Runtime rt, std::shared_ptr<Logger> logger = std::make_shared<Logger>(nullptr))
        : cfg_(std::move(cfg)),
          rt_(std::move(rt)),
          logger_(std::move(logger)),
          orchestrator_(rt_.providers, rt_.embeddings, rt_.blobs, rt_.clock, orchestrator_options(cfg_),
                        theme::PipelineOptions{cfg_.limits.axis_concurrency}),
          registry_(rt_.sessions, std::chrono::seconds(cfg_.limits.session_ttl_seconds)) {}

    static std::unique_ptr<Application> from_config(const AppConfig& cfg,
                                                    std::shared_ptr<Logger> logger = std::make_shared<Logger>(nullptr)) {
        return std::make_unique<Application>(cfg, build_runtime(cfg), std::move(logger));
    }

    const AppConfig& config() const { return cfg_; }
    const orchestrator::Orchestrator& orchestrator() const { return orchestrator_; }
    orchestrator::SessionRegistry& registry() { return registry_; }
    Runtime& runtime() { return rt_; }
    Logger& logger() { return *logger_; }

    // POST /sessions
    Response create_session(const Bytes& image, const std::vector<std::string>& user_themes = {}) {
        return guarded("create_session", [&] {
            registry_.sweep_expired();
            auto created = orchestrator_.create_session(rt_.ids->next_session_id(), image, user_themes);
            auto snap = registry_.insert(std::move(created.session));
            return Response{201, json{{"session", *snap}, {"themes", created.themes}, {"axes", snap->axes}}};
        });
    }

    // GET /sessions/{id}
    Response get_session(const std::string& id) {
        return guarded("get_session", [&] { return Response{200, json(*registry_.snapshot(id))}; });
    }

    // POST /sessions/{id}/navigate {axis_id, position, k?}
    Response navigate(const std::string& id, const json& body) {
        return guarded("navigate", [&] {
            auto gesture = parse_gesture(body);
            int k = parse_k(body);
            orchestrator::NavigationPreview preview;
            registry_.mutate(id, [&](const Session& s, const std::atomic<bool>& cancelled) {
                preview = orchestrator_.navigate(s, gesture, k, providers::CallContext{&cancelled});
                return preview.session;
            });
            json descriptors = json::array();
            for (const auto& d : preview.selection.descriptors) descriptors.push_back(describe(d));
            return Response{200, json{{"axis_id", gesture.axis_id},
                                      {"position", gesture.position},
                                      {"descriptors", descriptors},
                                      {"prompt", preview.prompt},
                                      {"prompt_preview", preview.prompt_preview},
                                      {"ranking_fingerprint", preview.selection.ranking_fingerprint}}};
        });
    }

    // POST /sessions/{id}/generate {axis_id, position, k?, seed?}
    Response generate(const std::string& id, const json& body) {
        return guarded("generate", [&] {
            auto gesture = parse_gesture(body);
            int k = parse_k(body);
            std::optional<std::int64_t> seed;
            if (body.contains("seed")) {
                if (!body.at("seed").is_number_integer()) fail(ErrorCode::invalid_argument, "seed must be an integer");
                seed = body.at("seed").get<std::int64_t>();
            }
            orchestrator::GenerationRecord record;
            registry_.mutate(id, [&](const Session& s, const std::atomic<bool>& cancelled) {
                auto out = orchestrator_.generate(s, gesture, k, seed, providers::CallContext{&cancelled});
                record = out.record;
                return out.session;
            });
            return Response{201, json{{"image_id", record.image.id},
                                      {"parent_id", *record.image.parent_id},
                                      {"payload_hash", record.image.payload_hash},
                                      {"prompt", orchestrator::render_prompt(record.prompt)},
                                      {"prompt_spec", record.prompt},
                                      {"ranking_fingerprint", record.ranking_fingerprint},
                                      {"provider_latency_ms", record.provider_latency_ms}}};
        });
    }

    // POST /sessions/{id}/promote {image_id}
    Response promote(const std::string& id, const json& body) {
        return guarded("promote", [&] {
            if (!body.is_object() || !body.contains("image_id") || !body.at("image_id").is_string())
                fail(ErrorCode::invalid_argument, "body must be {image_id: string}");
            auto image_id = body.at("image_id").get<std::string>();
            auto snap = registry_.mutate(id, [&](const Session& s, const std::atomic<bool>&) {
                return orchestrator_.promote_reference(s, image_id);
            });
            return Response{200, json{{"session", *snap}}};
        });
    }

    // POST /sessions/{id}/themes {label, poles?: [left, right]}
    Response add_theme(const std::string& id, const json& body) {
        return guarded("add_theme", [&] {
            if (!body.is_object() || !body.contains("label") || !body.at("label").is_string())
                fail(ErrorCode::invalid_argument, "body must be {label: string}");
            std::optional<std::pair<std::string, std::string>> poles;
            if (body.contains("poles")) {
                const auto& p = body.at("poles");
                if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
                    fail(ErrorCode::invalid_argument, "poles must be [left, right]");
                poles.emplace(p[0].get<std::string>(), p[1].get<std::string>());
            }
            auto snap = registry_.mutate(id, [&](const Session& s, const std::atomic<bool>& cancelled) {
                return orchestrator_.add_theme(s, body.at("label").get<std::string>(), poles,
                                               providers::CallContext{&cancelled});
            });
            return Response{201, json{{"session", *snap}, {"axis", snap->axes.back()}}};
        });
    }

    // GET /sessions/{id}/images/{image_id}
    Response get_image(const std::string& id, const std::string& image_id) {
        return guarded("get_image", [&] {
            auto snap = registry_.snapshot(id);
            const ImageRef* img = snap->find_image(image_id);
            if (!img) fail(ErrorCode::unknown_image, "no image " + image_id, json{{"image_id", image_id}});
            Response r{200, nullptr};
            r.raw = rt_.blobs->get(img->payload_hash);
            auto fmt = sniff_image(r.raw);
            r.content_type = fmt ? std::string(media_type(*fmt)) : "application/octet-stream";
            return r;
        });
    }

    // DELETE /sessions/{id}
    Response delete_session(const std::string& id) {
        return guarded("delete_session", [&] {
            if (!registry_.remove(id)) fail(ErrorCode::unknown_session, "no session " + id);
            return Response{204, nullptr};
        });
    }

    // GET /healthz
    Response healthz() {
        return guarded("healthz", [&] {
            static const char* const kNames[] = {"language_model", "embedder", "generator"};
            json status = json::object();
            bool healthy = true;
            for (std::size_t i = 0; i < rt_.clients.size(); ++i) {
                bool up = rt_.clients[i]->reachable();
                status[kNames[i]] = up ? "reachable" : "unreachable";
                healthy = healthy && up;
            }
            return Response{healthy ? 200 : 503,
                            json{{"status", healthy ? "ok" : "degraded"},
                                 {"mode", cfg_.all_mock() ? "mock" : "remote"},
                                 {"providers", status}}};
        });
    }

private:
    static json describe(const orchestrator::ScoredPerturbation& d) {
        return json{{"perturbation_id", d.perturbation.id}, {"label", d.perturbation.label},
                    {"direction", d.perturbation.direction}, {"intensity_rank", d.perturbation.intensity_rank},
                    {"score", d.score},                       {"rank", d.rank}};
    }

    static orchestrator::NavigationGesture parse_gesture(const json& body) {
        if (!body.is_object() || !body.contains("axis_id") || !body.at("axis_id").is_string() ||
            !body.contains("position") || !body.at("position").is_number())
            fail(ErrorCode::invalid_argument, "body must be {axis_id: string, position: number, k?: integer}");
        orchestrator::NavigationGesture g{body.at("axis_id").get<std::string>(), body.at("position").get<double>()};
        orchestrator::check_position(g.position);
        return g;
    }

    int parse_k(const json& body) const {
        if (!body.contains("k")) return cfg_.limits.default_k;
        const auto& k = body.at("k");
        if (!k.is_number_integer() || k.get<std::int64_t>() < 1)
            fail(ErrorCode::invalid_argument, "k must be a positive integer");
        return static_cast<int>(std::min<std::int64_t>(k.get<std::int64_t>(), 1 << 20));
    }

    template <typename F>
    Response guarded(std::string_view op, F&& f) {
        try {
            return f();
        } catch (const Error& e) {
            logger_->warn("request_failed", json{{"op", op}, {"code", to_string(e.code())}, {"message", e.what()}});
            return error_response(e);
        } catch (const std::exception& e) {
            logger_->error("request_crashed", json{{"op", op}, {"message", e.what()}});
            return Response{500, Error(ErrorCode::storage_unavailable, "internal error").to_json()};
        }
    }

    AppConfig cfg_;
    Runtime rt_;
    std::shared_ptr<Logger> logger_;
    orchestrator::Orchestrator orchestrator_;
    orchestrator::SessionRegistry registry_;
};

}  // namespace thematic::service
