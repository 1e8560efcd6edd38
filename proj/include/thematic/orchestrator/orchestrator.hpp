#pragma once

// Session lifecycle: creation from an upload, navigation previews,
// generation into the lineage tree and promotion of a reference image.
// Every operation takes a Session by const reference and returns a new
// value; callers commit the result only on success.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thematic/core/clock.hpp"
#include "thematic/core/model.hpp"
#include "thematic/image_format.hpp"
#include "thematic/orchestrator/mapping.hpp"
#include "thematic/orchestrator/prompt.hpp"
#include "thematic/orchestrator/store.hpp"
#include "thematic/providers/providers.hpp"
#include "thematic/ranking/embedding.hpp"
#include "thematic/theme/pipeline.hpp"

namespace thematic::orchestrator {

inline constexpr int kDefaultDescriptorCount = 3;
inline constexpr std::size_t kDefaultMaxUploadBytes = 20u * 1024u * 1024u;

struct OrchestratorOptions {
    int max_themes = 4;
    int default_k = kDefaultDescriptorCount;
    ranking::Polarity polarity = ranking::Polarity::compatibility_first;
    bool send_reference_image = true;
    std::size_t max_upload_bytes = kDefaultMaxUploadBytes;
};

struct ScoredPerturbation {
    Perturbation perturbation;
    double score = 0.0;
    int rank = 0;
};

inline void to_json(json& j, const ScoredPerturbation& s) {
    j = json{{"perturbation", s.perturbation}, {"score", s.score}, {"rank", s.rank}};
}

struct DescriptorSelection {
    std::vector<ScoredPerturbation> descriptors;  // best first, at most k
    std::string ranking_fingerprint;              // empty when nothing was ranked
};

struct GenerationRecord {
    ImageRef image;
    PromptSpec prompt;
    std::string ranking_fingerprint;
    std::int64_t provider_latency_ms = 0;
};

inline void to_json(json& j, const GenerationRecord& r) {
    j = json{{"image", r.image},
             {"prompt", r.prompt},
             {"ranking_fingerprint", r.ranking_fingerprint},
             {"provider_latency_ms", r.provider_latency_ms}};
}

struct CreatedSession {
    Session session;
    std::vector<Theme> themes;
};

struct NavigationPreview {
    Session session;  // with the navigation position recorded
    DescriptorSelection selection;
    PromptSpec prompt;
    std::string prompt_preview;
};

struct Generated {
    Session session;
    GenerationRecord record;
};

class Orchestrator {
public:
    Orchestrator(providers::ProviderSet providers, std::shared_ptr<ranking::EmbeddingService> embeddings,
                 std::shared_ptr<BlobStore> blobs, std::shared_ptr<Clock> clock,
                 OrchestratorOptions options = {}, theme::PipelineOptions pipeline_options = {})
        : providers_(std::move(providers)),
          embeddings_(std::move(embeddings)),
          blobs_(std::move(blobs)),
          clock_(std::move(clock)),
          options_(options),
          pipeline_(providers_.language_model, pipeline_options) {}

    const OrchestratorOptions& options() const { return options_; }
    const theme::ThemePipeline& pipeline() const { return pipeline_; }
    BlobStore& blobs() const { return *blobs_; }

    /// Upload validation shared by the service and the CLI.
    ImageFormat check_upload(const Bytes& bytes) const {
        if (bytes.size() > options_.max_upload_bytes)
            fail(ErrorCode::payload_too_large, "image exceeds " + std::to_string(options_.max_upload_bytes) + " bytes",
                 json{{"size", bytes.size()}, {"limit", options_.max_upload_bytes}});
        auto fmt = sniff_image(bytes);
        if (!fmt) fail(ErrorCode::image_undecodable, "payload is not a decodable PNG or JPEG image");
        return *fmt;
    }

    /// extract -> classify -> filter -> build axes for up to max_themes
    /// themes. Extra user themes are appended after extracted ones; with user
    /// themes present, an extraction without thematic keywords is not fatal.
    CreatedSession create_session(const std::string& session_id, const Bytes& image,
                                  const std::vector<std::string>& user_themes = {},
                                  const providers::CallContext& ctx = {}) const {
        check_upload(image);
        std::vector<Theme> themes;
        try {
            auto keywords = pipeline_.extract_keywords(image, ctx);
            auto classified = pipeline_.classify_keywords(std::move(keywords), ctx);
            themes = theme::ThemePipeline::filter_thematic(classified, session_id);
        } catch (const Error& e) {
            bool recoverable = e.code() == ErrorCode::no_themes_found || e.code() == ErrorCode::empty_extraction;
            if (!recoverable || user_themes.empty()) throw;
        }
        if (themes.size() > static_cast<std::size_t>(options_.max_themes))
            themes.resize(static_cast<std::size_t>(options_.max_themes));
        for (const auto& label : user_themes) {
            Theme t = theme::make_theme(session_id, label, ThemeSource::user_added);
            bool dup = std::any_of(themes.begin(), themes.end(), [&](const Theme& x) { return x.id == t.id; });
            if (!dup) themes.push_back(std::move(t));
        }

        std::vector<theme::AxisRequest> requests;
        for (const auto& t : themes) requests.push_back({t, std::nullopt});
        auto axes = pipeline_.build_axes(requests, ctx);

        std::string description = describe(image, ctx);

        auto hash = blobs_->put(image);
        Session s;
        s.id = session_id;
        ImageRef root{derive_id("img", {session_id, "root", hash}), hash, ImageOrigin::uploaded,
                      std::nullopt, std::nullopt, description};
        s.images.push_back(root);
        s.primary_ref = root.id;
        s.axes = std::move(axes);
        for (const auto& a : s.axes) s.navigation[a.id] = 0.0;
        s.created_at = clock_->now();
        s.updated_at = s.created_at;
        return {std::move(s), std::move(themes)};
    }

    /// Adds a user-supplied theme axis to an existing session.
    Session add_theme(const Session& session, const std::string& label,
                      std::optional<std::pair<std::string, std::string>> pole_hint = std::nullopt,
                      const providers::CallContext& ctx = {}) const {
        Theme t = theme::make_theme(session.id, label, ThemeSource::user_added);
        for (const auto& a : session.axes)
            if (a.theme.id == t.id) fail(ErrorCode::duplicate_theme, "theme '" + t.label + "' already has an axis");
        ThemeAxis axis = pipeline_.build_axis({t, std::move(pole_hint)}, ctx);
        Session next = session;
        next.navigation[axis.id] = 0.0;
        next.axes.push_back(std::move(axis));
        next.updated_at = clock_->now();
        return next;
    }

    DescriptorSelection gesture_to_descriptors(const Session& session, const NavigationGesture& gesture, int k,
                                               const providers::CallContext& ctx = {}) const {
        if (k < 1) fail(ErrorCode::invalid_argument, "k must be >= 1");
        check_position(gesture.position);
        const ThemeAxis* axis = session.find_axis(gesture.axis_id);
        if (!axis) fail(ErrorCode::unknown_axis, "no axis " + gesture.axis_id, json{{"axis_id", gesture.axis_id}});

        auto candidates = candidates_for(*axis, gesture.position);
        DescriptorSelection out;
        if (candidates.empty()) return out;

        const ImageRef& primary = session.primary();
        EmbeddingVector image_vec = embeddings_->embed_image(primary, blobs_->get(primary.payload_hash), ctx);
        std::vector<std::string> labels;
        for (const auto& p : candidates) labels.push_back(p.label);
        auto text_vecs = embeddings_->embed_texts(labels, ctx);

        ranking::RankingInput input{image_vec, {}, ranking::TieBreak::by_perturbation_id};
        for (std::size_t i = 0; i < candidates.size(); ++i)
            input.perturbation_embeddings.emplace_back(candidates[i].id, text_vecs[i]);
        auto result = ranking::rank_descriptors(input, options_.polarity);

        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), result.descriptors.size());
        for (std::size_t i = 0; i < take; ++i) {
            const auto& d = result.descriptors[i];
            out.descriptors.push_back({*axis->find(d.perturbation_id), d.score, d.rank});
        }
        out.ranking_fingerprint = result.input_fingerprint;
        return out;
    }

    /// Base description of the primary reference; asks the language model
    /// when the reference has none cached.
    std::string base_description(const Session& session, const providers::CallContext& ctx = {}) const {
        const ImageRef& primary = session.primary();
        if (primary.base_description && !trim(*primary.base_description).empty()) return *primary.base_description;
        try {
            return describe(blobs_->get(primary.payload_hash), ctx);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::cancelled) throw;
            fail(ErrorCode::missing_base_description,
                 "no base description for image " + primary.id + " and the language model could not produce one: " +
                     e.what());
        }
    }

    PromptSpec synthesize_prompt(const Session& session, const std::vector<Perturbation>& descriptors,
                                 const providers::CallContext& ctx = {}) const {
        if (descriptors.size() > kMaxInjectedDescriptors)
            fail(ErrorCode::invalid_argument, "at most 6 descriptors can be injected");
        return make_prompt_spec(base_description(session, ctx), descriptors);
    }

    /// Preview: ranked descriptors and the prompt that would be sent. Records
    /// the position in the returned session; lineage is untouched.
    NavigationPreview navigate(const Session& session, const NavigationGesture& gesture, int k,
                               const providers::CallContext& ctx = {}) const {
        auto selection = gesture_to_descriptors(session, gesture, k, ctx);
        auto prompt = synthesize_prompt(session, perturbations_of(selection), ctx);
        Session next = session;
        cache_description(next, prompt.base_description);
        next.navigation[gesture.axis_id] = gesture.position;
        next.updated_at = clock_->now();
        auto preview = render_prompt(prompt);
        return {std::move(next), std::move(selection), std::move(prompt), std::move(preview)};
    }

    /// Ranks, builds the prompt, calls the generator and appends a child of
    /// the primary reference. The primary reference does not change.
    Generated generate(const Session& session, const NavigationGesture& gesture, int k,
                       std::optional<std::int64_t> seed = std::nullopt,
                       const providers::CallContext& ctx = {}) const {
        auto selection = gesture_to_descriptors(session, gesture, k, ctx);
        auto prompt = synthesize_prompt(session, perturbations_of(selection), ctx);
        const ImageRef& parent = session.primary();

        providers::GenerateRequest req{render_prompt(prompt), std::nullopt, seed};
        if (options_.send_reference_image && providers_.generator->sends_reference())
            req.reference_image = blobs_->get(parent.payload_hash);
        auto started = std::chrono::steady_clock::now();
        auto response = providers_.generator->generate(req, ctx);
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
        if (ctx.is_cancelled()) fail(ErrorCode::cancelled, "generation cancelled");

        auto hash = blobs_->put(response.image);
        ImageRef child{derive_id("img", {session.id, parent.id, hash, std::to_string(session.images.size())}),
                       hash,
                       ImageOrigin::generated,
                       parent.id,
                       prompt,
                       prompt.base_description};
        Session next = session;
        cache_description(next, prompt.base_description);
        next.images.push_back(child);
        next.updated_at = clock_->now();
        return {std::move(next),
                GenerationRecord{std::move(child), std::move(prompt), selection.ranking_fingerprint, latency.count()}};
    }

    Session promote_reference(const Session& session, const std::string& image_id) const {
        if (!session.find_image(image_id))
            fail(ErrorCode::unknown_image, "no image " + image_id + " in session", json{{"image_id", image_id}});
        Session next = session;
        next.updated_at = clock_->now();
        if (session.primary_ref == image_id) return next;
        next.primary_ref = image_id;
        for (auto& [axis_id, pos] : next.navigation) pos = 0.0;
        return next;
    }

private:
    static std::vector<Perturbation> perturbations_of(const DescriptorSelection& s) {
        std::vector<Perturbation> out;
        for (const auto& d : s.descriptors) out.push_back(d.perturbation);
        return out;
    }

    static void cache_description(Session& s, const std::string& description) {
        for (auto& img : s.images)
            if (img.id == s.primary_ref && !img.base_description) img.base_description = description;
    }

    std::string describe(const Bytes& image, const providers::CallContext& ctx) const {
        providers::LmRequest req{&templates::describe_image, json::object(), image};
        json r = providers_.language_model->complete(req, ctx);
        if (!r.contains("description") || !r.at("description").is_string() ||
            trim(r.at("description").get<std::string>()).empty())
            fail(ErrorCode::contract_violation, "describe_image response must be {description: \"...\"}");
        return normalize_label(r.at("description").get<std::string>());
    }

    providers::ProviderSet providers_;
    std::shared_ptr<ranking::EmbeddingService> embeddings_;
    std::shared_ptr<BlobStore> blobs_;
    std::shared_ptr<Clock> clock_;
    OrchestratorOptions options_;
    theme::ThemePipeline pipeline_;
};

}  // namespace thematic::orchestrator
