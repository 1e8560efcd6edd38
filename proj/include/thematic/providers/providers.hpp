#pragma once

// Typed views over the three provider roles. Each validates the response
// shape of its wire contract and maps failures onto the role's error codes.

#include <optional>
#include <string>
#include <vector>

#include "thematic/core/model.hpp"
#include "thematic/providers/client.hpp"
#include "thematic/templates.hpp"

namespace thematic::providers {

/// Replaces every `{slot}` whose name is a key of `slots`. Arrays render as a
/// comma-separated list; other non-string values render as JSON.
inline std::string render_template(std::string_view text, const json& slots) {
    std::string out(text);
    for (const auto& [name, value] : slots.items()) {
        std::string rendered;
        if (value.is_string()) {
            rendered = value.get<std::string>();
        } else if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i) rendered += ", ";
                rendered += value[i].is_string() ? value[i].get<std::string>() : value[i].dump();
            }
        } else {
            rendered = value.dump();
        }
        const std::string token = "{" + name + "}";
        for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + rendered.size()))
            out.replace(pos, token.size(), rendered);
    }
    return out;
}

inline std::string template_id(const templates::Template& t) {
    return std::string(t.name) + "@" + std::string(t.version);
}

// ---------------------------------------------------------------------------

struct LmRequest {
    const templates::Template* instruction_template = nullptr;
    json slots = json::object();
    std::optional<Bytes> image;

    json to_json() const {
        json j{{"instruction_template_id", template_id(*instruction_template)},
               {"instruction", render_template(instruction_template->text, slots)},
               {"slots", slots}};
        if (image) j["image"] = base64_encode(*image);
        return j;
    }
};

class LanguageModel {
public:
    explicit LanguageModel(std::shared_ptr<ProviderClient> client) : client_(std::move(client)) {}

    /// Returns the structured JSON answer; must be an object.
    json complete(const LmRequest& req, const CallContext& ctx = {}) const {
        std::string op = "language_model." + template_id(*req.instruction_template);
        json response = client_->call(op, req.to_json(), ctx);
        if (!response.is_object())
            fail(ErrorCode::contract_violation, op + " response must be a JSON object");
        return response;
    }

    ProviderClient& client() const { return *client_; }

private:
    std::shared_ptr<ProviderClient> client_;
};

// ---------------------------------------------------------------------------

inline constexpr std::string_view kEmbedOperation = "embedder.embed";

class Embedder {
public:
    explicit Embedder(std::shared_ptr<ProviderClient> client, int batch_size = 16)
        : client_(std::move(client)), batch_size_(std::max(1, batch_size)) {}

    EmbeddingVector embed_image(const Bytes& image, const CallContext& ctx = {}) const {
        json req{{"kind", "image"}, {"payload", base64_encode(image)}};
        return parse(client_->call(kEmbedOperation, req, ctx));
    }

    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& labels, const CallContext& ctx = {}) const {
        std::vector<EmbeddingVector> out;
        out.reserve(labels.size());
        for (std::size_t start = 0; start < labels.size(); start += static_cast<std::size_t>(batch_size_)) {
            std::vector<json> batch;
            for (std::size_t i = start; i < labels.size() && i < start + static_cast<std::size_t>(batch_size_); ++i)
                batch.push_back(json{{"kind", "text"}, {"payload", labels[i]}});
            auto responses = client_->call_batch(kEmbedOperation, batch, ctx);
            if (responses.size() != batch.size())
                fail(ErrorCode::contract_violation, "embedder returned wrong number of vectors");
            for (const auto& r : responses) out.push_back(parse(r));
        }
        return out;
    }

    int batch_size() const { return batch_size_; }

private:
    static EmbeddingVector parse(const json& r) {
        if (!r.is_object() || !r.contains("space_tag") || !r.contains("dim") || !r.contains("values") ||
            !r.at("space_tag").is_string() || !r.at("dim").is_number_integer() || !r.at("values").is_array())
            fail(ErrorCode::contract_violation, "embedder response must be {space_tag, dim, values}");
        auto dim = r.at("dim").get<std::int64_t>();
        const auto& values = r.at("values");
        if (dim < 1 || static_cast<std::size_t>(dim) != values.size())
            fail(ErrorCode::embedding_space_mismatch,
                 "embedder declared dim " + std::to_string(dim) + " but returned " + std::to_string(values.size()) +
                     " values",
                 json{{"declared_dim", dim}, {"returned", values.size()}, {"space_tag", r.at("space_tag")}});
        std::vector<double> v;
        v.reserve(values.size());
        for (const auto& x : values) {
            if (!x.is_number()) fail(ErrorCode::contract_violation, "embedder values must be numbers");
            v.push_back(x.get<double>());
        }
        try {
            return EmbeddingVector(std::move(v), r.at("space_tag").get<std::string>());
        } catch (const Error& e) {
            fail(ErrorCode::contract_violation, std::string("embedder returned an invalid vector: ") + e.what());
        }
    }

    std::shared_ptr<ProviderClient> client_;
    int batch_size_;
};

// ---------------------------------------------------------------------------

inline constexpr std::string_view kGenerateOperation = "generator.generate";

struct GenerateRequest {
    std::string prompt;
    std::optional<Bytes> reference_image;
    std::optional<std::int64_t> seed;

    json to_json() const {
        json j{{"prompt", prompt}};
        if (reference_image) j["reference_image"] = base64_encode(*reference_image);
        if (seed) j["seed"] = *seed;
        return j;
    }
};

struct GenerateResponse {
    Bytes image;
    json provider_meta;
};

class Generator {
public:
    explicit Generator(std::shared_ptr<ProviderClient> client, bool send_reference = true)
        : client_(std::move(client)), send_reference_(send_reference) {}

    bool sends_reference() const { return send_reference_; }

    GenerateResponse generate(const GenerateRequest& req, const CallContext& ctx = {}) const {
        json r;
        try {
            r = client_->call(kGenerateOperation, req.to_json(), ctx);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::provider_unavailable || e.code() == ErrorCode::cancelled)
                throw Error(ErrorCode::generator_unavailable, e.what(), e.details());
            throw;
        }
        if (r.is_object() && r.contains("refusal")) {
            const auto& ref = r.at("refusal");
            std::string msg = ref.is_object() ? ref.value("message", "refused") : ref.dump();
            fail(ErrorCode::generator_refused, "generator refused: " + msg, json{{"provider_message", msg}});
        }
        if (!r.is_object() || !r.contains("image") || !r.at("image").is_string())
            fail(ErrorCode::contract_violation, "generator response must be {image, provider_meta}");
        Bytes image = base64_decode(r.at("image").get<std::string>());
        if (!sniff_image(image)) fail(ErrorCode::contract_violation, "generator returned bytes that are not PNG/JPEG");
        return {std::move(image), r.value("provider_meta", json::object())};
    }

private:
    std::shared_ptr<ProviderClient> client_;
    bool send_reference_;
};

/// The three provider roles bundled for the pipeline.
struct ProviderSet {
    std::shared_ptr<LanguageModel> language_model;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<Generator> generator;
};

}  // namespace thematic::providers
