#pragma once

#include <mutex>
#include <optional>

#include "thematic/providers/providers.hpp"
#include "thematic/ranking/ranker.hpp"

namespace thematic::ranking {

/// Embedder front end: content-keyed cache plus the alignment contract that
/// image and text vectors share one (space_tag, dim).
class EmbeddingService {
public:
    EmbeddingService(std::shared_ptr<providers::Embedder> embedder, std::string space_key,
                     std::size_t cache_capacity = 1024)
        : embedder_(std::move(embedder)), space_key_(std::move(space_key)), cache_(cache_capacity) {}

    EmbeddingVector embed_image(const ImageRef& image, const Bytes& payload, const providers::CallContext& ctx = {}) {
        if (sha256_hex(payload) != image.payload_hash)
            fail(ErrorCode::invalid_argument, "payload does not match payload_hash of image " + image.id);
        const std::string key = cache_key("image", image.payload_hash);
        if (auto hit = cache_.get(key)) return *hit;
        EmbeddingVector v = embedder_->embed_image(payload, ctx);
        check_space(v);
        cache_.put(key, v);
        return v;
    }

    std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& labels,
                                             const providers::CallContext& ctx = {}) {
        for (const auto& l : labels)
            if (trim(l).empty()) fail(ErrorCode::invalid_argument, "cannot embed an empty label");
        std::vector<std::optional<EmbeddingVector>> slots(labels.size());
        std::vector<std::string> misses;
        std::vector<std::size_t> miss_at;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (auto hit = cache_.get(cache_key("text", labels[i]))) slots[i] = std::move(hit);
            else {
                misses.push_back(labels[i]);
                miss_at.push_back(i);
            }
        }
        if (!misses.empty()) {
            auto fresh = embedder_->embed_texts(misses, ctx);
            for (std::size_t j = 0; j < fresh.size(); ++j) {
                check_space(fresh[j]);
                cache_.put(cache_key("text", misses[j]), fresh[j]);
                slots[miss_at[j]] = std::move(fresh[j]);
            }
        }
        std::vector<EmbeddingVector> out;
        out.reserve(labels.size());
        for (auto& s : slots) out.push_back(std::move(*s));
        return out;
    }

    const EmbeddingCache& cache() const { return cache_; }

private:
    std::string cache_key(std::string_view kind, std::string_view key) const {
        return space_key_ + '\x1f' + std::string(kind) + '\x1f' + std::string(key);
    }

    void check_space(const EmbeddingVector& v) {
        std::lock_guard lock(mu_);
        if (!space_) {
            space_.emplace(v.space_tag(), v.dim());
            return;
        }
        if (space_->first != v.space_tag() || space_->second != v.dim())
            fail(ErrorCode::embedding_space_mismatch,
                 "embedder returned (" + v.space_tag() + ", " + std::to_string(v.dim()) + "), expected (" +
                     space_->first + ", " + std::to_string(space_->second) + ")");
    }

    std::shared_ptr<providers::Embedder> embedder_;
    std::string space_key_;
    EmbeddingCache cache_;
    std::mutex mu_;
    std::optional<std::pair<std::string, std::size_t>> space_;
};

}  // namespace thematic::ranking
