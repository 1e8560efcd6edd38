#pragma once

#include <algorithm>
#include <cmath>
#include <list>
#include <mutex>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "thematic/core/model.hpp"
#include "thematic/hash.hpp"

namespace thematic::ranking {

enum class TieBreak { by_perturbation_id };

/// Which end of the similarity scale gets rank 1.
enum class Polarity { compatibility_first, novelty_first };

/// dot(a, b) / (|a| |b|) without clamping. Both operands are evaluated in
/// index order, so swapping them gives a bit-identical result.
inline double cosine_unclamped(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim())
        fail(ErrorCode::dimension_mismatch,
             "cosine similarity of dim " + std::to_string(a.dim()) + " and dim " + std::to_string(b.dim()));
    const auto& x = a.values();
    const auto& y = b.values();
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
    }
    if (nx == 0.0 || ny == 0.0) fail(ErrorCode::zero_norm_vector, "cosine similarity of a zero-norm vector");
    // sqrt(nx) * sqrt(ny) commutes exactly; sqrt(nx * ny) could overflow.
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return std::clamp(cosine_unclamped(a, b), -1.0, 1.0);
}

struct RankingInput {
    EmbeddingVector image_embedding;
    std::vector<std::pair<std::string, EmbeddingVector>> perturbation_embeddings;
    TieBreak tie_break = TieBreak::by_perturbation_id;
};

struct RankingResult {
    std::vector<RankedDescriptor> descriptors;  // rank 1..n
    std::string input_fingerprint;
};

inline std::string fingerprint(const RankingInput& in, Polarity polarity) {
    json j{{"image_embedding", in.image_embedding},
           {"perturbation_embeddings", json::array()},
           {"tie_break", "by_perturbation_id"},
           {"polarity", polarity == Polarity::compatibility_first ? "compatibility_first" : "novelty_first"}};
    for (const auto& [id, v] : in.perturbation_embeddings)
        j["perturbation_embeddings"].push_back(json{{"perturbation_id", id}, {"embedding", v}});
    return sha256_hex(j.dump());
}

/// Orders perturbations by cosine similarity to the image embedding; equal
/// scores fall back to ascending perturbation id.
inline RankingResult rank_descriptors(const RankingInput& in, Polarity polarity = Polarity::compatibility_first) {
    if (in.perturbation_embeddings.empty())
        fail(ErrorCode::invalid_argument, "ranking requires at least one perturbation embedding");

    const auto& image = in.image_embedding;
    std::vector<RankedDescriptor> out;
    out.reserve(in.perturbation_embeddings.size());
    for (const auto& [id, v] : in.perturbation_embeddings) {
        if (v.dim() != image.dim())
            fail(ErrorCode::dimension_mismatch,
                 "perturbation " + id + " has dim " + std::to_string(v.dim()) + ", image has " +
                     std::to_string(image.dim()),
                 json{{"perturbation_id", id}});
        if (v.space_tag() != image.space_tag())
            fail(ErrorCode::embedding_space_mismatch,
                 "perturbation " + id + " is in space '" + v.space_tag() + "', image in '" + image.space_tag() + "'",
                 json{{"perturbation_id", id}});
        double score = 0.0;
        try {
            score = cosine_similarity(image, v);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::zero_norm_vector) throw;
            std::string who = std::all_of(image.values().begin(), image.values().end(), [](double x) { return x == 0.0; })
                                  ? std::string("image_embedding")
                                  : id;
            fail(ErrorCode::zero_norm_vector, "zero-norm vector: " + who, json{{"id", who}});
        }
        out.push_back({id, score, 0});
    }

    std::vector<std::string> ids;
    for (const auto& d : out) ids.push_back(d.perturbation_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        fail(ErrorCode::invalid_argument, "perturbation ids in a ranking input must be distinct");

    std::sort(out.begin(), out.end(), [polarity](const RankedDescriptor& a, const RankedDescriptor& b) {
        if (a.score != b.score)
            return polarity == Polarity::compatibility_first ? a.score > b.score : a.score < b.score;
        return a.perturbation_id < b.perturbation_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
    return {std::move(out), fingerprint(in, polarity)};
}

/// Thread-safe LRU map from cache key to embedding.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::size_t capacity = 1024) : capacity_(std::max<std::size_t>(1, capacity)) {}

    std::optional<EmbeddingVector> get(const std::string& key) {
        std::lock_guard lock(mu_);
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        order_.splice(order_.begin(), order_, it->second);
        return it->second->second;
    }

    void put(const std::string& key, EmbeddingVector value) {
        std::lock_guard lock(mu_);
        if (auto it = index_.find(key); it != index_.end()) {
            it->second->second = std::move(value);
            order_.splice(order_.begin(), order_, it->second);
            return;
        }
        order_.emplace_front(key, std::move(value));
        index_[key] = order_.begin();
        while (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return order_.size();
    }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::list<std::pair<std::string, EmbeddingVector>> order_;
    std::unordered_map<std::string, std::list<std::pair<std::string, EmbeddingVector>>::iterator> index_;
};

}  // namespace thematic::ranking
