#pragma once

// Keyword extraction, thematic refinement and bipolar axis construction.

#include <future>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "thematic/core/clock.hpp"
#include "thematic/core/model.hpp"
#include "thematic/providers/providers.hpp"

namespace thematic::theme {

enum class KeywordKind { object, thematic, unknown };

inline std::string_view to_string(KeywordKind k) {
    switch (k) {
        case KeywordKind::object: return "object";
        case KeywordKind::thematic: return "thematic";
        case KeywordKind::unknown: return "unknown";
    }
    return "unknown";
}

struct KeywordCandidate {
    std::string label;
    KeywordKind kind = KeywordKind::unknown;

    bool operator==(const KeywordCandidate&) const = default;
};

struct AxisRequest {
    Theme theme;
    std::optional<std::pair<std::string, std::string>> pole_hint;  // (left, right)
    int perturbation_count = kPerturbationsPerAxis;
};

inline Theme make_theme(std::string_view scope, std::string_view label, ThemeSource source) {
    std::string clean = normalize_label(label);
    if (clean.empty()) fail(ErrorCode::invalid_argument, "theme label is empty");
    return Theme{derive_id("th", {scope, dedup_key(clean)}), clean, source};
}

inline std::pair<std::string, std::string> fallback_poles(const std::string& label) {
    return {"less " + label, "more " + label};
}

struct PipelineOptions {
    int axis_concurrency = 4;
};

class ThemePipeline {
public:
    explicit ThemePipeline(std::shared_ptr<providers::LanguageModel> lm, PipelineOptions options = {})
        : lm_(std::move(lm)), options_(options) {}

    /// Provider keywords, normalized and deduplicated case-insensitively,
    /// in provider order.
    std::vector<KeywordCandidate> extract_keywords(const Bytes& image,
                                                   const providers::CallContext& ctx = {}) const {
        providers::LmRequest req{&templates::extract_keywords, json::object(), image};
        json r = lm_->complete(req, ctx);
        if (!r.contains("keywords") || !r.at("keywords").is_array())
            fail(ErrorCode::contract_violation, "extract_keywords response must be {keywords: [...]}");
        std::vector<KeywordCandidate> out;
        std::vector<std::string> keys;
        for (const auto& k : r.at("keywords")) {
            if (!k.is_string()) continue;
            std::string label = normalize_label(k.get<std::string>());
            if (label.empty()) continue;
            std::string key = dedup_key(label);
            if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
            keys.push_back(std::move(key));
            out.push_back({std::move(label), KeywordKind::unknown});
        }
        if (out.empty()) fail(ErrorCode::empty_extraction, "language model returned no usable keywords");
        return out;
    }

    std::vector<KeywordCandidate> classify_keywords(std::vector<KeywordCandidate> candidates,
                                                    const providers::CallContext& ctx = {}) const {
        if (candidates.empty()) return candidates;
        json labels = json::array();
        for (const auto& c : candidates) {
            if (c.kind != KeywordKind::unknown)
                fail(ErrorCode::invalid_argument, "keyword '" + c.label + "' is already classified");
            labels.push_back(c.label);
        }
        providers::LmRequest req{&templates::classify_keywords, json{{"keywords", labels}}, std::nullopt};
        json r = lm_->complete(req, ctx);
        if (!r.contains("classifications") || !r.at("classifications").is_array())
            fail(ErrorCode::contract_violation, "classify_keywords response must be {classifications: [...]}");

        std::map<std::string, KeywordKind> verdicts;
        for (const auto& item : r.at("classifications")) {
            if (!item.is_object() || !item.contains("label") || !item.contains("kind"))
                fail(ErrorCode::contract_violation, "classification entries must be {label, kind}");
            auto kind = item.at("kind").get<std::string>();
            KeywordKind k;
            if (kind == "object") k = KeywordKind::object;
            else if (kind == "thematic") k = KeywordKind::thematic;
            else fail(ErrorCode::contract_violation, "classification kind must be object or thematic, got '" + kind + "'");
            verdicts.emplace(dedup_key(item.at("label").get<std::string>()), k);
        }
        json missing = json::array();
        for (auto& c : candidates) {
            auto it = verdicts.find(dedup_key(c.label));
            if (it == verdicts.end()) missing.push_back(c.label);
            else c.kind = it->second;
        }
        if (!missing.empty())
            fail(ErrorCode::classification_incomplete,
                 "language model did not classify " + std::to_string(missing.size()) + " keyword(s)",
                 json{{"missing", missing}});
        return candidates;
    }

    /// Themes for the thematic candidates, in input order. Theme ids are
    /// scoped (normally by session id).
    static std::vector<Theme> filter_thematic(const std::vector<KeywordCandidate>& candidates,
                                              std::string_view id_scope) {
        std::vector<Theme> out;
        for (const auto& c : candidates) {
            if (c.kind == KeywordKind::unknown)
                fail(ErrorCode::invalid_argument, "keyword '" + c.label + "' has not been classified");
            if (c.kind == KeywordKind::thematic) out.push_back(make_theme(id_scope, c.label, ThemeSource::extracted));
        }
        if (out.empty())
            fail(ErrorCode::no_themes_found, "no thematic keywords found; add a theme manually",
                 json{{"candidates", candidates.size()}});
        return out;
    }

    ThemeAxis build_axis(const AxisRequest& request, const providers::CallContext& ctx = {}) const {
        if (request.perturbation_count != kPerturbationsPerAxis)
            fail(ErrorCode::invalid_argument, "perturbation_count must be 12");
        if (trim(request.theme.label).empty()) fail(ErrorCode::invalid_argument, "theme label is empty");

        ThemeAxis axis;
        axis.theme = request.theme;
        axis.id = derive_id("ax", {request.theme.id});
        std::tie(axis.left_pole_label, axis.right_pole_label) =
            request.pole_hint ? *request.pole_hint : resolve_poles(request.theme.label, ctx);

        providers::LmRequest req{&templates::axis_perturbations,
                                 json{{"theme", request.theme.label},
                                      {"left_pole", axis.left_pole_label},
                                      {"right_pole", axis.right_pole_label},
                                      {"per_direction", kPerturbationsPerDirection}},
                                 std::nullopt};
        json r = lm_->complete(req, ctx);
        if (!r.contains("left") || !r.contains("right") || !r.at("left").is_array() || !r.at("right").is_array())
            fail(ErrorCode::contract_violation, "axis_perturbations response must be {left: [...], right: [...]}");

        // Deduplicate across the whole axis, left list first; each side keeps
        // its first six distinct labels in mild-to-strong order.
        std::vector<std::string> seen;
        std::map<Direction, std::vector<std::string>> kept;
        for (Direction d : {Direction::left, Direction::right}) {
            for (const auto& item : r.at(std::string(to_string(d)))) {
                if (!item.is_string()) continue;
                std::string label = normalize_label(item.get<std::string>());
                if (label.empty()) continue;
                std::string key = dedup_key(label);
                if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                seen.push_back(std::move(key));
                if (kept[d].size() < static_cast<std::size_t>(kPerturbationsPerDirection))
                    kept[d].push_back(std::move(label));
            }
        }
        const auto& left = kept[Direction::left];
        const auto& right = kept[Direction::right];
        if (left.size() + right.size() < static_cast<std::size_t>(kPerturbationsPerAxis)) {
            fail(ErrorCode::incomplete_axis,
                 "language model produced " + std::to_string(left.size() + right.size()) +
                     " usable distinct perturbations for '" +
                     request.theme.label + "' (need 6 per direction)",
                 json{{"got", left.size() + right.size()}, {"left", left}, {"right", right}});
        }
        for (Direction d : {Direction::left, Direction::right}) {
            int rank = 1;
            for (const auto& label : kept[d]) {
                axis.perturbations.push_back(Perturbation{
                    derive_id("pt", {axis.id, to_string(d), std::to_string(rank), label}), axis.id, label, d, rank});
                ++rank;
            }
        }
        return axis;
    }

    /// Builds several axes with at most `axis_concurrency` in flight; results
    /// keep request order. The first failure is rethrown after all finish.
    std::vector<ThemeAxis> build_axes(const std::vector<AxisRequest>& requests,
                                      const providers::CallContext& ctx = {}) const {
        std::counting_semaphore<64> slots(std::clamp(options_.axis_concurrency, 1, 64));
        std::vector<std::future<ThemeAxis>> futures;
        futures.reserve(requests.size());
        for (const auto& req : requests) {
            futures.push_back(std::async(std::launch::async, [this, &req, &ctx, &slots] {
                slots.acquire();
                struct Release {
                    std::counting_semaphore<64>& s;
                    ~Release() { s.release(); }
                } release{slots};
                return build_axis(req, ctx);
            }));
        }
        std::vector<ThemeAxis> out;
        std::exception_ptr first_error;
        for (auto& f : futures) {
            try {
                out.push_back(f.get());
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
        return out;
    }

private:
    std::pair<std::string, std::string> resolve_poles(const std::string& theme_label,
                                                      const providers::CallContext& ctx) const {
        try {
            providers::LmRequest req{&templates::axis_poles, json{{"theme", theme_label}}, std::nullopt};
            json r = lm_->complete(req, ctx);
            std::string left = normalize_label(r.value("left_pole", ""));
            std::string right = normalize_label(r.value("right_pole", theme_label));
            if (right.empty()) right = theme_label;
            if (left.empty() || dedup_key(left) == dedup_key(right)) return fallback_poles(theme_label);
            return {left, right};
        } catch (const Error& e) {
            if (e.code() == ErrorCode::cancelled) throw;
            return fallback_poles(theme_label);
        } catch (const json::exception&) {
            return fallback_poles(theme_label);
        }
    }

    std::shared_ptr<providers::LanguageModel> lm_;
    PipelineOptions options_;
};

}  // namespace thematic::theme
