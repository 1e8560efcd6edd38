#pragma once

// Domain value types shared by every module, with their canonical JSON form.
// Field names on the wire are exactly the member names below.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "thematic/error.hpp"
#include "thematic/core/text.hpp"

namespace thematic {

using json = nlohmann::json;

inline constexpr int kPerturbationsPerAxis = 12;
inline constexpr int kPerturbationsPerDirection = 6;

enum class ThemeSource { extracted, user_added };
enum class Direction { left, right };
enum class ImageOrigin { uploaded, generated };

NLOHMANN_JSON_SERIALIZE_ENUM(ThemeSource, {{ThemeSource::extracted, "extracted"},
                                           {ThemeSource::user_added, "user_added"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Direction, {{Direction::left, "left"}, {Direction::right, "right"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ImageOrigin, {{ImageOrigin::uploaded, "uploaded"},
                                           {ImageOrigin::generated, "generated"}})

inline std::string_view to_string(Direction d) { return d == Direction::left ? "left" : "right"; }

// nlohmann's enum macro maps unknown strings to the first enumerator; wire
// input must be rejected instead.
template <typename Enum>
Enum parse_enum(const json& j, std::initializer_list<std::pair<Enum, std::string_view>> table,
                std::string_view field) {
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        for (const auto& [value, name] : table)
            if (s == name) return value;
    }
    fail(ErrorCode::invalid_argument, "invalid value for '" + std::string(field) + "': " + j.dump());
}

struct Theme {
    std::string id;
    std::string label;
    ThemeSource source = ThemeSource::extracted;

    bool operator==(const Theme&) const = default;
};

struct Perturbation {
    std::string id;
    std::string axis_id;
    std::string label;
    Direction direction = Direction::left;
    int intensity_rank = 1;  // 1 = mildest, 6 = strongest toward the pole

    bool operator==(const Perturbation&) const = default;
};

struct ThemeAxis {
    std::string id;
    Theme theme;
    std::string left_pole_label;
    std::string right_pole_label;
    std::vector<Perturbation> perturbations;

    bool operator==(const ThemeAxis&) const = default;

    const Perturbation* find(std::string_view perturbation_id) const {
        for (const auto& p : perturbations)
            if (p.id == perturbation_id) return &p;
        return nullptr;
    }
};

/// Real vector tagged with the embedding space it lives in. Construction
/// enforces dim >= 1 and finite values.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    EmbeddingVector(std::vector<double> values, std::string space_tag)
        : values_(std::move(values)), space_tag_(std::move(space_tag)) {
        if (values_.empty()) fail(ErrorCode::invalid_argument, "embedding vector must have dim >= 1");
        for (double v : values_)
            if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "embedding vector has a non-finite value");
    }

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t dim() const noexcept { return values_.size(); }
    const std::string& space_tag() const noexcept { return space_tag_; }

    EmbeddingVector scaled(double factor) const {
        auto v = values_;
        for (double& x : v) x *= factor;
        return EmbeddingVector(std::move(v), space_tag_);
    }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
    std::string space_tag_;
};

struct RankedDescriptor {
    std::string perturbation_id;
    double score = 0.0;
    int rank = 1;

    bool operator==(const RankedDescriptor&) const = default;
};

struct InjectedDescriptor {
    std::string label;
    std::string axis_id;

    bool operator==(const InjectedDescriptor&) const = default;
};

struct PromptSpec {
    std::string base_description;
    std::vector<InjectedDescriptor> injected_descriptors;  // rank 1 first
    std::string template_version;

    bool operator==(const PromptSpec&) const = default;
};

struct ImageRef {
    std::string id;
    std::string payload_hash;  // lowercase hex sha256 of the image bytes
    ImageOrigin origin = ImageOrigin::uploaded;
    std::optional<std::string> parent_id;
    std::optional<PromptSpec> prompt_used;
    // Scene description used as the prompt base when this image is primary.
    std::optional<std::string> base_description;

    bool operator==(const ImageRef&) const = default;
};

struct Session {
    std::string id;
    std::vector<ImageRef> images;  // insertion order; parents precede children
    std::string primary_ref;
    std::vector<ThemeAxis> axes;
    std::map<std::string, double> navigation;  // axis_id -> position in [-1, 1]
    std::string created_at;
    std::string updated_at;

    bool operator==(const Session&) const = default;

    const ImageRef* find_image(std::string_view image_id) const {
        for (const auto& img : images)
            if (img.id == image_id) return &img;
        return nullptr;
    }
    const ThemeAxis* find_axis(std::string_view axis_id) const {
        for (const auto& a : axes)
            if (a.id == axis_id) return &a;
        return nullptr;
    }
    const ImageRef& primary() const {
        const ImageRef* img = find_image(primary_ref);
        if (!img) fail(ErrorCode::unknown_image, "primary reference does not resolve: " + primary_ref);
        return *img;
    }
};

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const Theme& t) {
    j = json{{"id", t.id}, {"label", t.label}, {"source", t.source}};
}
inline void from_json(const json& j, Theme& t) {
    j.at("id").get_to(t.id);
    j.at("label").get_to(t.label);
    t.source = parse_enum<ThemeSource>(j.at("source"),
                                       {{ThemeSource::extracted, "extracted"},
                                        {ThemeSource::user_added, "user_added"}},
                                       "source");
}

inline void to_json(json& j, const Perturbation& p) {
    j = json{{"id", p.id},
             {"axis_id", p.axis_id},
             {"label", p.label},
             {"direction", p.direction},
             {"intensity_rank", p.intensity_rank}};
}
inline void from_json(const json& j, Perturbation& p) {
    j.at("id").get_to(p.id);
    j.at("axis_id").get_to(p.axis_id);
    j.at("label").get_to(p.label);
    p.direction = parse_enum<Direction>(j.at("direction"),
                                        {{Direction::left, "left"}, {Direction::right, "right"}}, "direction");
    j.at("intensity_rank").get_to(p.intensity_rank);
}

inline void to_json(json& j, const ThemeAxis& a) {
    j = json{{"id", a.id},
             {"theme", a.theme},
             {"left_pole_label", a.left_pole_label},
             {"right_pole_label", a.right_pole_label},
             {"perturbations", a.perturbations}};
}
inline void from_json(const json& j, ThemeAxis& a) {
    j.at("id").get_to(a.id);
    j.at("theme").get_to(a.theme);
    j.at("left_pole_label").get_to(a.left_pole_label);
    j.at("right_pole_label").get_to(a.right_pole_label);
    j.at("perturbations").get_to(a.perturbations);
}

inline void to_json(json& j, const EmbeddingVector& v) {
    j = json{{"values", v.values()}, {"dim", v.dim()}, {"space_tag", v.space_tag()}};
}
inline void from_json(const json& j, EmbeddingVector& v) {
    auto values = j.at("values").get<std::vector<double>>();
    auto dim = j.at("dim").get<std::size_t>();
    if (dim != values.size())
        fail(ErrorCode::invalid_argument, "embedding dim " + std::to_string(dim) + " does not match " +
                                              std::to_string(values.size()) + " values");
    v = EmbeddingVector(std::move(values), j.at("space_tag").get<std::string>());
}

inline void to_json(json& j, const RankedDescriptor& d) {
    j = json{{"perturbation_id", d.perturbation_id}, {"score", d.score}, {"rank", d.rank}};
}
inline void from_json(const json& j, RankedDescriptor& d) {
    j.at("perturbation_id").get_to(d.perturbation_id);
    j.at("score").get_to(d.score);
    j.at("rank").get_to(d.rank);
}

inline void to_json(json& j, const InjectedDescriptor& d) {
    j = json{{"label", d.label}, {"axis_id", d.axis_id}};
}
inline void from_json(const json& j, InjectedDescriptor& d) {
    j.at("label").get_to(d.label);
    j.at("axis_id").get_to(d.axis_id);
}

inline void to_json(json& j, const PromptSpec& p) {
    j = json{{"base_description", p.base_description},
             {"injected_descriptors", p.injected_descriptors},
             {"template_version", p.template_version}};
}
inline void from_json(const json& j, PromptSpec& p) {
    j.at("base_description").get_to(p.base_description);
    j.at("injected_descriptors").get_to(p.injected_descriptors);
    j.at("template_version").get_to(p.template_version);
}

inline void to_json(json& j, const ImageRef& i) {
    j = json{{"id", i.id}, {"payload_hash", i.payload_hash}, {"origin", i.origin}};
    if (i.parent_id) j["parent_id"] = *i.parent_id;
    if (i.prompt_used) j["prompt_used"] = *i.prompt_used;
    if (i.base_description) j["base_description"] = *i.base_description;
}
inline void from_json(const json& j, ImageRef& i) {
    j.at("id").get_to(i.id);
    j.at("payload_hash").get_to(i.payload_hash);
    i.origin = parse_enum<ImageOrigin>(j.at("origin"),
                                       {{ImageOrigin::uploaded, "uploaded"},
                                        {ImageOrigin::generated, "generated"}},
                                       "origin");
    i.parent_id = j.contains("parent_id") ? std::optional(j.at("parent_id").get<std::string>()) : std::nullopt;
    i.prompt_used = j.contains("prompt_used") ? std::optional(j.at("prompt_used").get<PromptSpec>()) : std::nullopt;
    i.base_description =
        j.contains("base_description") ? std::optional(j.at("base_description").get<std::string>()) : std::nullopt;
}

inline void to_json(json& j, const Session& s) {
    j = json{{"id", s.id},
             {"images", s.images},
             {"primary_ref", s.primary_ref},
             {"axes", s.axes},
             {"navigation", s.navigation},
             {"created_at", s.created_at},
             {"updated_at", s.updated_at}};
}
inline void from_json(const json& j, Session& s) {
    j.at("id").get_to(s.id);
    j.at("images").get_to(s.images);
    j.at("primary_ref").get_to(s.primary_ref);
    j.at("axes").get_to(s.axes);
    j.at("navigation").get_to(s.navigation);
    j.at("created_at").get_to(s.created_at);
    j.at("updated_at").get_to(s.updated_at);
}

/// Canonical serialization: sorted keys, no insignificant whitespace.
template <typename T>
std::string canonical_json(const T& value) {
    return json(value).dump();
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::string code;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(std::string_view code) const {
        return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.code == code; });
    }
    void add(std::string code, std::string message) { violations.push_back({std::move(code), std::move(message)}); }
    void merge(const ValidationResult& other) {
        violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    }
};

inline void to_json(json& j, const Violation& v) { j = json{{"code", v.code}, {"message", v.message}}; }

inline ValidationResult validate_axis(const ThemeAxis& axis) {
    ValidationResult r;
    if (trim(axis.theme.label).empty()) r.add("empty_theme_label", "theme label is empty after trimming");
    if (axis.left_pole_label == axis.right_pole_label)
        r.add("identical_poles", "left and right pole labels are both '" + axis.left_pole_label + "'");

    const auto total = static_cast<int>(axis.perturbations.size());
    if (total != kPerturbationsPerAxis)
        r.add("perturbation_count",
              "expected 12 perturbations, found " + std::to_string(total));

    int left = 0, right = 0;
    std::map<Direction, std::vector<int>> ranks;
    std::vector<std::string> seen_labels;
    for (const auto& p : axis.perturbations) {
        (p.direction == Direction::left ? left : right) += 1;
        if (p.intensity_rank < 1 || p.intensity_rank > kPerturbationsPerDirection)
            r.add("intensity_rank_out_of_range",
                  "perturbation '" + p.label + "' has intensity_rank " + std::to_string(p.intensity_rank));
        ranks[p.direction].push_back(p.intensity_rank);
        if (trim(p.label).empty()) r.add("empty_label", "perturbation " + p.id + " has an empty label");
        if (p.axis_id != axis.id)
            r.add("axis_id_mismatch", "perturbation " + p.id + " names axis '" + p.axis_id + "'");
        auto key = dedup_key(p.label);
        if (std::find(seen_labels.begin(), seen_labels.end(), key) != seen_labels.end())
            r.add("duplicate_label", "label '" + p.label + "' appears more than once");
        seen_labels.push_back(std::move(key));
    }
    if (left != kPerturbationsPerDirection || right != kPerturbationsPerDirection)
        r.add("direction_split", "expected 6 left and 6 right, found left " + std::to_string(left) + ", right " +
                                     std::to_string(right));

    for (Direction d : {Direction::left, Direction::right}) {
        auto v = ranks[d];
        std::sort(v.begin(), v.end());
        if (std::adjacent_find(v.begin(), v.end()) != v.end())
            r.add("duplicate_intensity_rank", std::string(to_string(d)) + " direction repeats an intensity_rank");
        for (int want = 1; want <= kPerturbationsPerDirection; ++want)
            if (!std::binary_search(v.begin(), v.end(), want)) {
                r.add("missing_intensity_rank", std::string(to_string(d)) + " direction lacks intensity_rank " +
                                                    std::to_string(want));
            }
    }
    return r;
}

/// ok iff the images form a single rooted tree and primary_ref resolves.
inline ValidationResult lineage_check(const Session& s) {
    ValidationResult r;
    std::map<std::string, const ImageRef*> by_id;
    int roots = 0;
    for (const auto& img : s.images) {
        if (!by_id.emplace(img.id, &img).second) r.add("duplicate_image_id", "image id '" + img.id + "' repeats");
        if (img.origin == ImageOrigin::uploaded) {
            ++roots;
            if (img.parent_id || img.prompt_used)
                r.add("origin_fields", "uploaded image '" + img.id + "' carries parent_id or prompt_used");
        } else if (!img.parent_id || !img.prompt_used) {
            r.add("origin_fields", "generated image '" + img.id + "' lacks parent_id or prompt_used");
        }
    }
    if (roots == 0) r.add("no_root", "no uploaded root image");
    if (roots > 1) r.add("multiple_roots", std::to_string(roots) + " images have origin=uploaded");

    for (const auto& img : s.images) {
        if (!img.parent_id) continue;
        if (!by_id.count(*img.parent_id)) {
            r.add("dangling_parent", "image '" + img.id + "' names missing parent '" + *img.parent_id + "'");
            continue;
        }
        // Walk toward the root; more steps than nodes means a cycle.
        const ImageRef* cur = &img;
        std::size_t steps = 0;
        while (cur && cur->parent_id && steps <= s.images.size()) {
            auto it = by_id.find(*cur->parent_id);
            cur = it == by_id.end() ? nullptr : it->second;
            ++steps;
        }
        if (steps > s.images.size()) r.add("cycle", "parent links from '" + img.id + "' form a cycle");
    }
    if (!by_id.count(s.primary_ref)) r.add("primary_unresolved", "primary_ref '" + s.primary_ref + "' not found");
    return r;
}

/// Lineage plus the remaining Session invariants (axes, navigation, theme ids).
inline ValidationResult validate_session(const Session& s) {
    ValidationResult r = lineage_check(s);
    std::vector<std::string> theme_ids, axis_ids;
    for (const auto& a : s.axes) {
        auto ar = validate_axis(a);
        for (auto& v : ar.violations) r.add("axis." + v.code, a.id + ": " + v.message);
        if (std::find(theme_ids.begin(), theme_ids.end(), a.theme.id) != theme_ids.end())
            r.add("duplicate_theme_id", "theme id '" + a.theme.id + "' repeats");
        if (std::find(axis_ids.begin(), axis_ids.end(), a.id) != axis_ids.end())
            r.add("duplicate_axis_id", "axis id '" + a.id + "' repeats");
        theme_ids.push_back(a.theme.id);
        axis_ids.push_back(a.id);
    }
    for (const auto& [axis_id, pos] : s.navigation) {
        if (!s.find_axis(axis_id)) r.add("navigation_unknown_axis", "navigation names unknown axis '" + axis_id + "'");
        if (!(pos >= -1.0 && pos <= 1.0))
            r.add("navigation_out_of_range", "navigation position for '" + axis_id + "' outside [-1, 1]");
    }
    return r;
}

}  // namespace thematic
