#pragma once

// Instruction and prompt templates. Mirrors assets/templates/<name>.<version>.txt
// byte for byte (minus the final newline); tests enforce the match.

#include <string_view>

namespace thematic::templates {

struct Template {
    std::string_view name;
    std::string_view version;
    std::string_view text;
};

inline constexpr Template axis_perturbations{"axis_perturbations", "v1", R"tmpl(Build a semantic axis from "{left_pole}" (left) to "{right_pole}" (right) for the theme "{theme}".
Write {per_direction} short descriptors leaning toward the left pole and {per_direction} leaning toward the right pole. Order each list from the mildest shift to the strongest. Descriptors must describe mood, style or tone, never objects, and must all be distinct.
Return JSON: {"left": ["<mildest>", ..., "<strongest>"], "right": ["<mildest>", ..., "<strongest>"]}.)tmpl"};

inline constexpr Template axis_poles{"axis_poles", "v1", R"tmpl(The theme "{theme}" is one end of a bipolar semantic axis. Name the opposite end as a single word or short phrase.
Return JSON: {"left_pole": "<opposite of the theme>", "right_pole": "{theme}"}.)tmpl"};

inline constexpr Template classify_keywords{"classify_keywords", "v1", R"tmpl(Classify each keyword as "object" if it names a concrete subject, object, place or physical element of a scene, or "thematic" if it names a mood, style, atmosphere, emotional tone or other high-level quality.
Keywords: {keywords}
Return JSON: {"classifications": [{"label": "<keyword>", "kind": "object" | "thematic"}, ...]} with one entry per keyword, labels copied exactly.)tmpl"};

inline constexpr Template describe_image{"describe_image", "v1", R"tmpl(Describe the scene in this image in one sentence suitable as an image-generation prompt. Mention the subjects and composition only; leave out mood and style words.
Return JSON: {"description": "<sentence>"}.)tmpl"};

inline constexpr Template extract_keywords{"extract_keywords", "v1", R"tmpl(List the keywords that describe this image. Include concrete subjects and objects as well as mood, style, atmosphere, lighting character and narrative tone.
Return JSON: {"keywords": ["<keyword>", ...]} with short lowercase keywords and no commentary.)tmpl"};

inline constexpr Template prompt{"prompt", "v1", R"tmpl({base}
Thematic emphasis: {descriptors}.)tmpl"};

inline constexpr Template kAll[] = {axis_perturbations, axis_poles, classify_keywords, describe_image, extract_keywords, prompt};

}  // namespace thematic::templates
