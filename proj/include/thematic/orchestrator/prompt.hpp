#pragma once

#include <string>
#include <vector>

#include "thematic/core/model.hpp"
#include "thematic/providers/providers.hpp"
#include "thematic/templates.hpp"

namespace thematic::orchestrator {

inline constexpr std::size_t kMaxInjectedDescriptors = 6;

inline std::string prompt_template_version() { return providers::template_id(templates::prompt); }

/// Renders the generation prompt. Slots: {base} and {descriptors} (labels
/// joined by ", "). With no descriptors, every template line holding the
/// {descriptors} slot is dropped, leaving the base description frame.
inline std::string render_prompt(const PromptSpec& spec) {
    if (spec.template_version != prompt_template_version())
        fail(ErrorCode::invalid_argument, "unknown prompt template version '" + spec.template_version + "'");
    std::vector<std::string> labels;
    for (const auto& d : spec.injected_descriptors) labels.push_back(d.label);

    std::string text(templates::prompt.text);
    if (labels.empty()) {
        std::string kept;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto end = text.find('\n', start);
            std::string line = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
            if (line.find("{descriptors}") == std::string::npos) {
                if (!kept.empty()) kept.push_back('\n');
                kept += line;
            }
            if (end == std::string::npos) break;
            start = end + 1;
        }
        text = kept;
    }
    return providers::render_template(text, json{{"base", spec.base_description}, {"descriptors", join(labels, ", ")}});
}

/// Deterministic prompt assembly from a base description and ordered labels.
inline PromptSpec make_prompt_spec(std::string base_description, const std::vector<Perturbation>& descriptors) {
    if (descriptors.size() > kMaxInjectedDescriptors)
        fail(ErrorCode::invalid_argument, "at most 6 descriptors can be injected, got " +
                                              std::to_string(descriptors.size()));
    if (trim(base_description).empty())
        fail(ErrorCode::missing_base_description, "base description is empty");
    PromptSpec spec{std::move(base_description), {}, prompt_template_version()};
    for (const auto& p : descriptors) spec.injected_descriptors.push_back({p.label, p.axis_id});
    return spec;
}

}  // namespace thematic::orchestrator
