#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <nlohmann/json.hpp>

namespace thematic {

// Closed set of error codes. The string form is the stable `code` token on
// the wire; adding a code is a versioned API change.
enum class ErrorCode {
    invalid_argument,
    position_out_of_range,
    unknown_session,
    unknown_axis,
    unknown_image,
    duplicate_theme,
    image_undecodable,
    payload_too_large,
    empty_extraction,
    no_themes_found,
    classification_incomplete,
    incomplete_axis,
    dimension_mismatch,
    zero_norm_vector,
    embedding_space_mismatch,
    missing_base_description,
    provider_unavailable,
    generator_unavailable,
    generator_refused,
    fixture_miss,
    contract_violation,
    storage_unavailable,
    corrupt_record,
    config_invalid,
    unauthorized,
    cancelled,
};

inline constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::position_out_of_range: return "position_out_of_range";
        case ErrorCode::unknown_session: return "unknown_session";
        case ErrorCode::unknown_axis: return "unknown_axis";
        case ErrorCode::unknown_image: return "unknown_image";
        case ErrorCode::duplicate_theme: return "duplicate_theme";
        case ErrorCode::image_undecodable: return "image_undecodable";
        case ErrorCode::payload_too_large: return "payload_too_large";
        case ErrorCode::empty_extraction: return "empty_extraction";
        case ErrorCode::no_themes_found: return "no_themes_found";
        case ErrorCode::classification_incomplete: return "classification_incomplete";
        case ErrorCode::incomplete_axis: return "incomplete_axis";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::zero_norm_vector: return "zero_norm_vector";
        case ErrorCode::embedding_space_mismatch: return "embedding_space_mismatch";
        case ErrorCode::missing_base_description: return "missing_base_description";
        case ErrorCode::provider_unavailable: return "provider_unavailable";
        case ErrorCode::generator_unavailable: return "generator_unavailable";
        case ErrorCode::generator_refused: return "generator_refused";
        case ErrorCode::fixture_miss: return "fixture_miss";
        case ErrorCode::contract_violation: return "contract_violation";
        case ErrorCode::storage_unavailable: return "storage_unavailable";
        case ErrorCode::corrupt_record: return "corrupt_record";
        case ErrorCode::config_invalid: return "config_invalid";
        case ErrorCode::unauthorized: return "unauthorized";
        case ErrorCode::cancelled: return "cancelled";
    }
    return "invalid_argument";
}

inline constexpr ErrorCode kAllErrorCodes[] = {
    ErrorCode::invalid_argument,          ErrorCode::position_out_of_range,
    ErrorCode::unknown_session,           ErrorCode::unknown_axis,
    ErrorCode::unknown_image,             ErrorCode::duplicate_theme,
    ErrorCode::image_undecodable,         ErrorCode::payload_too_large,
    ErrorCode::empty_extraction,          ErrorCode::no_themes_found,
    ErrorCode::classification_incomplete, ErrorCode::incomplete_axis,
    ErrorCode::dimension_mismatch,        ErrorCode::zero_norm_vector,
    ErrorCode::embedding_space_mismatch,  ErrorCode::missing_base_description,
    ErrorCode::provider_unavailable,      ErrorCode::generator_unavailable,
    ErrorCode::generator_refused,         ErrorCode::fixture_miss,
    ErrorCode::contract_violation,        ErrorCode::storage_unavailable,
    ErrorCode::corrupt_record,            ErrorCode::config_invalid,
    ErrorCode::unauthorized,              ErrorCode::cancelled,
};

/// HTTP status used by the service for each error code.
inline constexpr int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::image_undecodable:
            return 400;
        case ErrorCode::unauthorized:
            return 401;
        case ErrorCode::unknown_session:
        case ErrorCode::unknown_axis:
        case ErrorCode::unknown_image:
            return 404;
        case ErrorCode::duplicate_theme:
            return 409;
        case ErrorCode::payload_too_large:
            return 413;
        case ErrorCode::position_out_of_range:
        case ErrorCode::empty_extraction:
        case ErrorCode::no_themes_found:
        case ErrorCode::dimension_mismatch:
        case ErrorCode::zero_norm_vector:
            return 422;
        case ErrorCode::provider_unavailable:
        case ErrorCode::generator_unavailable:
        case ErrorCode::generator_refused:
        case ErrorCode::classification_incomplete:
        case ErrorCode::incomplete_axis:
        case ErrorCode::embedding_space_mismatch:
        case ErrorCode::missing_base_description:
        case ErrorCode::fixture_miss:
        case ErrorCode::contract_violation:
            return 502;
        case ErrorCode::storage_unavailable:
        case ErrorCode::corrupt_record:
        case ErrorCode::config_invalid:
        case ErrorCode::cancelled:
            return 500;
    }
    return 500;
}

/// CLI exit code per error class: 1 validation, 2 config, 3 provider,
/// 4 storage, 5 not found / conflict.
inline constexpr int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::position_out_of_range:
        case ErrorCode::image_undecodable:
        case ErrorCode::payload_too_large:
        case ErrorCode::empty_extraction:
        case ErrorCode::no_themes_found:
        case ErrorCode::dimension_mismatch:
        case ErrorCode::zero_norm_vector:
        case ErrorCode::unauthorized:
            return 1;
        case ErrorCode::config_invalid:
            return 2;
        case ErrorCode::provider_unavailable:
        case ErrorCode::generator_unavailable:
        case ErrorCode::generator_refused:
        case ErrorCode::classification_incomplete:
        case ErrorCode::incomplete_axis:
        case ErrorCode::embedding_space_mismatch:
        case ErrorCode::missing_base_description:
        case ErrorCode::fixture_miss:
        case ErrorCode::contract_violation:
        case ErrorCode::cancelled:
            return 3;
        case ErrorCode::storage_unavailable:
        case ErrorCode::corrupt_record:
            return 4;
        case ErrorCode::unknown_session:
        case ErrorCode::unknown_axis:
        case ErrorCode::unknown_image:
        case ErrorCode::duplicate_theme:
            return 5;
    }
    return 1;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, nlohmann::json details = nullptr)
        : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

    /// ApiError wire shape: {code, message, details?}.
    nlohmann::json to_json() const {
        nlohmann::json j = {{"code", std::string(to_string(code_))}, {"message", what()}};
        if (!details_.is_null()) j["details"] = details_;
        return j;
    }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string message, nlohmann::json details = nullptr) {
    throw Error(code, std::move(message), std::move(details));
}

}  // namespace thematic
