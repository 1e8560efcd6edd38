#pragma once

// A validator for the subset of JSON Schema used by schemas/api.schema.json:
// $ref (local definitions), type, properties, required, additionalProperties,
// items, minItems, maxItems, enum, const, pattern, minLength, minimum, maximum.

#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace thematic::support {

class SchemaValidator {
public:
    explicit SchemaValidator(nlohmann::json root) : root_(std::move(root)) {}

    /// Errors for `value` against definition `name`; empty means valid.
    std::vector<std::string> validate(const nlohmann::json& value, const std::string& name) const {
        std::vector<std::string> errors;
        check(value, root_.at("definitions").at(name), "$", errors);
        return errors;
    }

private:
    using json = nlohmann::json;

    static bool has_type(const json& v, const std::string& t) {
        if (t == "object") return v.is_object();
        if (t == "array") return v.is_array();
        if (t == "string") return v.is_string();
        if (t == "integer") return v.is_number_integer();
        if (t == "number") return v.is_number();
        if (t == "boolean") return v.is_boolean();
        if (t == "null") return v.is_null();
        return false;
    }

    void check(const json& v, const json& schema, const std::string& path, std::vector<std::string>& errors) const {
        if (schema.contains("$ref")) {
            std::string ref = schema.at("$ref");
            const std::string prefix = "#/definitions/";
            check(v, root_.at("definitions").at(ref.substr(prefix.size())), path, errors);
            return;
        }
        auto err = [&](const std::string& m) { errors.push_back(path + ": " + m); };
        if (schema.contains("type") && !has_type(v, schema.at("type"))) {
            err("expected " + schema.at("type").get<std::string>() + ", got " + v.type_name());
            return;
        }
        if (schema.contains("const") && v != schema.at("const")) err("expected const " + schema.at("const").dump());
        if (schema.contains("enum")) {
            const auto& e = schema.at("enum");
            if (std::find(e.begin(), e.end(), v) == e.end()) err("value " + v.dump() + " not in enum");
        }
        if (v.is_string()) {
            const auto& s = v.get_ref<const std::string&>();
            if (schema.contains("minLength") && s.size() < schema.at("minLength").get<std::size_t>())
                err("string shorter than minLength");
            if (schema.contains("pattern") && !std::regex_search(s, std::regex(schema.at("pattern").get<std::string>())))
                err("'" + s + "' does not match " + schema.at("pattern").get<std::string>());
        }
        if (v.is_number()) {
            double x = v.get<double>();
            if (schema.contains("minimum") && x < schema.at("minimum").get<double>()) err("below minimum");
            if (schema.contains("maximum") && x > schema.at("maximum").get<double>()) err("above maximum");
        }
        if (v.is_array()) {
            if (schema.contains("minItems") && v.size() < schema.at("minItems").get<std::size_t>()) err("too few items");
            if (schema.contains("maxItems") && v.size() > schema.at("maxItems").get<std::size_t>()) err("too many items");
            if (schema.contains("items"))
                for (std::size_t i = 0; i < v.size(); ++i)
                    check(v[i], schema.at("items"), path + "[" + std::to_string(i) + "]", errors);
        }
        if (v.is_object()) {
            if (schema.contains("required"))
                for (const auto& r : schema.at("required"))
                    if (!v.contains(r.get<std::string>())) err("missing required '" + r.get<std::string>() + "'");
            const json props = schema.value("properties", json::object());
            for (const auto& [key, val] : v.items()) {
                if (props.contains(key)) {
                    check(val, props.at(key), path + "." + key, errors);
                } else if (schema.contains("additionalProperties")) {
                    const auto& ap = schema.at("additionalProperties");
                    if (ap.is_boolean()) {
                        if (!ap.get<bool>()) err("unexpected property '" + key + "'");
                    } else {
                        check(val, ap, path + "." + key, errors);
                    }
                }
            }
        }
    }

    nlohmann::json root_;
};

}  // namespace thematic::support
