#pragma once

// Record/replay fixture files: one JSON document mapping request
// fingerprints to canned responses.
//
//   {
//     "header":  {"hash_function": "sha256", "seed": 7, "format_version": "1",
//                 "embedding_dim": 64, "space_tag": "mock-embed/v1"},
//     "entries": {"<fingerprint>": {"operation": ..., "request": ..., "response": ...}}
//   }
//
// fingerprint = hex(sha256(operation + "\n" + canonical_json(request))).

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "thematic/error.hpp"
#include "thematic/hash.hpp"

namespace thematic::providers {

using json = nlohmann::json;

inline std::string fingerprint(std::string_view operation, const json& request) {
    std::string material(operation);
    material.push_back('\n');
    material.append(request.dump());
    return sha256_hex(material);
}

struct FixtureHeader {
    std::string hash_function = "sha256";
    std::int64_t seed = 0;
    std::string format_version = "1";
    // Used by the synthetic embedding rule on fixture misses.
    int embedding_dim = 64;
    std::string space_tag = "mock-embed/v1";

    bool operator==(const FixtureHeader&) const = default;
};

struct FixtureEntry {
    std::string operation;
    json request;
    json response;

    bool operator==(const FixtureEntry&) const = default;
};

class FixtureFile {
public:
    FixtureFile() = default;
    explicit FixtureFile(FixtureHeader header) : header_(std::move(header)) {}

    const FixtureHeader& header() const { return header_; }
    const std::map<std::string, FixtureEntry>& entries() const { return entries_; }

    /// Inserts or overwrites the entry for this request.
    std::string put(std::string_view operation, const json& request, json response) {
        auto fp = fingerprint(operation, request);
        entries_[fp] = FixtureEntry{std::string(operation), request, std::move(response)};
        return fp;
    }

    const FixtureEntry* find(std::string_view operation, const json& request) const {
        auto it = entries_.find(fingerprint(operation, request));
        return it == entries_.end() ? nullptr : &it->second;
    }

    json to_json() const {
        json entries = json::object();
        for (const auto& [fp, e] : entries_)
            entries[fp] = json{{"operation", e.operation}, {"request", e.request}, {"response", e.response}};
        return json{{"header",
                     {{"hash_function", header_.hash_function},
                      {"seed", header_.seed},
                      {"format_version", header_.format_version},
                      {"embedding_dim", header_.embedding_dim},
                      {"space_tag", header_.space_tag}}},
                    {"entries", entries}};
    }

    static FixtureFile from_json(const json& j) {
        FixtureFile f;
        try {
            const auto& h = j.at("header");
            f.header_.hash_function = h.at("hash_function").get<std::string>();
            f.header_.seed = h.at("seed").get<std::int64_t>();
            f.header_.format_version = h.at("format_version").get<std::string>();
            f.header_.embedding_dim = h.value("embedding_dim", f.header_.embedding_dim);
            f.header_.space_tag = h.value("space_tag", f.header_.space_tag);
            if (f.header_.hash_function != "sha256")
                fail(ErrorCode::contract_violation, "unsupported fixture hash_function '" + f.header_.hash_function + "'");
            if (f.header_.format_version != "1")
                fail(ErrorCode::contract_violation, "unsupported fixture format_version '" + f.header_.format_version + "'");
            if (f.header_.embedding_dim < 1) fail(ErrorCode::contract_violation, "fixture embedding_dim must be >= 1");
            for (const auto& [fp, e] : j.at("entries").items()) {
                FixtureEntry entry{e.at("operation").get<std::string>(), e.at("request"), e.at("response")};
                if (fingerprint(entry.operation, entry.request) != fp)
                    fail(ErrorCode::contract_violation, "fixture entry fingerprint mismatch: " + fp);
                f.entries_.emplace(fp, std::move(entry));
            }
        } catch (const json::exception& e) {
            fail(ErrorCode::contract_violation, std::string("malformed fixture file: ") + e.what());
        }
        return f;
    }

    static FixtureFile load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(ErrorCode::storage_unavailable, "cannot read fixture file " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        json j = json::parse(ss.str(), nullptr, false);
        if (j.is_discarded()) fail(ErrorCode::contract_violation, "fixture file is not valid JSON: " + path.string());
        return from_json(j);
    }

    void save(const std::filesystem::path& path) const {
        std::error_code ec;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) fail(ErrorCode::storage_unavailable, "cannot write fixture file " + path.string());
            out << to_json().dump(2) << '\n';
            if (!out) fail(ErrorCode::storage_unavailable, "short write to " + path.string());
        }
        std::filesystem::rename(tmp, path, ec);
        if (ec) fail(ErrorCode::storage_unavailable, "cannot replace fixture file " + path.string());
    }

private:
    FixtureHeader header_;
    std::map<std::string, FixtureEntry> entries_;
};

}  // namespace thematic::providers
