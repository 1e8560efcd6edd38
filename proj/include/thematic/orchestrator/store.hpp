#pragma once

// Content-addressed blob storage and session records.
//
// On disk:  <root>/blobs/<first 2 hex of hash>/<hash>
//           <root>/sessions/<session id>.json   (canonical JSON)

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "thematic/core/model.hpp"
#include "thematic/hash.hpp"

namespace thematic::orchestrator {

namespace fs = std::filesystem;

class BlobStore {
public:
    virtual ~BlobStore() = default;
    /// Stores bytes under their sha256 and returns the hex hash.
    virtual std::string put(const Bytes& bytes) = 0;
    virtual Bytes get(const std::string& hash) const = 0;
    virtual bool contains(const std::string& hash) const = 0;
};

class MemoryBlobStore final : public BlobStore {
public:
    std::string put(const Bytes& bytes) override {
        auto hash = sha256_hex(bytes);
        std::lock_guard lock(mu_);
        blobs_.emplace(hash, bytes);
        return hash;
    }
    Bytes get(const std::string& hash) const override {
        std::lock_guard lock(mu_);
        auto it = blobs_.find(hash);
        if (it == blobs_.end()) fail(ErrorCode::storage_unavailable, "blob " + hash + " not found");
        return it->second;
    }
    bool contains(const std::string& hash) const override {
        std::lock_guard lock(mu_);
        return blobs_.count(hash) > 0;
    }
    std::size_t size() const {
        std::lock_guard lock(mu_);
        return blobs_.size();
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, Bytes> blobs_;
};

namespace detail {

inline void write_atomically(const fs::path& path, std::string_view data) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::storage_unavailable, "cannot create " + path.parent_path().string() + ": " + ec.message());
    static std::atomic<unsigned> counter{0};
    fs::path tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) fail(ErrorCode::storage_unavailable, "cannot write " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::storage_unavailable, "cannot replace " + path.string() + ": " + ec.message());
}

inline std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bool is_hex_hash(std::string_view h) {
    return h.size() == 64 && std::all_of(h.begin(), h.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

}  // namespace detail

class FileBlobStore final : public BlobStore {
public:
    explicit FileBlobStore(fs::path root) : root_(std::move(root)) {}

    fs::path path_for(const std::string& hash) const { return root_ / "blobs" / hash.substr(0, 2) / hash; }

    std::string put(const Bytes& bytes) override {
        auto hash = sha256_hex(bytes);
        auto path = path_for(hash);
        if (!fs::exists(path)) detail::write_atomically(path, bytes);
        return hash;
    }
    Bytes get(const std::string& hash) const override {
        if (!detail::is_hex_hash(hash)) fail(ErrorCode::invalid_argument, "malformed blob hash");
        auto data = detail::read_file(path_for(hash));
        if (!data) fail(ErrorCode::storage_unavailable, "blob " + hash + " not found");
        return *data;
    }
    bool contains(const std::string& hash) const override {
        return detail::is_hex_hash(hash) && fs::exists(path_for(hash));
    }

private:
    fs::path root_;
};

// ---------------------------------------------------------------------------

class SessionStore {
public:
    virtual ~SessionStore() = default;
    /// Returns the durable token (the session id). Last write wins.
    virtual std::string persist(const Session& session) = 0;
    virtual Session load(const std::string& token) const = 0;
    virtual bool remove(const std::string& token) = 0;
    virtual std::vector<std::string> list() const = 0;
};

/// Parses and validates a stored record; any failure is CorruptRecord.
inline Session decode_session_record(std::string_view text, std::string_view token) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::corrupt_record, "session record " + std::string(token) + " is not valid JSON");
    Session s;
    try {
        s = j.get<Session>();
    } catch (const std::exception& e) {
        fail(ErrorCode::corrupt_record, "session record " + std::string(token) + " fails validation: " + e.what());
    }
    auto v = validate_session(s);
    if (!v.ok())
        fail(ErrorCode::corrupt_record, "session record " + std::string(token) + " violates invariants",
             json{{"violations", v.violations}});
    if (s.id != token) fail(ErrorCode::corrupt_record, "session record id does not match its key");
    return s;
}

inline void require_persistable(const Session& s) {
    auto v = lineage_check(s);
    if (!v.ok())
        fail(ErrorCode::invalid_argument, "session " + s.id + " fails lineage_check", json{{"violations", v.violations}});
}

class MemorySessionStore final : public SessionStore {
public:
    std::string persist(const Session& s) override {
        require_persistable(s);
        std::lock_guard lock(mu_);
        records_[s.id] = canonical_json(s);
        return s.id;
    }
    Session load(const std::string& token) const override {
        std::string text;
        {
            std::lock_guard lock(mu_);
            auto it = records_.find(token);
            if (it == records_.end()) fail(ErrorCode::unknown_session, "no session " + token);
            text = it->second;
        }
        return decode_session_record(text, token);
    }
    bool remove(const std::string& token) override {
        std::lock_guard lock(mu_);
        return records_.erase(token) > 0;
    }
    std::vector<std::string> list() const override {
        std::lock_guard lock(mu_);
        std::vector<std::string> ids;
        for (const auto& [id, _] : records_) ids.push_back(id);
        return ids;
    }
    /// Raw record access for tests.
    void overwrite_raw(const std::string& token, std::string text) {
        std::lock_guard lock(mu_);
        records_[token] = std::move(text);
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> records_;
};

class FileSessionStore final : public SessionStore {
public:
    explicit FileSessionStore(fs::path root) : root_(std::move(root)) {}

    fs::path path_for(const std::string& id) const { return root_ / "sessions" / (id + ".json"); }

    std::string persist(const Session& s) override {
        require_persistable(s);
        check_token(s.id);
        detail::write_atomically(path_for(s.id), canonical_json(s));
        return s.id;
    }
    Session load(const std::string& token) const override {
        check_token(token);
        auto text = detail::read_file(path_for(token));
        if (!text) fail(ErrorCode::unknown_session, "no session " + token);
        return decode_session_record(*text, token);
    }
    bool remove(const std::string& token) override {
        check_token(token);
        std::error_code ec;
        return fs::remove(path_for(token), ec);
    }
    std::vector<std::string> list() const override {
        std::vector<std::string> ids;
        std::error_code ec;
        for (const auto& e : fs::directory_iterator(root_ / "sessions", ec))
            if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
        std::sort(ids.begin(), ids.end());
        return ids;
    }

private:
    static void check_token(const std::string& id) {
        bool ok = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
        });
        if (!ok) fail(ErrorCode::invalid_argument, "malformed session id");
    }

    fs::path root_;
};

}  // namespace thematic::orchestrator
