#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "thematic/hash.hpp"

namespace thematic {

/// RFC 3339 UTC timestamp with millisecond precision.
inline std::string format_timestamp(std::int64_t unix_ms) {
    std::time_t secs = static_cast<std::time_t>(unix_ms / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(unix_ms % 1000));
    return out;
}

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::string now() = 0;
};

class SystemClock final : public Clock {
public:
    std::string now() override {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
        return format_timestamp(ms);
    }
};

/// Advances one millisecond per reading from a fixed epoch; used for
/// reproducible runs.
class LogicalClock final : public Clock {
public:
    explicit LogicalClock(std::int64_t epoch_ms = 1735689600000) : next_(epoch_ms) {}
    std::string now() override { return format_timestamp(next_.fetch_add(1)); }

private:
    std::atomic<std::int64_t> next_;
};

/// Source of session id nonces. Seeded sources give reproducible ids.
class IdSource {
public:
    explicit IdSource(std::optional<std::uint64_t> seed = std::nullopt)
        : rng_(seed ? *seed : std::random_device{}() ^ (std::uint64_t(std::random_device{}()) << 32)) {}

    std::string next_session_id() {
        std::lock_guard lock(mu_);
        return "ses-" + sha256_hex(std::to_string(rng_())).substr(0, 16);
    }

private:
    std::mutex mu_;
    std::mt19937_64 rng_;
};

/// Deterministic child token: prefix + 16 hex chars of sha256 over the parts.
inline std::string derive_id(std::string_view prefix, std::initializer_list<std::string_view> parts) {
    std::string material;
    for (auto p : parts) {
        material.append(p);
        material.push_back('\x1f');
    }
    return std::string(prefix) + "-" + sha256_hex(material).substr(0, 16);
}

}  // namespace thematic
