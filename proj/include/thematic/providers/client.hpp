#pragma once

// Kind-agnostic provider transport: a JSON request in, a JSON response out.
// The mock client answers from a fixture file; the remote client (remote.hpp)
// speaks HTTP. Typed wrappers live in providers.hpp.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thematic/error.hpp"
#include "thematic/hash.hpp"
#include "thematic/image_format.hpp"
#include "thematic/providers/config.hpp"
#include "thematic/providers/fixture.hpp"

namespace thematic::providers {

struct CallMeta {
    int attempts = 0;
    int network_calls = 0;
    bool fixture_hit = false;
    bool synthesized = false;
};

struct CallContext {
    const std::atomic<bool>* cancelled = nullptr;
    CallMeta* meta = nullptr;

    bool is_cancelled() const { return cancelled && cancelled->load(); }
};

class ProviderClient {
public:
    virtual ~ProviderClient() = default;

    virtual ProviderKind kind() const = 0;
    virtual json call(std::string_view operation, const json& request, const CallContext& ctx = {}) = 0;

    /// Several requests in one round trip where the transport supports it.
    virtual std::vector<json> call_batch(std::string_view operation, const std::vector<json>& requests,
                                         const CallContext& ctx = {}) {
        std::vector<json> out;
        out.reserve(requests.size());
        for (const auto& r : requests) out.push_back(call(operation, r, ctx));
        return out;
    }

    /// Remote mode probes the endpoint; mock mode is always reachable.
    virtual bool reachable() { return true; }
};

/// Bounds concurrent calls per provider; excess callers queue.
class InFlightLimiter {
public:
    explicit InFlightLimiter(int limit) : sem_(limit) {}

    class Permit {
    public:
        explicit Permit(InFlightLimiter& l) : l_(&l) {
            l_->sem_.acquire();
            int now = ++l_->current_;
            int seen = l_->peak_.load();
            while (now > seen && !l_->peak_.compare_exchange_weak(seen, now)) {}
        }
        ~Permit() {
            --l_->current_;
            l_->sem_.release();
        }
        Permit(const Permit&) = delete;
        Permit& operator=(const Permit&) = delete;

    private:
        InFlightLimiter* l_;
    };

    int peak() const { return peak_.load(); }

private:
    std::counting_semaphore<4096> sem_;
    std::atomic<int> current_{0};
    std::atomic<int> peak_{0};
};

// ---------------------------------------------------------------------------
// Deterministic synthetic responses

namespace synthetic {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Unit vector rule for embedder fixture misses:
///   state_0 = first 8 bytes (big-endian) of sha256(seed + "\n" + kind + "\n" + payload)
///   x_i     = 2 * ((splitmix64(state) >> 11) * 2^-53) - 1,   i = 0..dim-1
///   values  = x / ||x||_2
/// payload is the raw image bytes or the UTF-8 label text.
inline std::vector<double> unit_vector(std::int64_t seed, std::string_view kind, std::string_view payload, int dim) {
    std::string material = std::to_string(seed);
    material.push_back('\n');
    material.append(kind);
    material.push_back('\n');
    material.append(payload);
    std::uint64_t state = sha256_u64(material);
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm2 = 0.0;
    for (auto& x : v) {
        x = 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53) - 1.0;
        norm2 += x * x;
    }
    double norm = std::sqrt(norm2);
    for (auto& x : v) x /= norm;
    return v;
}

inline constexpr std::uint32_t kImageSide = 16;

/// Image rule for generator fixture misses: a 16x16 RGB PNG whose pixels are
/// the sha256 stream of (prompt, seed).
inline Bytes image(std::string_view prompt, const json& seed) {
    std::string key = sha256_hex(std::string(prompt) + "\n" + (seed.is_null() ? std::string() : seed.dump()));
    std::string rgb;
    for (int block = 0; rgb.size() < kImageSide * kImageSide * 3; ++block) {
        auto raw = sha256_raw(key + ":" + std::to_string(block));
        rgb.append(reinterpret_cast<const char*>(raw.data()), raw.size());
    }
    rgb.resize(kImageSide * kImageSide * 3);
    return encode_png_rgb(kImageSide, kImageSide, rgb);
}

}  // namespace synthetic

/// Error-shaped fixture responses: {"__error__": {"code": "...", "message": "..."}}.
inline void raise_if_error_response(const json& response) {
    if (!response.is_object() || !response.contains("__error__")) return;
    const auto& e = response.at("__error__");
    std::string code = e.value("code", "provider_unavailable");
    std::string message = e.value("message", "provider error (fixture)");
    for (ErrorCode c : kAllErrorCodes)
        if (to_string(c) == code) throw Error(c, message, e.value("details", json()));
    throw Error(ErrorCode::provider_unavailable, message);
}

class MockClient final : public ProviderClient {
public:
    MockClient(ProviderKind kind, FixtureFile fixtures, int max_in_flight = 8)
        : kind_(kind), fixtures_(std::move(fixtures)), limiter_(max_in_flight) {}

    static std::shared_ptr<MockClient> from_config(const ProviderConfig& cfg,
                                                   const std::filesystem::path& base_dir = {}) {
        cfg.validate();
        std::filesystem::path p = *cfg.fixture_path;
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        return std::make_shared<MockClient>(cfg.kind, FixtureFile::load(p), cfg.max_in_flight);
    }

    ProviderKind kind() const override { return kind_; }
    const FixtureFile& fixtures() const { return fixtures_; }
    int lookups() const { return lookups_.load(); }

    json call(std::string_view operation, const json& request, const CallContext& ctx = {}) override {
        InFlightLimiter::Permit permit(limiter_);
        ++lookups_;
        if (ctx.is_cancelled()) fail(ErrorCode::cancelled, "provider call cancelled");
        if (ctx.meta) ctx.meta->attempts += 1;
        if (const FixtureEntry* e = fixtures_.find(operation, request)) {
            if (ctx.meta) ctx.meta->fixture_hit = true;
            raise_if_error_response(e->response);
            return e->response;
        }
        if (ctx.meta) ctx.meta->synthesized = true;
        return synthesize(operation, request);
    }

private:
    json synthesize(std::string_view operation, const json& request) const {
        const auto& h = fixtures_.header();
        switch (kind_) {
            case ProviderKind::embedder: {
                const auto& kind = request.at("kind").get_ref<const std::string&>();
                const auto& payload = request.at("payload").get_ref<const std::string&>();
                auto values = synthetic::unit_vector(h.seed, kind, kind == "image" ? base64_decode(payload) : payload,
                                                     h.embedding_dim);
                return json{{"space_tag", h.space_tag}, {"dim", h.embedding_dim}, {"values", values}};
            }
            case ProviderKind::generator: {
                auto png = synthetic::image(request.at("prompt").get<std::string>(), request.value("seed", json()));
                return json{{"image", base64_encode(png)}, {"provider_meta", {{"model", "mock-gen/v1"}}}};
            }
            case ProviderKind::language_model:
                break;
        }
        fail(ErrorCode::fixture_miss, "no fixture for " + std::string(operation) + " request " +
                                          fingerprint(operation, request).substr(0, 12),
             json{{"operation", operation}, {"fingerprint", fingerprint(operation, request)}});
    }

    ProviderKind kind_;
    FixtureFile fixtures_;
    InFlightLimiter limiter_;
    std::atomic<int> lookups_{0};
};

/// Wraps a live client and captures every request/response pair.
class RecordingClient final : public ProviderClient {
public:
    RecordingClient(std::shared_ptr<ProviderClient> inner, FixtureHeader header)
        : inner_(std::move(inner)), fixtures_(std::move(header)) {}

    ProviderKind kind() const override { return inner_->kind(); }
    bool reachable() override { return inner_->reachable(); }

    json call(std::string_view operation, const json& request, const CallContext& ctx = {}) override {
        json response = inner_->call(operation, request, ctx);
        std::lock_guard lock(mu_);
        fixtures_.put(operation, request, response);
        return response;
    }

    std::vector<json> call_batch(std::string_view operation, const std::vector<json>& requests,
                                 const CallContext& ctx = {}) override {
        auto responses = inner_->call_batch(operation, requests, ctx);
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < requests.size() && i < responses.size(); ++i)
            fixtures_.put(operation, requests[i], responses[i]);
        return responses;
    }

    FixtureFile snapshot() const {
        std::lock_guard lock(mu_);
        return fixtures_;
    }

private:
    std::shared_ptr<ProviderClient> inner_;
    mutable std::mutex mu_;
    FixtureFile fixtures_;
};

}  // namespace thematic::providers
