#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "thematic/error.hpp"

namespace thematic {

using Bytes = std::string;  // raw octets; std::string keeps httplib/json interop free

inline std::array<unsigned char, 32> sha256_raw(std::string_view data) {
    std::array<unsigned char, 32> out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
        throw std::runtime_error("sha256 digest failed");
    }
    return out;
}

inline std::string to_hex(std::span<const unsigned char> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

inline std::string sha256_hex(std::string_view data) {
    auto raw = sha256_raw(data);
    return to_hex(raw);
}

/// First 8 digest bytes, big-endian.
inline std::uint64_t sha256_u64(std::string_view data) {
    auto raw = sha256_raw(data);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | raw[static_cast<std::size_t>(i)];
    return v;
}

inline std::string base64_encode(std::string_view data) {
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(data.data()),
                            static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

inline Bytes base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) fail(ErrorCode::contract_violation, "base64 payload length is not a multiple of 4");
    Bytes out(3 * text.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) fail(ErrorCode::contract_violation, "invalid base64 payload");
    // EVP_DecodeBlock does not strip padding.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace thematic
