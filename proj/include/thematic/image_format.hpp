#pragma once

// Structural validation of uploaded PNG/JPEG payloads and a tiny PNG encoder
// used by the mock generator. No pixel decoding beyond structure.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <zlib.h>

#include "thematic/hash.hpp"

namespace thematic {

enum class ImageFormat { png, jpeg };

inline std::string_view media_type(ImageFormat f) { return f == ImageFormat::png ? "image/png" : "image/jpeg"; }

namespace detail {

inline std::uint32_t read_be32(std::string_view b, std::size_t at) {
    return (std::uint32_t(static_cast<unsigned char>(b[at])) << 24) |
           (std::uint32_t(static_cast<unsigned char>(b[at + 1])) << 16) |
           (std::uint32_t(static_cast<unsigned char>(b[at + 2])) << 8) |
           std::uint32_t(static_cast<unsigned char>(b[at + 3]));
}

inline void append_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

inline constexpr std::string_view kPngSignature{"\x89PNG\r\n\x1a\n", 8};

inline bool valid_png(std::string_view b) {
    if (b.size() < 8 + 25 + 12 || b.substr(0, 8) != kPngSignature) return false;
    std::size_t at = 8;
    bool first = true, saw_idat = false;
    while (at + 12 <= b.size()) {
        std::uint32_t len = read_be32(b, at);
        if (len > b.size() - at - 12) return false;
        std::string_view type = b.substr(at + 4, 4);
        std::string_view typed_data = b.substr(at + 4, 4 + len);
        auto crc = static_cast<std::uint32_t>(
            crc32(0L, reinterpret_cast<const Bytef*>(typed_data.data()), static_cast<uInt>(typed_data.size())));
        if (crc != read_be32(b, at + 8 + len)) return false;
        if (first) {
            if (type != "IHDR" || len != 13) return false;
            if (read_be32(b, at + 8) == 0 || read_be32(b, at + 12) == 0) return false;
            first = false;
        }
        if (type == "IDAT") saw_idat = true;
        at += 12 + len;
        if (type == "IEND") return saw_idat && at == b.size();
    }
    return false;
}

inline bool valid_jpeg(std::string_view b) {
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(b[i]); };
    if (b.size() < 4 || byte(0) != 0xFF || byte(1) != 0xD8) return false;
    std::size_t at = 2;
    bool saw_frame = false;
    while (at + 4 <= b.size()) {
        if (byte(at) != 0xFF) return false;
        unsigned char marker = byte(at + 1);
        if (marker == 0xFF) { ++at; continue; }
        if (marker == 0xD9) return false;  // EOI before scan data
        if (marker >= 0xD0 && marker <= 0xD7) { at += 2; continue; }
        std::size_t len = (std::size_t(byte(at + 2)) << 8) | byte(at + 3);
        if (len < 2 || at + 2 + len > b.size()) return false;
        if ((marker >= 0xC0 && marker <= 0xCF) && marker != 0xC4 && marker != 0xC8 && marker != 0xCC) saw_frame = true;
        if (marker == 0xDA) {
            // Entropy-coded data runs to the end; require a trailing EOI.
            return saw_frame && b.size() >= at + 2 + len + 2 && byte(b.size() - 2) == 0xFF &&
                   byte(b.size() - 1) == 0xD9;
        }
        at += 2 + len;
    }
    return false;
}

inline std::string png_chunk(std::string_view type, std::string_view data) {
    std::string out;
    append_be32(out, static_cast<std::uint32_t>(data.size()));
    std::string typed(type);
    typed.append(data);
    out.append(typed);
    append_be32(out, static_cast<std::uint32_t>(
                         crc32(0L, reinterpret_cast<const Bytef*>(typed.data()), static_cast<uInt>(typed.size()))));
    return out;
}

}  // namespace detail

/// Recognizes a structurally valid PNG or baseline/progressive JPEG.
inline std::optional<ImageFormat> sniff_image(std::string_view bytes) {
    if (detail::valid_png(bytes)) return ImageFormat::png;
    if (detail::valid_jpeg(bytes)) return ImageFormat::jpeg;
    return std::nullopt;
}

/// Encodes an 8-bit RGB image as PNG with stored (uncompressed) deflate
/// blocks, so the output is byte-stable regardless of zlib version.
inline Bytes encode_png_rgb(std::uint32_t width, std::uint32_t height, std::string_view rgb) {
    std::string raw;
    raw.reserve((width * 3 + 1) * height);
    for (std::uint32_t y = 0; y < height; ++y) {
        raw.push_back('\0');  // filter: none
        raw.append(rgb.substr(std::size_t(y) * width * 3, std::size_t(width) * 3));
    }
    std::string z = {'\x78', '\x01'};
    std::size_t at = 0;
    do {
        std::size_t n = std::min<std::size_t>(65535, raw.size() - at);
        bool last = at + n == raw.size();
        z.push_back(last ? '\x01' : '\x00');
        z.push_back(static_cast<char>(n & 0xff));
        z.push_back(static_cast<char>(n >> 8));
        z.push_back(static_cast<char>(~n & 0xff));
        z.push_back(static_cast<char>((~n >> 8) & 0xff));
        z.append(raw, at, n);
        at += n;
    } while (at < raw.size());
    detail::append_be32(z, static_cast<std::uint32_t>(
                               adler32(1L, reinterpret_cast<const Bytef*>(raw.data()), static_cast<uInt>(raw.size()))));

    std::string ihdr;
    detail::append_be32(ihdr, width);
    detail::append_be32(ihdr, height);
    ihdr += std::string{'\x08', '\x02', '\x00', '\x00', '\x00'};  // 8-bit, RGB, deflate, no filter, no interlace

    Bytes out(detail::kPngSignature);
    out += detail::png_chunk("IHDR", ihdr);
    out += detail::png_chunk("IDAT", z);
    out += detail::png_chunk("IEND", "");
    return out;
}

}  // namespace thematic
