#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zkimg/errors.hpp"

namespace zkimg {

// 8-bit RGB raster, row-major and channel-interleaved. This is the byte
// sequence that gets hashed, so the layout is normative.
struct Image {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint8_t> data;  // width * height * 3

    static constexpr uint32_t channels = 3;

    static Image filled(uint32_t w, uint32_t h, uint8_t value = 0) {
        Image img;
        img.width = w;
        img.height = h;
        img.data.assign(size_t(w) * h * channels, value);
        return img;
    }

    size_t sub_pixels() const { return data.size(); }

    uint8_t at(uint32_t x, uint32_t y, uint32_t c) const {
        return data[(size_t(y) * width + x) * channels + c];
    }
    uint8_t& at(uint32_t x, uint32_t y, uint32_t c) {
        return data[(size_t(y) * width + x) * channels + c];
    }

    bool operator==(const Image&) const = default;
};

namespace ppm_detail {

inline int next_header_byte(std::span<const uint8_t> in, size_t& pos) {
    if (pos >= in.size()) return -1;
    return in[pos++];
}

// Skips whitespace and '#' comments between header tokens.
inline uint64_t read_header_int(std::span<const uint8_t> in, size_t& pos, const char* what) {
    int c = next_header_byte(in, pos);
    for (;;) {
        while (c == ' ' || c == '\t' || c == '\r' || c == '\n') c = next_header_byte(in, pos);
        if (c == '#') {
            while (c != '\n' && c != -1) c = next_header_byte(in, pos);
            continue;
        }
        break;
    }
    if (c < '0' || c > '9')
        fail(Errc::malformed_header, std::string("expected integer for ") + what);
    uint64_t v = 0;
    while (c >= '0' && c <= '9') {
        v = v * 10 + static_cast<uint64_t>(c - '0');
        if (v > (uint64_t(1) << 40)) fail(Errc::malformed_header, std::string(what) + " too large");
        c = next_header_byte(in, pos);
    }
    if (c != -1) --pos;  // put back the delimiter
    return v;
}

}  // namespace ppm_detail

// Binary PPM (P6), maxval 255. The only normative interchange format:
// hashing requires bit-exact rasters.
inline Image load_ppm(std::span<const uint8_t> bytes) {
    using namespace ppm_detail;
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        fail(Errc::malformed_header, "not a P6 PPM file");
    size_t pos = 2;
    uint64_t w = read_header_int(bytes, pos, "width");
    uint64_t h = read_header_int(bytes, pos, "height");
    uint64_t maxval = read_header_int(bytes, pos, "maxval");
    if (w == 0 || h == 0) fail(Errc::malformed_header, "zero image dimension");
    if (w * h * 3 > (uint64_t(1) << 33)) fail(Errc::malformed_header, "image too large");
    if (maxval != 255)
        fail(Errc::unsupported_maxval, "maxval " + std::to_string(maxval) + " (only 255)");

    // exactly one whitespace byte separates the header from the payload
    int sep = next_header_byte(bytes, pos);
    if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
        fail(Errc::malformed_header, "missing whitespace after maxval");

    size_t expect = size_t(w) * h * 3;
    size_t have = bytes.size() - pos;
    if (have != expect)
        fail(Errc::truncated_payload, "expected " + std::to_string(expect) + " payload bytes, got " +
                                          std::to_string(have));
    Image img;
    img.width = static_cast<uint32_t>(w);
    img.height = static_cast<uint32_t>(h);
    img.data.assign(bytes.begin() + static_cast<ptrdiff_t>(pos), bytes.end());
    return img;
}

// Canonical writer: "P6\n{w} {h}\n255\n" + payload, deterministic bytes.
inline std::vector<uint8_t> save_ppm(const Image& img) {
    std::string header =
        "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out;
    out.reserve(header.size() + img.data.size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    return out;
}

}  // namespace zkimg
