#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zkimg/image.hpp"

namespace zkimg {

enum class TransformKind : uint8_t {
    crop,
    rotate,
    flip,
    translate,
    resize,
    censor,
    rgb2ycbcr,
    ycbcr2rgb,
    white_balance,
    contrast,
    sharpen,
    blur,
};

inline const char* transform_kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::crop: return "crop";
        case TransformKind::rotate: return "rotate";
        case TransformKind::flip: return "flip";
        case TransformKind::translate: return "translate";
        case TransformKind::resize: return "resize";
        case TransformKind::censor: return "censor";
        case TransformKind::rgb2ycbcr: return "rgb2ycbcr";
        case TransformKind::ycbcr2rgb: return "ycbcr2rgb";
        case TransformKind::white_balance: return "whitebalance";
        case TransformKind::contrast: return "contrast";
        case TransformKind::sharpen: return "sharpen";
        case TransformKind::blur: return "blur";
    }
    return "?";
}

struct Dims {
    uint32_t w = 0;
    uint32_t h = 0;
    bool operator==(const Dims&) const = default;
};

struct CropParams {
    uint32_t x = 0, y = 0, w = 0, h = 0;
};

// counterclockwise, right angles only
struct RotateParams {
    uint32_t angle = 90;
};

enum class FlipAxis : uint8_t { x, y };

struct FlipParams {
    FlipAxis axis = FlipAxis::x;
};

struct TranslateParams {
    int32_t dx = 0, dy = 0;
};

struct ResizeParams {
    uint32_t w = 0, h = 0;
};

struct CensorRegion {
    bool oval = false;
    // rect: x, y, w, h; oval: cx, cy, rx, ry
    int64_t a = 0, b = 0, c = 0, d = 0;
};

struct CensorParams {
    std::vector<CensorRegion> regions;
};

struct WhiteBalanceParams {
    double fr = 1.0, fg = 1.0, fb = 1.0;
};

struct ContrastParams {
    double f = 1.0;
};

struct TransformSpec {
    TransformKind kind = TransformKind::crop;
    std::variant<std::monostate, CropParams, RotateParams, FlipParams, TranslateParams,
                 ResizeParams, CensorParams, WhiteBalanceParams, ContrastParams>
        params;

    template <typename T>
    const T& as() const {
        return std::get<T>(params);
    }
};

// ---- dimension flow ---------------------------------------------------------

inline Dims out_dims(const TransformSpec& t, Dims in) {
    switch (t.kind) {
        case TransformKind::crop: {
            const auto& p = t.as<CropParams>();
            if (p.w == 0 || p.h == 0) fail(Errc::invalid_params, "crop: empty rectangle");
            if (uint64_t(p.x) + p.w > in.w || uint64_t(p.y) + p.h > in.h)
                fail(Errc::invalid_params, "crop: rectangle exceeds image bounds");
            return {p.w, p.h};
        }
        case TransformKind::rotate: {
            const auto& p = t.as<RotateParams>();
            if (p.angle != 90 && p.angle != 180 && p.angle != 270)
                fail(Errc::invalid_params, "rotate: angle must be 90, 180 or 270");
            return p.angle == 180 ? in : Dims{in.h, in.w};
        }
        case TransformKind::flip:
            return in;
        case TransformKind::translate:
            return in;
        case TransformKind::resize: {
            const auto& p = t.as<ResizeParams>();
            if (p.w == 0 || p.h == 0) fail(Errc::invalid_params, "resize: zero target size");
            return {p.w, p.h};
        }
        case TransformKind::censor: {
            const auto& p = t.as<CensorParams>();
            if (p.regions.empty()) fail(Errc::invalid_params, "censor: no regions");
            for (const auto& r : p.regions) {
                if (!r.oval) {
                    if (r.c <= 0 || r.d <= 0 || r.a < 0 || r.b < 0 || r.a + r.c > in.w ||
                        r.b + r.d > in.h)
                        fail(Errc::invalid_params, "censor: rectangle out of bounds");
                } else {
                    if (r.c <= 0 || r.d <= 0 || r.a < 0 || r.b < 0 || r.a >= in.w || r.b >= in.h)
                        fail(Errc::invalid_params, "censor: oval center out of bounds");
                }
            }
            return in;
        }
        case TransformKind::rgb2ycbcr:
        case TransformKind::ycbcr2rgb:
            return in;
        case TransformKind::white_balance: {
            const auto& p = t.as<WhiteBalanceParams>();
            for (double g : {p.fr, p.fg, p.fb})
                if (!(g >= 0.0) || g > 256.0)
                    fail(Errc::invalid_params, "whitebalance: gain out of range");
            return in;
        }
        case TransformKind::contrast: {
            const auto& p = t.as<ContrastParams>();
            if (!(p.f >= 0.0) || p.f > 256.0)
                fail(Errc::invalid_params, "contrast: factor out of range");
            return in;
        }
        case TransformKind::sharpen:
        case TransformKind::blur:
            return in;
    }
    fail(Errc::invalid_params, "unknown transform kind");
}

inline bool is_pure_copy(TransformKind k) {
    switch (k) {
        case TransformKind::crop:
        case TransformKind::rotate:
        case TransformKind::flip:
        case TransformKind::translate:
        case TransformKind::resize:
        case TransformKind::censor:
            return true;
        default:
            return false;
    }
}

// ---- shared numeric semantics ----------------------------------------------

// RoundAndClip: nearest integer (half away from zero handled as floor(x+0.5)),
// clipped to the uint8 range.
inline uint8_t round_and_clip(double v) {
    double r = std::floor(v + 0.5);
    if (r < 0) return 0;
    if (r > 255) return 255;
    return static_cast<uint8_t>(r);
}

inline int64_t clamp_u8(int64_t v) { return std::min<int64_t>(255, std::max<int64_t>(0, v)); }

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    return q * b > a ? q - 1 : q;
}

// Fixed-point colorspace math: scale 2^15, coefficients rounded to nearest,
// +2^14 rounding bias folded into the offset, floor division restores scale.
struct ColorMatrix {
    std::array<std::array<int64_t, 3>, 3> k;
    std::array<int64_t, 3> off;  // includes the integer offset * scale and the rounding bias
};

inline constexpr int64_t fp_scale_bits = 15;
inline constexpr int64_t fp_scale = int64_t(1) << fp_scale_bits;
inline constexpr int64_t fp_bias = int64_t(1) << (fp_scale_bits - 1);

inline int64_t fp_coeff(double c) { return static_cast<int64_t>(std::floor(c * fp_scale + 0.5)); }

inline const ColorMatrix& rgb_to_ycbcr_matrix() {
    static const ColorMatrix m = [] {
        ColorMatrix cm;
        cm.k = {{{fp_coeff(0.299), fp_coeff(0.587), fp_coeff(0.114)},
                 {fp_coeff(-0.168736), fp_coeff(-0.331264), fp_coeff(0.5)},
                 {fp_coeff(0.5), fp_coeff(-0.418688), fp_coeff(-0.081312)}}};
        cm.off = {fp_bias, 128 * fp_scale + fp_bias, 128 * fp_scale + fp_bias};
        return cm;
    }();
    return m;
}

inline const ColorMatrix& ycbcr_to_rgb_matrix() {
    static const ColorMatrix m = [] {
        ColorMatrix cm;
        int64_t kr = fp_coeff(1.402), kg1 = fp_coeff(-0.344136), kg2 = fp_coeff(-0.714136),
                kb = fp_coeff(1.772);
        cm.k = {{{fp_scale, 0, kr}, {fp_scale, kg1, kg2}, {fp_scale, kb, 0}}};
        cm.off = {-128 * kr + fp_bias, -128 * (kg1 + kg2) + fp_bias, -128 * kb + fp_bias};
        return cm;
    }();
    return m;
}

// 3x3 convolution kernels with integer entries over a power-of-two (or unit)
// denominator; the +denom/2 rounding bias matches the division gadget.
struct ConvKernel {
    std::array<std::array<int64_t, 3>, 3> k;
    int64_t denom = 1;
};

inline const ConvKernel& gaussian_blur_kernel() {
    static const ConvKernel k{{{{1, 2, 1}, {2, 4, 2}, {1, 2, 1}}}, 16};
    return k;
}

inline const ConvKernel& sharpen_kernel() {
    static const ConvKernel k{{{{0, -1, 0}, {-1, 5, -1}, {0, -1, 0}}}, 1};
    return k;
}

inline const ConvKernel& conv_kernel(TransformKind kind) {
    return kind == TransformKind::blur ? gaussian_blur_kernel() : sharpen_kernel();
}

// 256-entry per-sub-pixel maps for the lookup-table transforms.
inline std::array<uint8_t, 256> contrast_map(double f) {
    std::array<uint8_t, 256> m{};
    for (int p = 0; p < 256; ++p) m[size_t(p)] = round_and_clip(128.0 + f * (p - 128.0));
    return m;
}

inline std::array<uint8_t, 256> white_balance_map(double gain) {
    std::array<uint8_t, 256> m{};
    for (int p = 0; p < 256; ++p) m[size_t(p)] = round_and_clip(gain * p);
    return m;
}

// ---- pure-copy geometry -----------------------------------------------------

// For the copy-only transforms: which input pixel feeds output pixel (x, y),
// or nothing when the output is the revealed black cell. One definition
// shared by the native path and circuit synthesis.
inline std::optional<std::pair<uint32_t, uint32_t>> copy_source(const TransformSpec& t, Dims in,
                                                                uint32_t x, uint32_t y) {
    switch (t.kind) {
        case TransformKind::crop: {
            const auto& p = t.as<CropParams>();
            return std::make_pair(p.x + x, p.y + y);
        }
        case TransformKind::rotate: {
            const auto& p = t.as<RotateParams>();
            if (p.angle == 90) return std::make_pair(in.w - 1 - y, x);
            if (p.angle == 180) return std::make_pair(in.w - 1 - x, in.h - 1 - y);
            return std::make_pair(y, in.h - 1 - x);  // 270
        }
        case TransformKind::flip: {
            const auto& p = t.as<FlipParams>();
            if (p.axis == FlipAxis::x) return std::make_pair(x, in.h - 1 - y);
            return std::make_pair(in.w - 1 - x, y);
        }
        case TransformKind::translate: {
            const auto& p = t.as<TranslateParams>();
            int64_t sx = int64_t(x) - p.dx;
            int64_t sy = int64_t(y) - p.dy;
            if (sx < 0 || sy < 0 || sx >= in.w || sy >= in.h) return std::nullopt;
            return std::make_pair(uint32_t(sx), uint32_t(sy));
        }
        case TransformKind::resize: {
            const auto& p = t.as<ResizeParams>();
            // nearest neighbor: src = floor(dst * src_dim / dst_dim)
            uint32_t sx = static_cast<uint32_t>(uint64_t(x) * in.w / p.w);
            uint32_t sy = static_cast<uint32_t>(uint64_t(y) * in.h / p.h);
            return std::make_pair(sx, sy);
        }
        case TransformKind::censor: {
            const auto& p = t.as<CensorParams>();
            for (const auto& r : p.regions) {
                if (!r.oval) {
                    if (x >= r.a && x < r.a + r.c && y >= r.b && y < r.b + r.d)
                        return std::nullopt;
                } else {
                    // midpoint-style ellipse fill in integer arithmetic
                    int64_t dx = int64_t(x) - r.a, dy = int64_t(y) - r.b;
                    if (dx * dx * r.d * r.d + dy * dy * r.c * r.c <= r.c * r.c * r.d * r.d)
                        return std::nullopt;
                }
            }
            return std::make_pair(x, y);
        }
        default:
            fail(Errc::internal, "copy_source on an arithmetic transform");
    }
}

// ---- native reference semantics ----------------------------------------------

// Clamp-to-edge neighborhood accumulate, shared by the native path and the
// per-region gate construction.
inline int64_t conv_raw(const Image& img, const ConvKernel& k, uint32_t x, uint32_t y,
                        uint32_t c) {
    int64_t acc = 0;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            int64_t xx = std::min<int64_t>(img.width - 1, std::max<int64_t>(0, int64_t(x) + dx));
            int64_t yy = std::min<int64_t>(img.height - 1, std::max<int64_t>(0, int64_t(y) + dy));
            acc += k.k[size_t(dy + 1)][size_t(dx + 1)] *
                   img.at(uint32_t(xx), uint32_t(yy), c);
        }
    }
    return acc;
}

inline Image apply_native(const TransformSpec& t, const Image& img) {
    Dims in{img.width, img.height};
    Dims od = out_dims(t, in);
    Image out = Image::filled(od.w, od.h);

    if (is_pure_copy(t.kind)) {
        for (uint32_t y = 0; y < od.h; ++y)
            for (uint32_t x = 0; x < od.w; ++x) {
                auto src = copy_source(t, in, x, y);
                for (uint32_t c = 0; c < 3; ++c)
                    out.at(x, y, c) = src ? img.at(src->first, src->second, c) : 0;
            }
        return out;
    }

    switch (t.kind) {
        case TransformKind::contrast: {
            auto m = contrast_map(t.as<ContrastParams>().f);
            for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = m[img.data[i]];
            return out;
        }
        case TransformKind::white_balance: {
            const auto& p = t.as<WhiteBalanceParams>();
            std::array<std::array<uint8_t, 256>, 3> maps = {
                white_balance_map(p.fr), white_balance_map(p.fg), white_balance_map(p.fb)};
            for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = maps[i % 3][img.data[i]];
            return out;
        }
        case TransformKind::rgb2ycbcr:
        case TransformKind::ycbcr2rgb: {
            const ColorMatrix& m = t.kind == TransformKind::rgb2ycbcr ? rgb_to_ycbcr_matrix()
                                                                      : ycbcr_to_rgb_matrix();
            for (uint32_t y = 0; y < od.h; ++y)
                for (uint32_t x = 0; x < od.w; ++x) {
                    int64_t in0 = img.at(x, y, 0), in1 = img.at(x, y, 1), in2 = img.at(x, y, 2);
                    for (uint32_t c = 0; c < 3; ++c) {
                        int64_t raw = m.k[c][0] * in0 + m.k[c][1] * in1 + m.k[c][2] * in2 +
                                      m.off[c];
                        out.at(x, y, c) =
                            static_cast<uint8_t>(clamp_u8(floor_div(raw, fp_scale)));
                    }
                }
            return out;
        }
        case TransformKind::sharpen:
        case TransformKind::blur: {
            const ConvKernel& k = conv_kernel(t.kind);
            for (uint32_t y = 0; y < od.h; ++y)
                for (uint32_t x = 0; x < od.w; ++x)
                    for (uint32_t c = 0; c < 3; ++c) {
                        int64_t raw = conv_raw(img, k, x, y, c) + k.denom / 2;
                        out.at(x, y, c) =
                            static_cast<uint8_t>(clamp_u8(floor_div(raw, k.denom)));
                    }
            return out;
        }
        default:
            fail(Errc::internal, "unhandled transform kind");
    }
}

inline Image apply_native_chain(std::span<const TransformSpec> ts, Image img) {
    for (const TransformSpec& t : ts) img = apply_native(t, img);
    return img;
}

}  // namespace zkimg
