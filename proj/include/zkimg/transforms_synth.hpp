#pragma once

#include <map>

#include "zkimg/gadgets.hpp"
#include "zkimg/poseidon.hpp"
#include "zkimg/transforms.hpp"

namespace zkimg {

// Circuit-side image: one cell per sub-pixel, row-major channel-interleaved.
// Pure-copy transforms permute this vector without touching the builder; the
// shape records when cells form a lane strip that gates and lookups can
// address directly.
struct PixelGrid {
    uint32_t w = 0, h = 0;
    std::vector<CellRef> cells;  // w*h*3

    struct Shape {
        std::vector<uint32_t> cols;  // lane columns; cells[i] = (cols[i%k], start + i/k)
        uint64_t start = 0;
        uint64_t rows = 0;  // occupied rows (including lane padding)
    };
    std::optional<Shape> shape;

    const CellRef& at(uint32_t x, uint32_t y, uint32_t c) const {
        return cells[(size_t(y) * w + x) * 3 + c];
    }
};

// A stage travels as circuit cells plus the concrete raster they hold; the
// raster feeds witness values and is the oracle the cells must match.
struct StageData {
    PixelGrid grid;
    Image image;
};

struct SynthOptions {
    uint32_t pixel_lanes = 1;  // 1 or a multiple of 3
};

namespace synth_detail {

inline std::string fresh_name(Synth& s, const char* prefix) {
    uint32_t& n = s.extra<uint32_t>("strip_counter");
    return std::string(prefix) + "#" + std::to_string(n++);
}

// g * x + (1 - g) * def, degree 2: maps rows with g=0 onto a default table
// entry so lookups can be scoped to a row range.
inline Expr gated(uint32_t g_col, const Expr& x, const Fe& def) {
    return Expr::cell(g_col) * (x - Expr::constant(def)) + Expr::constant(def);
}

inline uint32_t gating_column(Synth& s, uint64_t start, uint64_t stride, uint64_t count) {
    Column g = s.builder().add_column(ColumnKind::fixed);
    s.builder().assign_fixed_run(g.index, start, stride, count, Fe::one());
    return g.index;
}

// Copies grid cells into a fresh lane strip (rows padded to full lanes with
// zero-pinned cells when requested). Copies only: no gates, no lookups.
inline PixelGrid materialize(Synth& s, const PixelGrid& grid, const Image& img, uint32_t lanes,
                             bool pad_full_rows) {
    PixelGrid out;
    out.w = grid.w;
    out.h = grid.h;
    size_t n = grid.cells.size();
    size_t total = pad_full_rows ? (n + lanes - 1) / lanes * lanes : n;

    auto& strip = s.strip(fresh_name(s, "strip"), lanes);
    PixelGrid::Shape shape{strip.cols, strip.cursor, (total + lanes - 1) / lanes};
    strip.cursor += shape.rows;

    out.cells.reserve(n);
    for (size_t i = 0; i < total; ++i) {
        CellRef slot{shape.cols[i % lanes], shape.start + i / lanes};
        if (i < n) {
            s.set(slot, Fe::from_u64(img.data[i]));
            s.builder().add_copy(grid.cells[i], slot);
            out.cells.push_back(slot);
        } else {
            s.set(slot, Fe::zero());
            s.builder().add_copy(s.zero_cell(), slot);
        }
    }
    out.shape = std::move(shape);
    return out;
}

// Grid as a lane strip of the requested width, materializing when the
// current cells are scattered or the lane count differs. Strips built at a
// given width always carry constrained lane padding, so matching shapes are
// reusable as-is.
inline PixelGrid ensure_strip(Synth& s, const PixelGrid& grid, const Image& img, uint32_t lanes,
                              bool pad_full_rows) {
    if (grid.shape && grid.shape->cols.size() == lanes) return grid;
    return materialize(s, grid, img, lanes, pad_full_rows);
}

// Per-channel fixed-point plan for colorspace synthesis: shift negative raw
// ranges into nonnegative dividends, then clamp back after division.
struct ChannelPlan {
    int64_t offset = 0;   // hard-coded into the dot polynomial (includes shift)
    int64_t shift_k = 0;  // quotient bias introduced by the shift
    int64_t lo = 0, hi = 0;  // clamp table domain for the unshifted quotient
};

inline ChannelPlan channel_plan(const ColorMatrix& m, size_t c) {
    int64_t raw_min = m.off[c], raw_max = m.off[c];
    for (int64_t k : m.k[c]) {
        if (k < 0) raw_min += k * 255;
        if (k > 0) raw_max += k * 255;
    }
    ChannelPlan p;
    p.shift_k = raw_min < 0 ? (-raw_min + fp_scale - 1) / fp_scale : 0;
    p.offset = m.off[c] + p.shift_k * fp_scale;
    p.lo = floor_div(raw_min + p.shift_k * fp_scale, fp_scale) - p.shift_k;
    p.hi = floor_div(raw_max + p.shift_k * fp_scale, fp_scale) - p.shift_k;
    return p;
}

inline Synth::TableRef lut_table(Synth& s, const std::array<uint8_t, 256>& map) {
    std::string key = "lut:";
    for (uint8_t v : map) {
        static const char* hex = "0123456789abcdef";
        key += hex[v >> 4];
        key += hex[v & 0xf];
    }
    return s.table(key, [&map] {
        std::vector<Fe> keys(256), vals(256);
        for (size_t i = 0; i < 256; ++i) {
            keys[i] = Fe::from_u64(i);
            vals[i] = Fe::from_u64(map[i]);
        }
        return std::vector<std::vector<Fe>>{std::move(keys), std::move(vals)};
    });
}

inline Synth::TableRef clamp_table(Synth& s, int64_t lo, int64_t hi) {
    if (hi - lo + 1 > (int64_t(1) << 16)) fail(Errc::bound_too_wide, "clamp table too wide");
    return s.table("clamp:" + std::to_string(lo) + ":" + std::to_string(hi), [lo, hi] {
        size_t n = static_cast<size_t>(hi - lo + 1);
        std::vector<Fe> keys(n), vals(n);
        for (size_t i = 0; i < n; ++i) {
            keys[i] = Fe::from_u64(i);
            vals[i] = Fe::from_i64(clamp_u8(lo + static_cast<int64_t>(i)));
        }
        return std::vector<std::vector<Fe>>{std::move(keys), std::move(vals)};
    });
}

inline Synth::TableRef rem_table(Synth& s, uint64_t a) {
    return s.table("rem" + std::to_string(a), [a] {
        std::vector<Fe> vals(a);
        for (uint64_t i = 0; i < a; ++i) vals[i] = Fe::from_u64(i);
        return std::vector<std::vector<Fe>>{std::move(vals)};
    });
}

}  // namespace synth_detail

// ---- input / pure-copy stages ------------------------------------------------

// Loads the image into a width-1 advice strip with an 8-bit range lookup on
// the whole column; this is the only place witness bytes enter the circuit.
inline StageData make_input_stage(Synth& s, const Image& img) {
    auto& strip = s.strip("input_bytes", 1, [&](Synth::Strip& st) {
        range_check_column(s, st.cols[0], 8);
    });
    PixelGrid grid;
    grid.w = img.width;
    grid.h = img.height;
    PixelGrid::Shape shape{strip.cols, strip.cursor, img.data.size()};
    strip.cursor += img.data.size();
    grid.cells.reserve(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        CellRef c{shape.cols[0], shape.start + i};
        s.set(c, Fe::from_u64(img.data[i]));
        grid.cells.push_back(c);
    }
    grid.shape = std::move(shape);
    return {std::move(grid), img};
}

// Crop / rotate / flip / translate / resize / censor: every output cell is an
// alias of an input cell or of the shared zero cell. No gates, no lookups.
inline StageData synth_copy_geometry(Synth& s, const TransformSpec& t, const StageData& in) {
    Dims id{in.image.width, in.image.height};
    Dims od = out_dims(t, id);
    PixelGrid grid;
    grid.w = od.w;
    grid.h = od.h;
    grid.cells.reserve(size_t(od.w) * od.h * 3);
    for (uint32_t y = 0; y < od.h; ++y)
        for (uint32_t x = 0; x < od.w; ++x) {
            auto src = copy_source(t, id, x, y);
            for (uint32_t c = 0; c < 3; ++c)
                grid.cells.push_back(src ? in.grid.at(src->first, src->second, c)
                                         : s.zero_cell());
        }
    return {std::move(grid), apply_native(t, in.image)};
}

// ---- pointwise lookup stages ---------------------------------------------------

// Contrast / white balance: one 256-entry (input, output) table per distinct
// per-channel map, one output strip, gated lookups over the strip rows.
inline StageData synth_pointwise_lut(Synth& s, const TransformSpec& t, const StageData& in,
                                     const SynthOptions& opt) {
    using namespace synth_detail;
    uint32_t lanes = opt.pixel_lanes;
    std::array<std::array<uint8_t, 256>, 3> maps{};
    if (t.kind == TransformKind::contrast) {
        auto m = contrast_map(t.as<ContrastParams>().f);
        maps = {m, m, m};
    } else {
        const auto& p = t.as<WhiteBalanceParams>();
        maps = {white_balance_map(p.fr), white_balance_map(p.fg), white_balance_map(p.fb)};
    }
    bool uniform = maps[0] == maps[1] && maps[1] == maps[2];
    if (!uniform && lanes != 1 && lanes % 3 != 0)
        fail(Errc::invalid_params, "pixel lanes must be 1 or a multiple of 3");

    PixelGrid inputs = ensure_strip(s, in.grid, in.image, lanes, /*pad_full_rows=*/lanes > 1);
    const auto& shape = *inputs.shape;
    size_t n = inputs.cells.size();

    auto& out_strip = s.strip(fresh_name(s, "lut_out"), lanes);
    // output strip row-aligned with the input strip
    std::vector<uint32_t> out_cols = out_strip.cols;

    Image out_img = apply_native(t, in.image);

    PixelGrid out;
    out.w = in.image.width;
    out.h = in.image.height;
    out.shape = PixelGrid::Shape{out_cols, shape.start, shape.rows};
    out_strip.cursor = std::max<uint64_t>(out_strip.cursor, shape.start + shape.rows);
    for (size_t i = 0; i < n; ++i)
        out.cells.push_back({out_cols[i % lanes], shape.start + i / lanes});

    // witness; lane-padding cells flow through the map like any other row
    size_t total = shape.rows * lanes;
    for (size_t i = 0; i < total; ++i) {
        CellRef slot{out_cols[i % lanes], shape.start + i / lanes};
        size_t channel = (lanes == 1 ? i : i % lanes) % 3;
        uint8_t v;
        if (i < n) {
            v = out_img.data[i];
        } else {
            uint64_t pad_in = s.value({shape.cols[i % lanes], shape.start + i / lanes}).as_u64();
            v = maps[channel][pad_in & 0xff];
        }
        s.set(slot, Fe::from_u64(v));
    }

    if (uniform || lanes > 1) {
        uint32_t g = gating_column(s, shape.start, 1, shape.rows);
        for (uint32_t l = 0; l < lanes; ++l) {
            const auto& map = maps[l % 3];
            auto tab = lut_table(s, map);
            s.builder().add_lookup(
                fresh_name(s, "lut"),
                {gated(g, Expr::cell(shape.cols[l]), Fe::zero()),
                 gated(g, Expr::cell(out_cols[l]), Fe::from_u64(map[0]))},
                tab.cols);
        }
    } else {
        // single lane, distinct channel maps: gate per channel with stride 3
        for (uint32_t c = 0; c < 3; ++c) {
            if (n <= c) continue;
            uint64_t count = (n - c + 2) / 3;
            uint32_t g = gating_column(s, shape.start + c, 3, count);
            auto tab = lut_table(s, maps[c]);
            s.builder().add_lookup(fresh_name(s, "lut"),
                                   {gated(g, Expr::cell(shape.cols[0]), Fe::zero()),
                                    gated(g, Expr::cell(out_cols[0]), Fe::from_u64(maps[c][0]))},
                                   tab.cols);
        }
    }

    return {std::move(out), std::move(out_img)};
}

// ---- colorspace stages ----------------------------------------------------------

// Per pixel and channel: dot product with hard-coded fixed-point
// coefficients, division by 2^15 (remainder lookup + 16-bit quotient check),
// then a clamp lookup back to [0,255]. Negative ranges are shifted into
// nonnegative dividends inside the dot offset and unshifted in the clamp key.
inline StageData synth_colorspace(Synth& s, const TransformSpec& t, const StageData& in,
                                  const SynthOptions& opt) {
    using namespace synth_detail;
    uint32_t lanes = opt.pixel_lanes;
    if (lanes != 1 && lanes % 3 != 0)
        fail(Errc::invalid_params, "pixel lanes must be 1 or a multiple of 3");
    const ColorMatrix& m = t.kind == TransformKind::rgb2ycbcr ? rgb_to_ycbcr_matrix()
                                                              : ycbcr_to_rgb_matrix();
    std::array<ChannelPlan, 3> plans{channel_plan(m, 0), channel_plan(m, 1), channel_plan(m, 2)};

    PixelGrid inputs = ensure_strip(s, in.grid, in.image, lanes, /*pad_full_rows=*/lanes > 1);
    const auto& shape = *inputs.shape;
    size_t n = inputs.cells.size();

    auto alloc_aligned = [&](const char* what) {
        auto& st = s.strip(fresh_name(s, what), lanes);
        st.cursor = std::max<uint64_t>(st.cursor, shape.start + shape.rows);
        return st.cols;
    };
    std::vector<uint32_t> dcol = alloc_aligned("cs_dot");
    std::vector<uint32_t> qcol = alloc_aligned("cs_quot");
    std::vector<uint32_t> rcol = alloc_aligned("cs_rem");
    std::vector<uint32_t> ocol = alloc_aligned("cs_out");

    // gate: per pixel group, 3 dot polys + 3 division polys under one selector
    std::vector<Expr> polys;
    uint64_t stride, count;
    if (lanes == 1) {
        for (uint32_t c = 0; c < 3; ++c) {
            int32_t rc = static_cast<int32_t>(c);
            Expr dot = Expr::cell(dcol[0], rc) - Expr::constant(plans[c].offset);
            for (uint32_t j = 0; j < 3; ++j)
                dot = dot - Expr::cell(shape.cols[0], static_cast<int32_t>(j))
                                .scaled(Fe::from_i64(m.k[c][j]));
            polys.push_back(dot);
            polys.push_back(Expr::cell(dcol[0], rc) -
                            Expr::cell(qcol[0], rc).scaled(Fe::from_u64(fp_scale)) -
                            Expr::cell(rcol[0], rc));
        }
        stride = 3;
        count = (n + 2) / 3;
    } else {
        for (uint32_t l = 0; l < lanes; l += 3) {
            for (uint32_t c = 0; c < 3; ++c) {
                Expr dot = Expr::cell(dcol[l + c]) - Expr::constant(plans[c].offset);
                for (uint32_t j = 0; j < 3; ++j)
                    dot = dot - Expr::cell(shape.cols[l + j]).scaled(Fe::from_i64(m.k[c][j]));
                polys.push_back(dot);
                polys.push_back(Expr::cell(dcol[l + c]) -
                                Expr::cell(qcol[l + c]).scaled(Fe::from_u64(fp_scale)) -
                                Expr::cell(rcol[l + c]));
            }
        }
        stride = 1;
        count = shape.rows;
    }
    GateId gate = s.builder().add_gate(fresh_name(s, t.kind == TransformKind::rgb2ycbcr
                                                         ? "rgb2ycbcr"
                                                         : "ycbcr2rgb"),
                                       std::move(polys));
    s.builder().enable_gate_run(gate, shape.start, stride, count);

    // lookups: remainder and 16-bit quotient per lane column (whole column),
    // clamp per channel (gated)
    auto rem = rem_table(s, uint64_t(fp_scale));
    auto r16 = s.range_table(16);
    for (uint32_t l = 0; l < std::max<uint32_t>(lanes, 1); ++l) {
        s.builder().add_lookup(fresh_name(s, "cs_rem"), {Expr::cell(rcol[l])}, rem.cols);
        s.builder().add_lookup(fresh_name(s, "cs_q16"), {Expr::cell(qcol[l])}, r16.cols);
    }

    auto clamp_lookup = [&](uint32_t g, uint32_t q_col, uint32_t o_col, const ChannelPlan& p) {
        auto tab = clamp_table(s, p.lo, p.hi);
        Fe def_val = Fe::from_i64(clamp_u8(p.lo));
        s.builder().add_lookup(
            fresh_name(s, "cs_clamp"),
            {gated(g, Expr::cell(q_col) + Expr::constant(-p.shift_k - p.lo), Fe::zero()),
             gated(g, Expr::cell(o_col), def_val)},
            tab.cols);
    };
    if (lanes == 1) {
        for (uint32_t c = 0; c < 3; ++c) {
            if (n <= c) continue;
            uint64_t cnt = (n - c + 2) / 3;
            uint32_t g = gating_column(s, shape.start + c, 3, cnt);
            clamp_lookup(g, qcol[0], ocol[0], plans[c]);
        }
    } else {
        uint32_t g = gating_column(s, shape.start, 1, shape.rows);
        for (uint32_t l = 0; l < lanes; ++l) clamp_lookup(g, qcol[l], ocol[l], plans[l % 3]);
    }

    // witness
    Image out_img = apply_native(t, in.image);
    size_t total = shape.rows * lanes;
    auto slot = [&](const std::vector<uint32_t>& cols, size_t i) {
        return CellRef{cols[i % lanes], shape.start + i / lanes};
    };
    for (size_t i = 0; i < total; i += 3) {
        int64_t in0, in1, in2;
        if (i < n) {
            in0 = in.image.data[i];
            in1 = in.image.data[i + 1];
            in2 = in.image.data[i + 2];
        } else {
            // lane-padding pixel: read whatever the padded strip holds
            auto pad = [&](size_t j) {
                return static_cast<int64_t>(
                    s.value({shape.cols[j % lanes], shape.start + j / lanes}).as_u64());
            };
            in0 = pad(i);
            in1 = pad(i + 1);
            in2 = pad(i + 2);
        }
        for (uint32_t c = 0; c < 3; ++c) {
            const ChannelPlan& p = plans[c];
            int64_t d = m.k[c][0] * in0 + m.k[c][1] * in1 + m.k[c][2] * in2 + p.offset;
            int64_t q = d >> fp_scale_bits;
            int64_t r = d & (fp_scale - 1);
            s.set(slot(dcol, i + c), Fe::from_i64(d));
            s.set(slot(qcol, i + c), Fe::from_i64(q));
            s.set(slot(rcol, i + c), Fe::from_i64(r));
            s.set(slot(ocol, i + c), Fe::from_i64(clamp_u8(q - p.shift_k)));
        }
    }

    PixelGrid out;
    out.w = in.image.width;
    out.h = in.image.height;
    out.shape = PixelGrid::Shape{ocol, shape.start, shape.rows};
    for (size_t i = 0; i < n; ++i) out.cells.push_back(slot(ocol, i));
    return {std::move(out), std::move(out_img)};
}

// ---- convolution stages -----------------------------------------------------------

namespace synth_detail {

// Merged kernel for a border class: clamp-to-edge folds out-of-range taps
// onto their clamped neighbors, giving one polynomial per (x-class, y-class).
struct ConvRegionPoly {
    std::vector<std::pair<int32_t, int64_t>> taps;  // (strip rotation, coefficient)
};

inline ConvRegionPoly conv_region_poly(const ConvKernel& k, Dims dims, uint32_t rx, uint32_t ry) {
    std::map<int32_t, int64_t> taps;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            int64_t cx = std::min<int64_t>(dims.w - 1, std::max<int64_t>(0, int64_t(rx) + dx));
            int64_t cy = std::min<int64_t>(dims.h - 1, std::max<int64_t>(0, int64_t(ry) + dy));
            int32_t rot = static_cast<int32_t>(3 * ((cy - ry) * dims.w + (cx - rx)));
            taps[rot] += k.k[size_t(dy + 1)][size_t(dx + 1)];
        }
    ConvRegionPoly p;
    for (auto [rot, coeff] : taps)
        if (coeff != 0) p.taps.emplace_back(rot, coeff);
    return p;
}

inline std::string conv_poly_sig(const ConvRegionPoly& p) {
    std::string sig;
    for (auto [rot, coeff] : p.taps)
        sig += std::to_string(rot) + ":" + std::to_string(coeff) + ";";
    return sig;
}

// x/y border classes and their pixel ranges; degenerate dims collapse classes.
inline std::vector<std::pair<uint32_t, uint32_t>> border_classes(uint32_t extent) {
    if (extent == 1) return {{0, 0}};
    if (extent == 2) return {{0, 0}, {1, 1}};
    return {{0, 0}, {1, extent - 2}, {extent - 1, extent - 1}};
}

}  // namespace synth_detail

// Sharpen / blur: per sub-pixel, a dot over the 3x3 neighborhood with kernel
// values hard-coded into region gates (replicate-edge borders get their own
// merged polynomials), then division by the kernel denominator and a clamp.
inline StageData synth_convolution(Synth& s, const TransformSpec& t, const StageData& in) {
    using namespace synth_detail;
    const ConvKernel& k = conv_kernel(t.kind);
    Dims dims{in.image.width, in.image.height};

    PixelGrid inputs = ensure_strip(s, in.grid, in.image, 1, false);
    const auto& shape = *inputs.shape;
    size_t n = inputs.cells.size();

    int64_t acc_min = 0, acc_max = 0;
    for (const auto& row : k.k)
        for (int64_t v : row) (v < 0 ? acc_min : acc_max) += v * 255;
    int64_t shift_k = acc_min < 0 ? (-acc_min + k.denom - 1) / k.denom : 0;
    int64_t offset = k.denom / 2 + shift_k * k.denom;
    bool divide = k.denom > 1;
    int64_t qlo = floor_div(acc_min + offset, k.denom), qhi = floor_div(acc_max + offset, k.denom);
    int64_t clamp_lo = qlo - shift_k, clamp_hi = qhi - shift_k;
    unsigned qbits = qhi < 256 ? 8 : 16;

    auto alloc_aligned = [&](const char* what) {
        auto& st = s.strip(fresh_name(s, what), 1);
        st.cursor = std::max<uint64_t>(st.cursor, shape.start + n);
        return st.cols[0];
    };
    uint32_t dcol = alloc_aligned("conv_dot");
    uint32_t qcol = divide ? alloc_aligned("conv_quot") : dcol;
    uint32_t rcol = divide ? alloc_aligned("conv_rem") : dcol;
    uint32_t ocol = alloc_aligned("conv_out");

    // region gates, deduplicated by merged-polynomial signature
    std::map<std::string, GateId> region_gates;
    for (auto [y0, y1] : border_classes(dims.h)) {
        for (auto [x0, x1] : border_classes(dims.w)) {
            ConvRegionPoly poly = conv_region_poly(k, dims, x0, y0);
            std::string sig = conv_poly_sig(poly);
            auto it = region_gates.find(sig);
            GateId gid;
            if (it != region_gates.end()) {
                gid = it->second;
            } else {
                Expr e = Expr::cell(dcol) - Expr::constant(offset);
                for (auto [rot, coeff] : poly.taps)
                    e = e - Expr::cell(shape.cols[0], rot).scaled(Fe::from_i64(coeff));
                gid = s.builder().add_gate(fresh_name(s, "conv_region"), {e});
                region_gates.emplace(sig, gid);
            }
            for (uint32_t y = y0; y <= y1; ++y)
                s.builder().enable_gate_run(
                    gid, shape.start + 3 * (uint64_t(y) * dims.w + x0), 1,
                    3 * (uint64_t(x1) - x0 + 1));
        }
    }

    if (divide) {
        GateId div_gate = s.builder().add_gate(
            fresh_name(s, "conv_div"),
            {Expr::cell(dcol) - Expr::cell(qcol).scaled(Fe::from_i64(k.denom)) -
             Expr::cell(rcol)});
        s.builder().enable_gate_run(div_gate, shape.start, 1, n);
        auto rem = rem_table(s, uint64_t(k.denom));
        s.builder().add_lookup(fresh_name(s, "conv_rem"), {Expr::cell(rcol)}, rem.cols);
        auto rq = s.range_table(qbits);
        s.builder().add_lookup(fresh_name(s, "conv_q"), {Expr::cell(qcol)}, rq.cols);
    }

    uint32_t g = gating_column(s, shape.start, 1, n);
    auto tab = clamp_table(s, clamp_lo, clamp_hi);
    s.builder().add_lookup(
        fresh_name(s, "conv_clamp"),
        {gated(g, Expr::cell(qcol) + Expr::constant(-shift_k - clamp_lo), Fe::zero()),
         gated(g, Expr::cell(ocol), Fe::from_i64(clamp_u8(clamp_lo)))},
        tab.cols);

    // witness
    Image out_img = apply_native(t, in.image);
    for (uint32_t y = 0; y < dims.h; ++y)
        for (uint32_t x = 0; x < dims.w; ++x)
            for (uint32_t c = 0; c < 3; ++c) {
                size_t i = (size_t(y) * dims.w + x) * 3 + c;
                int64_t acc = conv_raw(in.image, k, x, y, c);
                int64_t d = acc + offset;
                s.set({dcol, shape.start + i}, Fe::from_i64(d));
                if (divide) {
                    s.set({qcol, shape.start + i}, Fe::from_i64(d / k.denom));
                    s.set({rcol, shape.start + i}, Fe::from_i64(d % k.denom));
                }
                int64_t q = divide ? d / k.denom : d;
                s.set({ocol, shape.start + i}, Fe::from_i64(clamp_u8(q - shift_k)));
            }

    PixelGrid out;
    out.w = dims.w;
    out.h = dims.h;
    out.shape = PixelGrid::Shape{{ocol}, shape.start, n};
    for (size_t i = 0; i < n; ++i) out.cells.push_back({ocol, shape.start + i});
    return {std::move(out), std::move(out_img)};
}

// ---- dispatch ---------------------------------------------------------------------

inline StageData synth_transform(Synth& s, const TransformSpec& t, const StageData& in,
                                 const SynthOptions& opt = {}) {
    if (is_pure_copy(t.kind)) return synth_copy_geometry(s, t, in);
    switch (t.kind) {
        case TransformKind::contrast:
        case TransformKind::white_balance:
            return synth_pointwise_lut(s, t, in, opt);
        case TransformKind::rgb2ycbcr:
        case TransformKind::ycbcr2rgb:
            return synth_colorspace(s, t, in, opt);
        case TransformKind::sharpen:
        case TransformKind::blur:
            return synth_convolution(s, t, in);
        default:
            fail(Errc::internal, "unhandled transform kind in synthesis");
    }
}

// Width-1 contiguous strip view of a grid, for byte packing.
inline PixelGrid ensure_width1(Synth& s, const StageData& stage) {
    return synth_detail::ensure_strip(s, stage.grid, stage.image, 1, false);
}

// Packs a width-1 byte strip into field elements, 31 bytes per element, with
// stride-enabled gates reading the strip through rotations (no extra copies).
inline std::vector<CellRef> bulk_pack(Synth& s, const PixelGrid& strip) {
    if (!strip.shape || strip.shape->cols.size() != 1)
        fail(Errc::internal, "bulk_pack requires a width-1 strip");
    uint32_t bcol = strip.shape->cols[0];
    uint64_t start = strip.shape->start;
    size_t n = strip.cells.size();
    size_t full = n / pack_chunk_bytes;
    size_t tail = n % pack_chunk_bytes;

    // element cells sit on their chunk's first byte row so the pack gate can
    // reach the 31 bytes through fixed rotations
    auto& epool = s.strip(synth_detail::fresh_name(s, "packed"), 1);
    uint32_t ecol = epool.cols[0];
    uint64_t ebase = start;
    epool.cursor = start + n;

    auto pack_gate = [&](size_t count) {
        std::string name = "bulkpack:" + std::to_string(bcol) + ":" + std::to_string(ecol) + ":" +
                           std::to_string(count);
        return s.gate(name, [&] {
            Expr e = Expr::cell(ecol);
            Fe w = Fe::one();
            Fe base = Fe::from_u64(256);
            for (size_t i = 0; i < count; ++i) {
                e = e - Expr::cell(bcol, static_cast<int32_t>(i)).scaled(w);
                w *= base;
            }
            return std::vector<Expr>{e};
        });
    };

    if (full) {
        GateId g = pack_gate(pack_chunk_bytes);
        s.builder().enable_gate_run(g, ebase, pack_chunk_bytes, full);
    }
    if (tail) {
        GateId g = pack_gate(tail);
        s.builder().enable_gate(g, ebase + full * pack_chunk_bytes);
    }

    // witness + element cells (one per chunk, on the chunk's first strip row)
    std::vector<uint8_t> bytes(n);
    for (size_t i = 0; i < n; ++i) {
        auto v = s.value(strip.cells[i]).to_i64();
        bytes[i] = static_cast<uint8_t>(*v);
    }
    std::vector<Fe> packed = pack_bytes_le(bytes);
    std::vector<CellRef> out;
    out.reserve(packed.size());
    for (size_t j = 0; j < packed.size(); ++j) {
        CellRef c{ecol, ebase + j * pack_chunk_bytes};
        s.set(c, packed[j]);
        out.push_back(c);
    }
    return out;
}

}  // namespace zkimg
