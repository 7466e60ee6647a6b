#pragma once

#include <charconv>
#include <set>
#include <sstream>
#include <string_view>

#include "zkimg/poseidon_gadget.hpp"
#include "zkimg/transforms_synth.hpp"

namespace zkimg {

enum class RevealPolicy : uint8_t { hash_only = 0, image = 1 };

// Ordered, parameterized transform list with validated dimension flow.
struct PipelineSpec {
    Dims source;
    std::vector<TransformSpec> transforms;
    RevealPolicy reveal = RevealPolicy::image;

    std::vector<Dims> dim_trace() const {
        std::vector<Dims> dims{source};
        for (size_t i = 0; i < transforms.size(); ++i) {
            try {
                dims.push_back(out_dims(transforms[i], dims.back()));
            } catch (const Error& e) {
                fail(Errc::dimension_mismatch,
                     "transform " + std::to_string(i + 1) + " (" +
                         transform_kind_name(transforms[i].kind) + "): " + e.what());
            }
        }
        return dims;
    }
};

// ---- textual pipeline format --------------------------------------------------
//
//   source 160x120
//   crop x=8 y=8 w=144 h=104
//   censor rect x=20 y=20 w=30 h=10 oval cx=90 cy=60 rx=10 ry=6
//   whitebalance fr=1.1 fg=1.0 fb=0.9
//   sharpen
//   contrast f=1.2
//   resize w=72 h=52
//   reveal image
//
// '#' starts a comment; unknown keys are errors.

namespace pipeline_text {

struct Token {
    std::string key;    // empty for bare words
    std::string value;  // word itself when key is empty
};

[[noreturn]] inline void parse_fail(size_t line, const std::string& what) {
    fail(Errc::parse_error, "line " + std::to_string(line) + ": " + what);
}

inline std::vector<std::string> split_words(std::string_view line) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) out.emplace_back(line.substr(start, i - start));
    }
    return out;
}

inline int64_t parse_int(const std::string& s, size_t line, const std::string& key) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        parse_fail(line, "expected integer for '" + key + "', got '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s, size_t line, const std::string& key) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        parse_fail(line, "expected number for '" + key + "', got '" + s + "'");
    return v;
}

// key=value tokens after the leading word; enforces the exact key set
class Args {
  public:
    Args(const std::vector<std::string>& words, size_t first, size_t line)
        : line_(line) {
        for (size_t i = first; i < words.size(); ++i) {
            size_t eq = words[i].find('=');
            if (eq == std::string::npos) parse_fail(line, "expected key=value, got '" + words[i] + "'");
            kv_.emplace_back(words[i].substr(0, eq), words[i].substr(eq + 1));
        }
    }

    int64_t take_int(const std::string& key) { return parse_int(take(key), line_, key); }
    double take_double(const std::string& key) { return parse_double(take(key), line_, key); }

    void finish() {
        for (auto& [k, v] : kv_)
            if (!k.empty()) parse_fail(line_, "unknown key '" + k + "'");
    }

  private:
    std::string take(const std::string& key) {
        for (auto& [k, v] : kv_) {
            if (k == key) {
                std::string out = v;
                k.clear();
                return out;
            }
        }
        parse_fail(line_, "missing key '" + key + "'");
    }

    size_t line_;
    std::vector<std::pair<std::string, std::string>> kv_;
};

inline std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

}  // namespace pipeline_text

inline PipelineSpec parse_pipeline(std::string_view text) {
    using namespace pipeline_text;
    PipelineSpec spec;
    bool have_source = false, have_reveal = false;

    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string_view line = raw.substr(0, raw.find('#'));
        auto words = split_words(line);
        if (words.empty()) continue;
        if (have_reveal) parse_fail(line_no, "content after the reveal footer");

        const std::string& head = words[0];
        if (!have_source) {
            if (head != "source") parse_fail(line_no, "pipeline must start with 'source WxH'");
            if (words.size() != 2) parse_fail(line_no, "usage: source WxH");
            size_t x = words[1].find('x');
            if (x == std::string::npos) parse_fail(line_no, "usage: source WxH");
            spec.source.w = static_cast<uint32_t>(
                parse_int(words[1].substr(0, x), line_no, "source width"));
            spec.source.h = static_cast<uint32_t>(
                parse_int(words[1].substr(x + 1), line_no, "source height"));
            if (spec.source.w == 0 || spec.source.h == 0)
                parse_fail(line_no, "source dimensions must be positive");
            have_source = true;
            continue;
        }

        if (head == "reveal") {
            if (words.size() != 2 || (words[1] != "image" && words[1] != "hash"))
                parse_fail(line_no, "usage: reveal image|hash");
            spec.reveal = words[1] == "image" ? RevealPolicy::image : RevealPolicy::hash_only;
            have_reveal = true;
            continue;
        }

        TransformSpec t;
        if (head == "crop") {
            Args a(words, 1, line_no);
            CropParams p;
            p.x = static_cast<uint32_t>(a.take_int("x"));
            p.y = static_cast<uint32_t>(a.take_int("y"));
            p.w = static_cast<uint32_t>(a.take_int("w"));
            p.h = static_cast<uint32_t>(a.take_int("h"));
            a.finish();
            t = {TransformKind::crop, p};
        } else if (head == "rotate") {
            Args a(words, 1, line_no);
            RotateParams p{static_cast<uint32_t>(a.take_int("angle"))};
            a.finish();
            t = {TransformKind::rotate, p};
        } else if (head == "flip") {
            if (words.size() != 2 || (words[1] != "axis=x" && words[1] != "axis=y"))
                parse_fail(line_no, "usage: flip axis=x|y");
            t = {TransformKind::flip, FlipParams{words[1] == "axis=x" ? FlipAxis::x : FlipAxis::y}};
        } else if (head == "translate") {
            Args a(words, 1, line_no);
            TranslateParams p;
            p.dx = static_cast<int32_t>(a.take_int("dx"));
            p.dy = static_cast<int32_t>(a.take_int("dy"));
            a.finish();
            t = {TransformKind::translate, p};
        } else if (head == "resize") {
            Args a(words, 1, line_no);
            ResizeParams p;
            p.w = static_cast<uint32_t>(a.take_int("w"));
            p.h = static_cast<uint32_t>(a.take_int("h"));
            a.finish();
            t = {TransformKind::resize, p};
        } else if (head == "censor") {
            CensorParams p;
            size_t i = 1;
            while (i < words.size()) {
                bool oval = words[i] == "oval";
                if (!oval && words[i] != "rect")
                    parse_fail(line_no, "censor region must be 'rect' or 'oval'");
                size_t end = i + 1;
                while (end < words.size() && words[end] != "rect" && words[end] != "oval") ++end;
                std::vector<std::string> span(words.begin() + static_cast<ptrdiff_t>(i) + 1,
                                              words.begin() + static_cast<ptrdiff_t>(end));
                Args a(span, 0, line_no);
                CensorRegion r;
                r.oval = oval;
                if (oval) {
                    r.a = a.take_int("cx");
                    r.b = a.take_int("cy");
                    r.c = a.take_int("rx");
                    r.d = a.take_int("ry");
                } else {
                    r.a = a.take_int("x");
                    r.b = a.take_int("y");
                    r.c = a.take_int("w");
                    r.d = a.take_int("h");
                }
                a.finish();
                p.regions.push_back(r);
                i = end;
            }
            if (p.regions.empty()) parse_fail(line_no, "censor needs at least one region");
            t = {TransformKind::censor, p};
        } else if (head == "whitebalance") {
            Args a(words, 1, line_no);
            WhiteBalanceParams p;
            p.fr = a.take_double("fr");
            p.fg = a.take_double("fg");
            p.fb = a.take_double("fb");
            a.finish();
            t = {TransformKind::white_balance, p};
        } else if (head == "contrast") {
            Args a(words, 1, line_no);
            ContrastParams p{a.take_double("f")};
            a.finish();
            t = {TransformKind::contrast, p};
        } else if (head == "rgb2ycbcr" || head == "ycbcr2rgb" || head == "sharpen" ||
                   head == "blur") {
            if (words.size() != 1) parse_fail(line_no, "'" + head + "' takes no parameters");
            TransformKind k = head == "rgb2ycbcr"   ? TransformKind::rgb2ycbcr
                              : head == "ycbcr2rgb" ? TransformKind::ycbcr2rgb
                              : head == "sharpen"   ? TransformKind::sharpen
                                                    : TransformKind::blur;
            t = {k, std::monostate{}};
        } else {
            parse_fail(line_no, "unknown transform '" + head + "'");
        }
        spec.transforms.push_back(std::move(t));
    }

    if (!have_source) fail(Errc::parse_error, "missing 'source WxH' header");
    if (!have_reveal) fail(Errc::parse_error, "missing 'reveal image|hash' footer");
    if (spec.transforms.empty()) fail(Errc::empty_pipeline, "pipeline has no transforms");
    spec.dim_trace();  // validates, throws DimensionMismatch naming the transform
    return spec;
}

inline std::string to_text(const TransformSpec& t) {
    using pipeline_text::format_double;
    std::string s = transform_kind_name(t.kind);
    switch (t.kind) {
        case TransformKind::crop: {
            const auto& p = t.as<CropParams>();
            s += " x=" + std::to_string(p.x) + " y=" + std::to_string(p.y) +
                 " w=" + std::to_string(p.w) + " h=" + std::to_string(p.h);
            break;
        }
        case TransformKind::rotate:
            s += " angle=" + std::to_string(t.as<RotateParams>().angle);
            break;
        case TransformKind::flip:
            s += std::string(" axis=") + (t.as<FlipParams>().axis == FlipAxis::x ? "x" : "y");
            break;
        case TransformKind::translate: {
            const auto& p = t.as<TranslateParams>();
            s += " dx=" + std::to_string(p.dx) + " dy=" + std::to_string(p.dy);
            break;
        }
        case TransformKind::resize: {
            const auto& p = t.as<ResizeParams>();
            s += " w=" + std::to_string(p.w) + " h=" + std::to_string(p.h);
            break;
        }
        case TransformKind::censor:
            for (const auto& r : t.as<CensorParams>().regions) {
                if (r.oval)
                    s += " oval cx=" + std::to_string(r.a) + " cy=" + std::to_string(r.b) +
                         " rx=" + std::to_string(r.c) + " ry=" + std::to_string(r.d);
                else
                    s += " rect x=" + std::to_string(r.a) + " y=" + std::to_string(r.b) +
                         " w=" + std::to_string(r.c) + " h=" + std::to_string(r.d);
            }
            break;
        case TransformKind::white_balance: {
            const auto& p = t.as<WhiteBalanceParams>();
            s += " fr=" + format_double(p.fr) + " fg=" + format_double(p.fg) +
                 " fb=" + format_double(p.fb);
            break;
        }
        case TransformKind::contrast:
            s += " f=" + format_double(t.as<ContrastParams>().f);
            break;
        default:
            break;
    }
    return s;
}

inline std::string to_text(const PipelineSpec& p) {
    std::string s = "source " + std::to_string(p.source.w) + "x" + std::to_string(p.source.h) + "\n";
    for (const auto& t : p.transforms) s += to_text(t) + "\n";
    s += p.reveal == RevealPolicy::image ? "reveal image\n" : "reveal hash\n";
    return s;
}

// ---- cost model ---------------------------------------------------------------

struct CommitmentModes {
    bool hash_input = true;
    bool hash_output = true;
};

struct CostModelConfig {
    uint64_t blinding_rows = 6;
    // estimated_peak_memory = estimated_cells * bytes_per_cell * multiplier;
    // the multiplier approximates prover-side overhead per witness cell.
    uint64_t bytes_per_cell = 32;
    uint64_t cell_multiplier = 4;
    uint32_t column_budget = 64;  // advice columns available for lane packing
};

struct CostEstimate {
    uint64_t useful_rows = 0;
    uint64_t padded_rows = 1;
    uint32_t advice_columns = 0;
    uint32_t fixed_columns = 0;  // includes selectors (one per gate) and tables
    uint32_t instance_columns = 0;
    uint32_t lookup_count = 0;
    uint32_t gate_count = 0;
    uint64_t estimated_cells = 0;
    uint64_t estimated_peak_memory = 0;
    uint64_t hash_rows = 0;       // sponge rows
    uint64_t transform_rows = 0;  // widest arithmetic stage strip
    uint32_t lanes = 1;

    uint64_t total_columns() const {
        return uint64_t(advice_columns) + fixed_columns + instance_columns;
    }
};

// One operation per row vs. k different per-pixel replicas per row: the
// maximum replication that stays under the advice-column budget.
inline uint32_t row_pack_max_lanes(uint32_t base_advice, uint32_t per_lane_advice,
                                   uint32_t column_budget) {
    if (per_lane_advice == 0) return 1;
    uint32_t k = 1;
    while (true) {
        uint32_t next = k == 1 ? 3 : k + 3;
        if (base_advice + uint64_t(next) * per_lane_advice > column_budget) break;
        k = next;
    }
    return k;
}

inline uint64_t rows_needed(uint64_t pixel_ops, uint32_t lanes) {
    return (pixel_ops + lanes - 1) / lanes;
}

// Mirrors synthesis column/row/lookup accounting; kept in lockstep by tests
// that compare against compiled layouts.
inline CostEstimate estimate_cost(std::span<const TransformSpec> transforms, Dims in_dims,
                                  CommitmentModes modes, const CostModelConfig& cfg,
                                  uint32_t lanes) {
    CostEstimate e;
    e.lanes = lanes;

    std::set<std::string> tables;
    uint64_t max_table_entries = 0;
    auto add_table = [&](const std::string& key, uint32_t cols, uint64_t entries) {
        if (tables.insert(key).second) {
            e.fixed_columns += cols;
            max_table_entries = std::max(max_table_entries, entries);
        }
    };
    auto add_gates = [&](uint32_t n) {
        e.gate_count += n;
        e.fixed_columns += n;  // dedicated selector column per gate
    };

    uint64_t n_in = uint64_t(in_dims.w) * in_dims.h * 3;
    uint64_t strip_rows = n_in;  // input byte strip
    e.advice_columns += 1;
    e.lookup_count += 1;
    add_table("range8", 1, 256);
    e.fixed_columns += 1;  // shared constant column

    int shaped = 1;  // input grid is a width-1 strip
    Dims dims = in_dims;
    auto lut_key = [](const std::array<uint8_t, 256>& m) {
        std::string k = "lut:";
        for (uint8_t v : m) k += char('a' + (v >> 4)), k += char('a' + (v & 0xf));
        return k;
    };

    for (const TransformSpec& t : transforms) {
        uint64_t n = uint64_t(dims.w) * dims.h * 3;
        switch (t.kind) {
            case TransformKind::crop:
            case TransformKind::rotate:
            case TransformKind::flip:
            case TransformKind::translate:
            case TransformKind::resize:
            case TransformKind::censor:
                shaped = -1;
                break;
            case TransformKind::contrast:
            case TransformKind::white_balance: {
                std::array<std::array<uint8_t, 256>, 3> maps{};
                if (t.kind == TransformKind::contrast) {
                    auto m = contrast_map(t.as<ContrastParams>().f);
                    maps = {m, m, m};
                } else {
                    const auto& p = t.as<WhiteBalanceParams>();
                    maps = {white_balance_map(p.fr), white_balance_map(p.fg),
                            white_balance_map(p.fb)};
                }
                bool uniform = maps[0] == maps[1] && maps[1] == maps[2];
                if (shaped != int(lanes)) e.advice_columns += lanes;  // materialize
                e.advice_columns += lanes;                            // output strip
                std::set<std::string> uniq;
                for (const auto& m : maps) uniq.insert(lut_key(m));
                for (const auto& k : uniq) add_table(k, 2, 256);
                e.fixed_columns += (uniform || lanes > 1) ? 1 : 3;  // gating
                e.lookup_count += (uniform || lanes > 1) ? lanes : 3;
                uint64_t stage = rows_needed(n, lanes);
                strip_rows = std::max(strip_rows, stage);
                e.transform_rows = std::max(e.transform_rows, stage);
                shaped = int(lanes);
                break;
            }
            case TransformKind::rgb2ycbcr:
            case TransformKind::ycbcr2rgb: {
                const ColorMatrix& m = t.kind == TransformKind::rgb2ycbcr
                                           ? rgb_to_ycbcr_matrix()
                                           : ycbcr_to_rgb_matrix();
                if (shaped != int(lanes)) e.advice_columns += lanes;
                e.advice_columns += 4 * lanes;  // dot, quotient, remainder, out
                add_gates(1);
                add_table("rem" + std::to_string(fp_scale), 1, uint64_t(fp_scale));
                add_table("range16", 1, 65536);
                std::set<std::string> uniq;
                for (size_t c = 0; c < 3; ++c) {
                    auto p = synth_detail::channel_plan(m, c);
                    std::string key = "clamp:" + std::to_string(p.lo) + ":" + std::to_string(p.hi);
                    if (uniq.insert(key).second)
                        add_table(key, 2, uint64_t(p.hi - p.lo + 1));
                }
                e.fixed_columns += lanes == 1 ? 3 : 1;  // gating
                e.lookup_count += lanes == 1 ? 5 : 3 * lanes;
                uint64_t stage = rows_needed(n, lanes);
                strip_rows = std::max(strip_rows, stage);
                e.transform_rows = std::max(e.transform_rows, stage);
                shaped = int(lanes);
                break;
            }
            case TransformKind::sharpen:
            case TransformKind::blur: {
                const ConvKernel& k = conv_kernel(t.kind);
                bool divide = k.denom > 1;
                if (shaped != 1) e.advice_columns += 1;
                e.advice_columns += divide ? 4 : 2;
                std::set<std::string> sigs;
                for (auto [y0, y1] : synth_detail::border_classes(dims.h))
                    for (auto [x0, x1] : synth_detail::border_classes(dims.w)) {
                        (void)y1;
                        (void)x1;
                        sigs.insert(synth_detail::conv_poly_sig(
                            synth_detail::conv_region_poly(k, dims, x0, y0)));
                    }
                add_gates(static_cast<uint32_t>(sigs.size()) + (divide ? 1 : 0));
                int64_t acc_min = 0, acc_max = 0;
                for (const auto& row : k.k)
                    for (int64_t v : row) (v < 0 ? acc_min : acc_max) += v * 255;
                int64_t shift_k = acc_min < 0 ? (-acc_min + k.denom - 1) / k.denom : 0;
                int64_t offset = k.denom / 2 + shift_k * k.denom;
                int64_t qlo = floor_div(acc_min + offset, k.denom) - shift_k;
                int64_t qhi = floor_div(acc_max + offset, k.denom) - shift_k;
                add_table("clamp:" + std::to_string(qlo) + ":" + std::to_string(qhi), 2,
                          uint64_t(qhi - qlo + 1));
                e.fixed_columns += 1;  // gating
                e.lookup_count += 1;
                if (divide) {
                    add_table("rem" + std::to_string(k.denom), 1, uint64_t(k.denom));
                    unsigned qbits = (floor_div(acc_max + offset, k.denom)) < 256 ? 8 : 16;
                    add_table("range" + std::to_string(qbits), 1, uint64_t(1) << qbits);
                    e.lookup_count += 2;
                }
                strip_rows = std::max(strip_rows, n);
                e.transform_rows = std::max(e.transform_rows, n);
                shaped = 1;
                break;
            }
        }
        dims = out_dims(t, dims);
    }

    uint64_t n_out = uint64_t(dims.w) * dims.h * 3;
    uint64_t hash_rows = 0;
    bool any_hash = modes.hash_input || modes.hash_output;
    if (modes.hash_output && shaped != 1) {
        e.advice_columns += 1;  // materialize output for packing
        strip_rows = std::max(strip_rows, n_out);
    }
    if (modes.hash_input) {
        e.advice_columns += 1;  // packed elements
        add_gates(1 + (n_in % pack_chunk_bytes ? 1 : 0));
        hash_rows += hash_gadget_rows(packed_element_count(n_in));
    }
    if (modes.hash_output) {
        e.advice_columns += 1;
        add_gates(1 + (n_out % pack_chunk_bytes ? 1 : 0));
        hash_rows += hash_gadget_rows(packed_element_count(n_out));
        strip_rows = std::max(strip_rows, n_out);
    }
    if (any_hash) {
        e.advice_columns += 5;  // state lanes + absorb inputs
        e.fixed_columns += 3;   // round-constant columns
        add_gates(3);           // absorb, full round, partial round
        e.instance_columns = 1;
    }

    e.hash_rows = hash_rows;
    e.useful_rows = std::max({strip_rows, hash_rows, max_table_entries});
    e.padded_rows = padded_rows(e.useful_rows, max_table_entries, cfg.blinding_rows);
    e.estimated_cells = e.padded_rows * e.total_columns();
    e.estimated_peak_memory = e.estimated_cells * cfg.bytes_per_cell * cfg.cell_multiplier;
    return e;
}

// Lane search per the packing optimization: try one op per row and each
// admissible replication, keep the cheapest in estimated cells.
inline CostEstimate best_estimate(std::span<const TransformSpec> transforms, Dims in_dims,
                                  CommitmentModes modes, const CostModelConfig& cfg) {
    uint32_t max_lanes = row_pack_max_lanes(12, 5, cfg.column_budget);
    CostEstimate best = estimate_cost(transforms, in_dims, modes, cfg, 1);
    for (uint32_t k = 3; k <= max_lanes; k += 3) {
        CostEstimate e = estimate_cost(transforms, in_dims, modes, cfg, k);
        if (e.estimated_cells < best.estimated_cells) best = e;
    }
    return best;
}

// ---- segment planning -----------------------------------------------------------

struct MemoryLimit {
    uint64_t bytes = uint64_t(8) << 30;
};

struct PlannedSegment {
    uint32_t first = 0;  // index into the pipeline transform list
    uint32_t count = 0;
    Dims in_dims, out_dims;
    CostEstimate estimate;
};

// Greedy left-to-right packing: extend the current segment while the
// estimate (with both boundary hashes) fits the memory limit. Every cut pays
// one extra output-hash/input-hash pair.
inline std::vector<PlannedSegment> plan_segments(const PipelineSpec& p, MemoryLimit limit,
                                                 const CostModelConfig& cfg = {}) {
    auto dims = p.dim_trace();
    std::vector<PlannedSegment> out;
    uint32_t n = static_cast<uint32_t>(p.transforms.size());
    uint32_t i = 0;
    while (i < n) {
        uint32_t j = i + 1;
        CostEstimate est = best_estimate(std::span(p.transforms).subspan(i, 1), dims[i], {}, cfg);
        if (est.estimated_peak_memory > limit.bytes)
            fail(Errc::infeasible_limit,
                 "transform " + std::to_string(i + 1) + " (" +
                     transform_kind_name(p.transforms[i].kind) + ") needs " +
                     std::to_string(est.estimated_peak_memory) +
                     " bytes alone, over the limit of " + std::to_string(limit.bytes));
        while (j < n) {
            CostEstimate next =
                best_estimate(std::span(p.transforms).subspan(i, j - i + 1), dims[i], {}, cfg);
            if (next.estimated_peak_memory > limit.bytes) break;
            est = next;
            ++j;
        }
        out.push_back({i, j - i, dims[i], dims[j], est});
        i = j;
    }
    return out;
}

}  // namespace zkimg
