#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "zkimg/chain.hpp"

namespace zkimg::cli {

// Exit code contract: 0 ok, 1 verification rejection, 2 input error,
// 3 infeasible plan, 4 internal inconsistency.
inline constexpr int exit_ok = 0;
inline constexpr int exit_rejected = 1;
inline constexpr int exit_input = 2;
inline constexpr int exit_infeasible = 3;
inline constexpr int exit_internal = 4;

struct GlobalConfig {
    uint64_t mem_limit = uint64_t(8) << 30;  // --mem-limit
    uint64_t blinding_rows = 6;              // --blinding-rows
    unsigned threads = 0;                    // --threads; 0 = default
};

inline unsigned default_threads() {
    if (const char* env = std::getenv("ZKIMG_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

inline unsigned effective_threads(const GlobalConfig& cfg) {
    return cfg.threads ? cfg.threads : default_threads();
}

namespace detail {

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec))
        fail(Errc::io_error, "'" + path + "' is a directory");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open '" + path + "' for reading");
    try {
        std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
        if (in.bad()) fail(Errc::io_error, "read error on '" + path + "'");
        return bytes;
    } catch (const std::ios_base::failure& e) {
        fail(Errc::io_error, "read error on '" + path + "': " + e.what());
    }
}

inline void write_file(const std::string& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::io_error, "write error on '" + path + "'");
}

inline int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::infeasible_limit: return exit_infeasible;
        case Errc::internal: return exit_internal;
        default: return exit_input;
    }
}

inline RunOptions run_options(const GlobalConfig& cfg) {
    RunOptions opt;
    opt.limit = {cfg.mem_limit};
    opt.cost.blinding_rows = cfg.blinding_rows;
    opt.threads = effective_threads(cfg);
    return opt;
}

inline std::string reveal_name(RevealPolicy r) {
    return r == RevealPolicy::image ? "image" : "hash";
}

}  // namespace detail

// ---- plan -------------------------------------------------------------------

inline int cmd_plan(const std::string& pipeline_path, bool json, const GlobalConfig& cfg,
                    std::ostream& out, std::ostream& err) {
    try {
        auto text = detail::read_file(pipeline_path);
        PipelineSpec p = parse_pipeline(std::string_view(
            reinterpret_cast<const char*>(text.data()), text.size()));
        CostModelConfig cost;
        cost.blinding_rows = cfg.blinding_rows;
        auto segments = plan_segments(p, {cfg.mem_limit}, cost);

        if (json) {
            nlohmann::json j;
            j["source"] = {{"width", p.source.w}, {"height", p.source.h}};
            j["reveal"] = detail::reveal_name(p.reveal);
            j["mem_limit"] = cfg.mem_limit;
            j["segments"] = nlohmann::json::array();
            for (const auto& s : segments) {
                nlohmann::json seg;
                seg["transforms"] = nlohmann::json::array();
                for (uint32_t i = s.first; i < s.first + s.count; ++i)
                    seg["transforms"].push_back(to_text(p.transforms[i]));
                seg["in"] = {{"width", s.in_dims.w}, {"height", s.in_dims.h}};
                seg["out"] = {{"width", s.out_dims.w}, {"height", s.out_dims.h}};
                seg["lanes"] = s.estimate.lanes;
                seg["useful_rows"] = s.estimate.useful_rows;
                seg["padded_rows"] = s.estimate.padded_rows;
                seg["advice_columns"] = s.estimate.advice_columns;
                seg["fixed_columns"] = s.estimate.fixed_columns;
                seg["lookups"] = s.estimate.lookup_count;
                seg["gates"] = s.estimate.gate_count;
                seg["estimated_cells"] = s.estimate.estimated_cells;
                seg["estimated_peak_bytes"] = s.estimate.estimated_peak_memory;
                j["segments"].push_back(std::move(seg));
            }
            out << j.dump(2) << "\n";
        } else {
            out << "pipeline: " << p.transforms.size() << " transform(s), source " << p.source.w
                << "x" << p.source.h << ", reveal " << detail::reveal_name(p.reveal) << "\n";
            out << "plan: " << segments.size() << " segment(s) under "
                << cfg.mem_limit << " bytes\n";
            for (size_t i = 0; i < segments.size(); ++i) {
                const auto& s = segments[i];
                out << "segment " << i << ": transforms " << s.first + 1 << ".."
                    << s.first + s.count << " (" << s.in_dims.w << "x" << s.in_dims.h << " -> "
                    << s.out_dims.w << "x" << s.out_dims.h << ")\n";
                out << "  rows " << s.estimate.useful_rows << " padded "
                    << s.estimate.padded_rows << ", columns "
                    << s.estimate.total_columns() << " (advice " << s.estimate.advice_columns
                    << ", fixed " << s.estimate.fixed_columns << "), lanes " << s.estimate.lanes
                    << "\n";
                out << "  estimated cells " << s.estimate.estimated_cells << ", estimated peak "
                    << s.estimate.estimated_peak_memory << " bytes\n";
            }
        }
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return detail::exit_code_for(e);
    }
}

// ---- prove ------------------------------------------------------------------

inline int cmd_prove(const std::string& pipeline_path, const std::string& image_path,
                     const std::string& bundle_path, const GlobalConfig& cfg, std::ostream& out,
                     std::ostream& err) {
    try {
        auto text = detail::read_file(pipeline_path);
        PipelineSpec p = parse_pipeline(std::string_view(
            reinterpret_cast<const char*>(text.data()), text.size()));
        Image img = load_ppm(detail::read_file(image_path));

        auto result = run_pipeline(img, p, detail::run_options(cfg));

        out << "source digest " << result.bundle.source_digest.to_hex() << "\n";
        for (size_t i = 0; i < result.summaries.size(); ++i) {
            const auto& s = result.summaries[i];
            out << "segment " << i << ": transforms " << s.first + 1 << ".." << s.first + s.count
                << ", rows " << s.rows << ", columns " << s.columns << ", lanes " << s.lanes
                << "\n";
            out << "  h_in  " << s.h_in.to_hex() << "\n";
            out << "  h_out " << s.h_out.to_hex() << "\n";
            out << "  witness " << std::fixed << std::setprecision(1) << s.build_ms
                << " ms, check " << s.check_ms << " ms\n";
        }

        auto bytes = bundle_io::encode(result.bundle);
        detail::write_file(bundle_path, bytes);
        out << "bundle written to " << bundle_path << " (" << bytes.size() << " bytes, "
            << result.bundle.segments.size() << " segment(s))\n";
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return detail::exit_code_for(e);
    }
}

// ---- verify -----------------------------------------------------------------

inline int cmd_verify(const std::string& bundle_path, const std::string& expect_source_hex,
                      const GlobalConfig&, std::ostream& out, std::ostream& err) {
    try {
        ChainBundle bundle = bundle_io::decode(detail::read_file(bundle_path));

        if (!expect_source_hex.empty()) {
            if (expect_source_hex.size() != 64)
                fail(Errc::invalid_params, "--expect-source wants 64 hex chars");
            std::array<uint8_t, 32> raw{};
            auto nib = [&](char c) -> uint8_t {
                if (c >= '0' && c <= '9') return uint8_t(c - '0');
                if (c >= 'a' && c <= 'f') return uint8_t(c - 'a' + 10);
                if (c >= 'A' && c <= 'F') return uint8_t(c - 'A' + 10);
                fail(Errc::invalid_params, "bad hex digit in --expect-source");
            };
            for (size_t i = 0; i < 32; ++i)
                raw[i] = static_cast<uint8_t>(nib(expect_source_hex[2 * i]) << 4 |
                                              nib(expect_source_hex[2 * i + 1]));
            auto expect = Fe::from_bytes(raw);
            if (!expect) fail(Errc::invalid_params, "--expect-source is not a canonical digest");
            if (*expect != bundle.source_digest) {
                out << "rejected: bundle source digest " << bundle.source_digest.to_hex()
                    << " does not match the expected digest\n";
                return exit_rejected;
            }
        }

        SatisfactionReport report = verify_chain(bundle);
        if (!report.satisfied) {
            out << "rejected: " << report.summary() << "\n";
            return exit_rejected;
        }
        out << "accepted: " << bundle.segments.size() << " segment(s), source digest "
            << bundle.source_digest.to_hex() << ", final "
            << (bundle.final_image
                    ? std::to_string(bundle.final_image->width) + "x" +
                          std::to_string(bundle.final_image->height) + " image revealed"
                    : std::string("hash only"))
            << "\n";
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_input;
    }
}

// ---- hash -------------------------------------------------------------------

inline int cmd_hash(const std::string& image_path, std::ostream& out, std::ostream& err) {
    try {
        Image img = load_ppm(detail::read_file(image_path));
        out << hash_image(img).to_hex() << "\n";
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_input;
    }
}

// ---- apply (no-privacy baseline) ----------------------------------------------

inline int cmd_apply(const std::string& pipeline_path, const std::string& image_path,
                     const std::string& out_path, std::ostream& out, std::ostream& err) {
    try {
        auto text = detail::read_file(pipeline_path);
        PipelineSpec p = parse_pipeline(std::string_view(
            reinterpret_cast<const char*>(text.data()), text.size()));
        Image img = load_ppm(detail::read_file(image_path));
        if (img.width != p.source.w || img.height != p.source.h)
            fail(Errc::dimension_mismatch, "image does not match the pipeline source size");
        Image result = apply_native_chain(p.transforms, img);
        detail::write_file(out_path, save_ppm(result));
        out << "wrote " << result.width << "x" << result.height << " image to " << out_path
            << "\n";
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_input;
    }
}

// ---- bench ------------------------------------------------------------------

inline std::optional<TransformSpec> bench_transform(const std::string& name, Dims d) {
    if (name == "crop")
        return TransformSpec{TransformKind::crop,
                             CropParams{d.w / 8, d.h / 8, std::max(1u, d.w / 2),
                                        std::max(1u, d.h / 2)}};
    if (name == "rotate") return TransformSpec{TransformKind::rotate, RotateParams{90}};
    if (name == "flip") return TransformSpec{TransformKind::flip, FlipParams{FlipAxis::x}};
    if (name == "translate")
        return TransformSpec{TransformKind::translate,
                             TranslateParams{int32_t(d.w / 4), int32_t(d.h / 4)}};
    if (name == "resize")
        return TransformSpec{TransformKind::resize,
                             ResizeParams{std::max(1u, d.w / 2), std::max(1u, d.h / 2)}};
    if (name == "censor")
        return TransformSpec{
            TransformKind::censor,
            CensorParams{{CensorRegion{false, d.w / 4, d.h / 4, std::max<int64_t>(1, d.w / 2),
                                       std::max<int64_t>(1, d.h / 2)}}}};
    if (name == "rgb2ycbcr") return TransformSpec{TransformKind::rgb2ycbcr, std::monostate{}};
    if (name == "ycbcr2rgb") return TransformSpec{TransformKind::ycbcr2rgb, std::monostate{}};
    if (name == "whitebalance")
        return TransformSpec{TransformKind::white_balance, WhiteBalanceParams{1.1, 1.0, 0.9}};
    if (name == "contrast") return TransformSpec{TransformKind::contrast, ContrastParams{1.5}};
    if (name == "sharpen") return TransformSpec{TransformKind::sharpen, std::monostate{}};
    if (name == "blur") return TransformSpec{TransformKind::blur, std::monostate{}};
    return std::nullopt;
}

// One CSV row for a single-transform segment with both boundary hashes: the
// constraint counts are the portable performance proxy; wall times depend on
// the host.
inline int cmd_bench(const std::string& name, const std::string& size, const GlobalConfig& cfg,
                     std::ostream& out, std::ostream& err) {
    try {
        auto parse_dim = [&](std::string_view s) -> uint32_t {
            uint32_t v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size() || v == 0)
                fail(Errc::invalid_params, "size must be WxH, e.g. 64x48");
            return v;
        };
        size_t x = size.find('x');
        if (x == std::string::npos)
            fail(Errc::invalid_params, "size must be WxH, e.g. 64x48");
        Dims d{parse_dim(std::string_view(size).substr(0, x)),
               parse_dim(std::string_view(size).substr(x + 1))};
        auto t = bench_transform(name, d);
        if (!t) fail(Errc::invalid_params, "unknown transform '" + name + "'");

        std::mt19937_64 rng(0xbe5c ^ (uint64_t(d.w) << 20) ^ d.h);
        Image img = Image::filled(d.w, d.h);
        for (auto& b : img.data) b = static_cast<uint8_t>(rng());

        CostModelConfig cost;
        cost.blinding_rows = cfg.blinding_rows;
        CostEstimate est = best_estimate({&*t, 1}, d, {}, cost);

        using clock = std::chrono::steady_clock;
        BuildOptions bopt;
        bopt.lanes = est.lanes;
        bopt.blinding_rows = cfg.blinding_rows;
        bopt.threads = effective_threads(cfg);
        auto t0 = clock::now();
        BuiltSegment seg = build_segment_unchecked({&*t, 1}, img, bopt);
        auto t1 = clock::now();
        auto report = check_constraints(seg.layout, seg.witness, seg.instance,
                                        {effective_threads(cfg)});
        auto t2 = clock::now();
        if (!report.satisfied)
            fail(Errc::internal, "bench circuit unsatisfied: " + report.summary());

        double witness_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        double check_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
        double ratio = est.transform_rows
                           ? double(est.hash_rows) / double(est.transform_rows)
                           : 0.0;

        out << "name,width,height,lanes,useful_rows,padded_rows,advice_columns,fixed_columns,"
               "gates,lookups,estimated_cells,estimated_peak_bytes,hash_rows,transform_rows,"
               "hash_transform_ratio,witness_ms,check_ms\n";
        out << name << "," << d.w << "," << d.h << "," << est.lanes << "," << seg.layout.used_rows
            << "," << seg.layout.rows << ","
            << seg.layout.count_columns(ColumnKind::advice) << ","
            << seg.layout.count_columns(ColumnKind::fixed) +
                   seg.layout.count_columns(ColumnKind::selector)
            << "," << seg.layout.gates.size() << "," << seg.layout.lookups.size() << ","
            << est.estimated_cells << "," << est.estimated_peak_memory << "," << est.hash_rows
            << "," << est.transform_rows << "," << std::fixed << std::setprecision(3) << ratio
            << "," << std::setprecision(2) << witness_ms << "," << check_ms << "\n";
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return detail::exit_code_for(e);
    }
}

// ---- dump (bundle debug JSON) ---------------------------------------------------

inline int cmd_dump(const std::string& bundle_path, std::ostream& out, std::ostream& err) {
    try {
        ChainBundle b = bundle_io::decode(detail::read_file(bundle_path));
        nlohmann::json j;
        j["source_digest"] = b.source_digest.to_hex();
        j["reveal"] = detail::reveal_name(b.reveal);
        j["segments"] = nlohmann::json::array();
        for (const auto& s : b.segments) {
            CircuitLayout layout = layout_io::decode(s.layout_bytes);
            nlohmann::json seg;
            seg["rows"] = layout.rows;
            seg["columns"] = layout.columns.size();
            seg["gates"] = layout.gates.size();
            seg["lookups"] = layout.lookups.size();
            seg["copy_classes"] = layout.copy_classes.size();
            seg["satisfied"] = s.report.satisfied;
            seg["instance"] = nlohmann::json::array();
            for (const Fe& f : s.instance) seg["instance"].push_back(f.to_hex());
            j["segments"].push_back(std::move(seg));
        }
        if (b.final_image) {
            j["final_image"] = {{"width", b.final_image->width},
                                {"height", b.final_image->height}};
        }
        out << j.dump(2) << "\n";
        return exit_ok;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_input;
    }
}

}  // namespace zkimg::cli
