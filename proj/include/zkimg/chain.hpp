#pragma once

#include <chrono>

#include "zkimg/layout_io.hpp"
#include "zkimg/pipeline.hpp"

namespace zkimg {

// One compiled pipeline segment: the circuit proves that an image hashing to
// instance[0] transforms into one hashing to instance[1].
struct BuiltSegment {
    CircuitLayout layout;
    WitnessGrid witness;
    std::vector<Fe> instance;  // [h_in, h_out]
    Image output;
    SatisfactionReport report;
};

struct BuildOptions {
    uint32_t lanes = 1;
    uint32_t max_degree = 9;
    uint64_t blinding_rows = 6;
    unsigned threads = 1;
};

// Synthesis and witness generation only; the caller decides when to check.
inline BuiltSegment build_segment_unchecked(std::span<const TransformSpec> transforms,
                                            const Image& input, const BuildOptions& opt = {}) {
    CircuitBuilder cb(opt.max_degree, opt.blinding_rows);
    Synth synth(cb);

    StageData stage = make_input_stage(synth, input);
    std::vector<CellRef> in_elems = bulk_pack(synth, stage.grid);
    CellRef h_in = hash_gadget(synth, in_elems);

    for (const TransformSpec& t : transforms)
        stage = synth_transform(synth, t, stage, SynthOptions{opt.lanes});

    PixelGrid out_strip = ensure_width1(synth, stage);
    std::vector<CellRef> out_elems = bulk_pack(synth, out_strip);
    CellRef h_out = hash_gadget(synth, out_elems);

    Column inst = cb.add_column(ColumnKind::instance);
    cb.expose_instance({inst.index, 0});
    cb.expose_instance({inst.index, 1});
    cb.add_copy(h_in, {inst.index, 0});
    cb.add_copy(h_out, {inst.index, 1});

    BuiltSegment seg;
    seg.layout = synth.finalize_layout();
    seg.witness = synth.freeze_witness(seg.layout);
    seg.instance = {hash_image(input), hash_image(stage.image)};
    seg.output = std::move(stage.image);
    return seg;
}

inline BuiltSegment build_segment(std::span<const TransformSpec> transforms, const Image& input,
                                  const BuildOptions& opt = {}) {
    BuiltSegment seg = build_segment_unchecked(transforms, input, opt);
    seg.report = check_constraints(seg.layout, seg.witness, seg.instance, {opt.threads});
    return seg;
}

// ---- chain bundle -----------------------------------------------------------------

// The publishable artifact: per-segment verification keys (layouts), public
// digests, and satisfaction reports, plus the revealed final image when the
// policy allows. Intermediate images never appear here.
struct SegmentRecord {
    std::vector<uint8_t> layout_bytes;
    std::vector<Fe> instance;
    SatisfactionReport report;
};

struct ChainBundle {
    Fe source_digest;  // the digest an attested camera would have signed
    RevealPolicy reveal = RevealPolicy::image;
    std::vector<SegmentRecord> segments;
    std::optional<Image> final_image;
};

namespace bundle_io {

inline constexpr uint32_t magic = 0x474d495a;  // "ZIMG"
inline constexpr uint16_t version = 1;

inline void write_report(ByteWriter& w, const SatisfactionReport& r) {
    w.u8(r.satisfied ? 1 : 0);
    w.u64(r.total_violations);
    w.u32(static_cast<uint32_t>(r.violations.size()));
    for (const Violation& v : r.violations) {
        w.u8(static_cast<uint8_t>(v.kind));
        w.u32(v.index);
        w.u64(v.row);
        w.str(v.detail);
    }
}

inline SatisfactionReport read_report(ByteReader& r) {
    SatisfactionReport out;
    out.satisfied = r.u8() != 0;
    out.total_violations = r.u64();
    uint32_t n = r.u32();
    if (n > SatisfactionReport::max_recorded) fail(Errc::malformed_bundle, "oversized report");
    for (uint32_t i = 0; i < n; ++i) {
        Violation v;
        uint8_t kind = r.u8();
        if (kind > 3) fail(Errc::malformed_bundle, "bad violation kind");
        v.kind = static_cast<Violation::Kind>(kind);
        v.index = r.u32();
        v.row = r.u64();
        v.detail = r.str();
        out.violations.push_back(std::move(v));
    }
    if (out.satisfied != (out.total_violations == 0))
        fail(Errc::malformed_bundle, "inconsistent report");
    return out;
}

inline std::vector<uint8_t> encode(const ChainBundle& b) {
    ByteWriter w;
    w.u32(magic);
    w.u16(version);
    w.fe(b.source_digest);
    w.u8(static_cast<uint8_t>(b.reveal));
    w.u32(static_cast<uint32_t>(b.segments.size()));
    for (const SegmentRecord& s : b.segments) {
        w.u64(s.layout_bytes.size());
        w.bytes(s.layout_bytes);
        w.u32(static_cast<uint32_t>(s.instance.size()));
        for (const Fe& f : s.instance) w.fe(f);
        write_report(w, s.report);
    }
    w.u8(b.final_image.has_value() ? 1 : 0);
    if (b.final_image) {
        w.u32(b.final_image->width);
        w.u32(b.final_image->height);
        w.bytes(b.final_image->data);
    }
    return std::move(w).take();
}

inline ChainBundle decode(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.u32() != magic) fail(Errc::malformed_bundle, "bad bundle magic");
    if (r.u16() != version) fail(Errc::malformed_bundle, "unsupported bundle version");
    ChainBundle b;
    b.source_digest = r.fe();
    uint8_t reveal = r.u8();
    if (reveal > 1) fail(Errc::malformed_bundle, "bad reveal policy");
    b.reveal = static_cast<RevealPolicy>(reveal);
    uint32_t nseg = r.u32();
    if (nseg == 0) fail(Errc::malformed_bundle, "bundle has no segments");
    for (uint32_t i = 0; i < nseg; ++i) {
        SegmentRecord s;
        uint64_t len = r.u64();
        auto blob = r.take(len);
        s.layout_bytes.assign(blob.begin(), blob.end());
        layout_io::decode(s.layout_bytes);  // must parse as a layout
        uint32_t ninst = r.u32();
        for (uint32_t j = 0; j < ninst; ++j) s.instance.push_back(r.fe());
        s.report = read_report(r);
        b.segments.push_back(std::move(s));
    }
    if (r.u8()) {
        Image img;
        img.width = r.u32();
        img.height = r.u32();
        if (img.width == 0 || img.height == 0 ||
            uint64_t(img.width) * img.height * 3 > (uint64_t(1) << 33))
            fail(Errc::malformed_bundle, "bad final image dimensions");
        auto payload = r.take(size_t(img.width) * img.height * 3);
        img.data.assign(payload.begin(), payload.end());
        b.final_image = std::move(img);
    }
    if (!r.done()) fail(Errc::malformed_bundle, "trailing bytes after bundle");
    return b;
}

}  // namespace bundle_io

// Chain acceptance: stored per-segment reports stand in for proof
// verification; digests must link pairwise, anchor at the claimed source,
// and match the revealed image when present.
inline SatisfactionReport verify_chain(const ChainBundle& b) {
    SatisfactionReport report;
    auto reject = [&](uint32_t index, const std::string& why) {
        report.add({Violation::Kind::instance, index, 0, why});
    };

    for (uint32_t i = 0; i < b.segments.size(); ++i) {
        const SegmentRecord& s = b.segments[i];
        if (!s.report.satisfied)
            reject(i, "segment " + std::to_string(i) + " constraint report is unsatisfied");
        if (s.instance.size() != 2)
            reject(i, "segment " + std::to_string(i) + " must expose [h_in, h_out]");
    }
    if (report.satisfied) {
        if (b.segments.front().instance[0] != b.source_digest)
            reject(0, "segment 0 input digest does not match the claimed source digest");
        for (uint32_t i = 0; i + 1 < b.segments.size(); ++i) {
            if (b.segments[i].instance[1] != b.segments[i + 1].instance[0])
                reject(i + 1, "digest linkage broken between segments " + std::to_string(i) +
                                  " and " + std::to_string(i + 1));
        }
        if (b.reveal == RevealPolicy::image) {
            if (!b.final_image) {
                reject(static_cast<uint32_t>(b.segments.size()) - 1,
                       "reveal policy is image but no image is attached");
            } else if (hash_image(*b.final_image) != b.segments.back().instance[1]) {
                reject(static_cast<uint32_t>(b.segments.size()) - 1,
                       "revealed final image does not hash to the last output digest");
            }
        } else if (b.final_image) {
            reject(static_cast<uint32_t>(b.segments.size()) - 1,
                   "reveal policy is hash-only but an image is attached");
        }
    }
    return report;
}

// ---- end-to-end -----------------------------------------------------------------

struct SegmentSummary {
    uint32_t first = 0, count = 0;
    uint64_t rows = 0, columns = 0;
    uint32_t lanes = 1;
    Fe h_in, h_out;
    uint64_t estimated_peak = 0;
    double build_ms = 0, check_ms = 0;
};

struct PipelineResult {
    ChainBundle bundle;
    std::vector<SegmentSummary> summaries;
};

struct RunOptions {
    MemoryLimit limit;
    CostModelConfig cost;
    uint32_t max_degree = 9;
    unsigned threads = 1;
};

inline PipelineResult run_pipeline(const Image& img, const PipelineSpec& p,
                                   const RunOptions& opt = {}) {
    if (img.width != p.source.w || img.height != p.source.h)
        fail(Errc::dimension_mismatch,
             "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                 " but the pipeline expects " + std::to_string(p.source.w) + "x" +
                 std::to_string(p.source.h));

    auto planned = plan_segments(p, opt.limit, opt.cost);

    PipelineResult result;
    result.bundle.source_digest = hash_image(img);
    result.bundle.reveal = p.reveal;

    Image current = img;
    for (const PlannedSegment& ps : planned) {
        using clock = std::chrono::steady_clock;
        auto t0 = clock::now();
        BuildOptions bopt;
        bopt.lanes = ps.estimate.lanes;
        bopt.blinding_rows = opt.cost.blinding_rows;
        bopt.max_degree = opt.max_degree;
        bopt.threads = opt.threads;
        BuiltSegment seg = build_segment_unchecked(
            std::span(p.transforms).subspan(ps.first, ps.count), current, bopt);
        auto t1 = clock::now();
        seg.report = check_constraints(seg.layout, seg.witness, seg.instance, {opt.threads});

        if (!seg.report.satisfied)
            fail(Errc::internal, "segment starting at transform " + std::to_string(ps.first + 1) +
                                     " failed its own constraints: " + seg.report.summary());

        auto t2 = clock::now();
        SegmentSummary sum;
        sum.first = ps.first;
        sum.count = ps.count;
        sum.rows = seg.layout.rows;
        sum.columns = seg.layout.columns.size();
        sum.lanes = ps.estimate.lanes;
        sum.h_in = seg.instance[0];
        sum.h_out = seg.instance[1];
        sum.estimated_peak = ps.estimate.estimated_peak_memory;
        sum.build_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        sum.check_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();

        SegmentRecord rec;
        rec.layout_bytes = layout_io::encode(seg.layout);
        rec.instance = seg.instance;
        rec.report = seg.report;

        result.bundle.segments.push_back(std::move(rec));
        result.summaries.push_back(sum);
        current = std::move(seg.output);
    }

    if (p.reveal == RevealPolicy::image) result.bundle.final_image = std::move(current);
    return result;
}

}  // namespace zkimg
