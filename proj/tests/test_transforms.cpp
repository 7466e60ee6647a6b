#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "zkimg/checker.hpp"
#include "zkimg/transforms.hpp"
#include "zkimg/transforms_synth.hpp"

using namespace zkimg;

namespace {

Image random_image(uint32_t w, uint32_t h, uint64_t seed) {
    auto r = test::rng(seed);
    Image img = Image::filled(w, h);
    for (auto& b : img.data) b = static_cast<uint8_t>(r());
    return img;
}

TransformSpec crop(uint32_t x, uint32_t y, uint32_t w, uint32_t h) {
    return {TransformKind::crop, CropParams{x, y, w, h}};
}
TransformSpec rotate(uint32_t a) { return {TransformKind::rotate, RotateParams{a}}; }
TransformSpec flip(FlipAxis a) { return {TransformKind::flip, FlipParams{a}}; }
TransformSpec translate(int32_t dx, int32_t dy) {
    return {TransformKind::translate, TranslateParams{dx, dy}};
}
TransformSpec resize(uint32_t w, uint32_t h) { return {TransformKind::resize, ResizeParams{w, h}}; }
TransformSpec censor_rect(int64_t x, int64_t y, int64_t w, int64_t h) {
    return {TransformKind::censor, CensorParams{{CensorRegion{false, x, y, w, h}}}};
}
TransformSpec censor_oval(int64_t cx, int64_t cy, int64_t rx, int64_t ry) {
    return {TransformKind::censor, CensorParams{{CensorRegion{true, cx, cy, rx, ry}}}};
}
TransformSpec contrast(double f) { return {TransformKind::contrast, ContrastParams{f}}; }
TransformSpec white_balance(double r, double g, double b) {
    return {TransformKind::white_balance, WhiteBalanceParams{r, g, b}};
}
TransformSpec simple(TransformKind k) { return {k, std::monostate{}}; }

struct TransformRun {
    CircuitLayout layout;
    WitnessGrid witness;
    SatisfactionReport report;
    Image circuit_output;
    Image native_output;
    std::vector<CellRef> out_cells;
};

TransformRun run_transform(const TransformSpec& t, const Image& img, uint32_t lanes = 1) {
    CircuitBuilder cb(9, 6);
    Synth synth(cb);
    StageData in = make_input_stage(synth, img);
    StageData out = synth_transform(synth, t, in, SynthOptions{lanes});

    TransformRun run;
    run.layout = synth.finalize_layout();
    run.witness = synth.freeze_witness(run.layout);
    run.report = check_constraints(run.layout, run.witness, {});
    run.native_output = apply_native(t, img);
    run.out_cells = out.grid.cells;

    // read the output raster back out of the grid (cells may alias fixed
    // zero cells after censoring/translation)
    std::vector<std::vector<Fe>> fixed_cache(run.layout.columns.size());
    run.circuit_output = Image::filled(out.grid.w, out.grid.h);
    for (size_t i = 0; i < out.grid.cells.size(); ++i) {
        CellRef c = out.grid.cells[i];
        Fe v;
        if (run.layout.columns[c.col] == ColumnKind::advice) {
            v = run.witness.at(c);
        } else {
            if (fixed_cache[c.col].empty()) fixed_cache[c.col] = run.layout.expand_column<Fe>(c.col);
            v = fixed_cache[c.col][c.row];
        }
        run.circuit_output.data[i] = static_cast<uint8_t>(v.as_u64());
    }
    return run;
}

std::vector<TransformSpec> sample_specs(Dims d, uint64_t seed) {
    auto r = test::rng(seed);
    auto u = [&](uint32_t lo, uint32_t hi) { return lo + r() % (hi - lo + 1); };
    std::vector<TransformSpec> out;
    uint32_t cw = u(1, d.w - 1), ch = u(1, d.h - 1);
    out.push_back(crop(u(0, d.w - cw), u(0, d.h - ch), cw, ch));
    out.push_back(rotate(90 * u(1, 3)));
    out.push_back(flip(r() % 2 ? FlipAxis::x : FlipAxis::y));
    out.push_back(translate(int32_t(u(0, d.w)) - int32_t(d.w / 2),
                            int32_t(u(0, d.h)) - int32_t(d.h / 2)));
    out.push_back(resize(u(1, d.w * 2), u(1, d.h * 2)));
    if (r() % 2) {
        out.push_back(censor_rect(u(0, d.w / 2), u(0, d.h / 2), u(1, d.w / 2), u(1, d.h / 2)));
    } else {
        out.push_back(censor_oval(u(0, d.w - 1), u(0, d.h - 1), u(1, d.w / 2 + 1), u(1, d.h / 2 + 1)));
    }
    out.push_back(simple(TransformKind::rgb2ycbcr));
    out.push_back(simple(TransformKind::ycbcr2rgb));
    out.push_back(white_balance(0.25 * (r() % 8), 0.25 * (r() % 8), 0.25 * (r() % 8)));
    out.push_back(contrast(0.25 * (r() % 10)));
    out.push_back(simple(TransformKind::sharpen));
    out.push_back(simple(TransformKind::blur));
    return out;
}

}  // namespace

TEST_CASE("native: contrast") {
    Image img = random_image(8, 6, 1);
    SECTION("f = 1.0 is the identity") { CHECK(apply_native(contrast(1.0), img) == img); }
    SECTION("f = 2.0 worked examples") {
        auto m = contrast_map(2.0);
        CHECK(m[100] == 72);
        CHECK(m[200] == 255);
        CHECK(m[0] == 0);
    }
}

TEST_CASE("native: colorspace worked examples") {
    Image px = Image::filled(1, 1);
    auto set = [&](uint8_t r, uint8_t g, uint8_t b) {
        px.data = {r, g, b};
        return apply_native(simple(TransformKind::rgb2ycbcr), px).data;
    };
    CHECK(set(0, 0, 0) == std::vector<uint8_t>{0, 128, 128});
    CHECK(set(255, 255, 255) == std::vector<uint8_t>{255, 128, 128});
    // raw Cr at pure red is 255.5, rounds up to 256, clamps to 255
    CHECK(set(255, 0, 0)[2] == 255);
}

TEST_CASE("native: colorspace round trip error at most 2 per sub-pixel") {
    for (uint64_t seed = 0; seed < 4; ++seed) {
        Image img = random_image(32, 24, 100 + seed);
        Image rt = apply_native(simple(TransformKind::ycbcr2rgb),
                                apply_native(simple(TransformKind::rgb2ycbcr), img));
        for (size_t i = 0; i < img.data.size(); ++i) {
            int diff = std::abs(int(img.data[i]) - int(rt.data[i]));
            REQUIRE(diff <= 2);
        }
    }
}

TEST_CASE("native: blur and sharpen keep constant images unchanged") {
    Image img = Image::filled(9, 7, 93);
    CHECK(apply_native(simple(TransformKind::blur), img) == img);
    CHECK(apply_native(simple(TransformKind::sharpen), img) == img);
}

TEST_CASE("native: blur of a single white pixel on black") {
    Image img = Image::filled(5, 5, 0);
    for (uint32_t c = 0; c < 3; ++c) img.at(2, 2, c) = 255;
    Image out = apply_native(simple(TransformKind::blur), img);
    // gaussian kernel rows scaled by 255/16 with the +8 rounding bias
    std::vector<uint8_t> center_row, adjacent_row;
    for (uint32_t x = 0; x < 5; ++x) center_row.push_back(out.at(x, 2, 0));
    for (uint32_t x = 0; x < 5; ++x) adjacent_row.push_back(out.at(x, 1, 0));
    CHECK(center_row == std::vector<uint8_t>{0, 32, 64, 32, 0});
    CHECK(adjacent_row == std::vector<uint8_t>{0, 16, 32, 16, 0});
}

TEST_CASE("native: geometry index math") {
    Image img = random_image(16, 12, 2);
    SECTION("crop maps the origin to the rectangle corner") {
        Image out = apply_native(crop(10, 5, 6, 7), img);
        for (uint32_t c = 0; c < 3; ++c) {
            CHECK(out.at(0, 0, c) == img.at(10, 5, c));
            CHECK(out.at(5, 6, c) == img.at(15, 11, c));
        }
    }
    SECTION("identity crop copies the image") {
        CHECK(apply_native(crop(0, 0, 16, 12), img) == img);
    }
    SECTION("four quarter rotations compose to the identity") {
        Image r = img;
        for (int i = 0; i < 4; ++i) r = apply_native(rotate(90), r);
        CHECK(r == img);
    }
    SECTION("rotate 90 then 270 is the identity") {
        CHECK(apply_native(rotate(270), apply_native(rotate(90), img)) == img);
    }
    SECTION("flips are involutions") {
        for (FlipAxis a : {FlipAxis::x, FlipAxis::y})
            CHECK(apply_native(flip(a), apply_native(flip(a), img)) == img);
    }
    SECTION("translate fills vacated pixels with black") {
        Image out = apply_native(translate(3, 2), img);
        CHECK(out.at(0, 0, 0) == 0);
        CHECK(out.at(3, 2, 0) == img.at(0, 0, 0));
    }
    SECTION("resize to the same size is the identity") {
        CHECK(apply_native(resize(16, 12), img) == img);
    }
    SECTION("censored pixels are black, others untouched") {
        Image out = apply_native(censor_rect(4, 4, 3, 3), img);
        CHECK(out.at(5, 5, 1) == 0);
        CHECK(out.at(0, 0, 1) == img.at(0, 0, 1));
    }
}

TEST_CASE("parameter validation") {
    Dims d{16, 12};
    CHECK_THROWS_AS(out_dims(crop(10, 5, 7, 7), d), Error);
    CHECK_THROWS_AS(out_dims(resize(0, 4), d), Error);
    CHECK_THROWS_AS(out_dims(rotate(45), d), Error);
    CHECK_THROWS_AS(out_dims(censor_rect(14, 0, 4, 4), d), Error);
    CHECK_THROWS_AS(out_dims(TransformSpec{TransformKind::censor, CensorParams{}}, d), Error);
    CHECK_THROWS_AS(out_dims(contrast(-1.0), d), Error);
    CHECK(out_dims(rotate(90), d) == Dims{12, 16});
    CHECK(out_dims(crop(1, 2, 3, 4), d) == Dims{3, 4});
}

TEST_CASE("circuit equals native for every transform kind") {
    Dims d{16, 12};
    for (uint64_t seed = 0; seed < 3; ++seed) {
        Image img = random_image(d.w, d.h, 50 + seed);
        for (const TransformSpec& t : sample_specs(d, 900 + seed)) {
            TransformRun run = run_transform(t, img);
            INFO(transform_kind_name(t.kind) << " seed " << seed << ": " << run.report.summary());
            REQUIRE(run.report.satisfied);
            REQUIRE(run.circuit_output == run.native_output);
        }
    }
}

TEST_CASE("circuit equals native under lane packing") {
    Image img = random_image(10, 9, 77);
    for (uint32_t lanes : {1u, 3u, 6u}) {
        for (TransformSpec t : {contrast(1.7), white_balance(1.1, 1.0, 0.9),
                                simple(TransformKind::rgb2ycbcr), simple(TransformKind::ycbcr2rgb)}) {
            TransformRun run = run_transform(t, img, lanes);
            INFO(transform_kind_name(t.kind) << " lanes " << lanes << ": " << run.report.summary());
            REQUIRE(run.report.satisfied);
            REQUIRE(run.circuit_output == run.native_output);
        }
    }
}

TEST_CASE("pure-copy transforms add zero gates and zero lookups beyond input range checks") {
    Image img = random_image(12, 8, 5);
    for (TransformSpec t : {crop(2, 1, 8, 6), rotate(90), flip(FlipAxis::y), translate(-2, 3),
                            resize(6, 4), censor_rect(1, 1, 4, 4)}) {
        TransformRun run = run_transform(t, img);
        INFO(transform_kind_name(t.kind));
        CHECK(run.layout.gates.empty());
        CHECK(run.layout.lookups.size() == 1);  // the input byte range check
        CHECK(run.report.satisfied);
        CHECK(run.circuit_output == run.native_output);
    }
}

TEST_CASE("censored output cells are pinned to the public zero cell") {
    Image img = random_image(8, 8, 6);
    TransformSpec t = censor_rect(2, 2, 3, 3);

    CircuitBuilder cb(9, 6);
    Synth synth(cb);
    StageData in = make_input_stage(synth, img);
    StageData out = synth_transform(synth, t, in, {});
    PixelGrid strip = ensure_width1(synth, out);  // copies aliases into advice cells

    CircuitLayout layout = synth.finalize_layout();
    WitnessGrid w = synth.freeze_witness(layout);
    REQUIRE(check_constraints(layout, w, {}).satisfied);

    // pixel (3,3) is censored; its strip cell must hold zero and is copy-tied
    size_t idx = (size_t(3) * 8 + 3) * 3;
    CellRef cell = strip.cells[idx];
    REQUIRE(w.at(cell) == Fe::zero());
    w.set(cell, Fe::from_u64(7));
    auto report = check_constraints(layout, w, {});
    REQUIRE_FALSE(report.satisfied);
    bool copy_violation = false;
    for (const auto& v : report.violations) copy_violation |= v.kind == Violation::Kind::copy;
    CHECK(copy_violation);
}

TEST_CASE("pointwise tables are deduplicated") {
    Image img = random_image(6, 6, 7);
    SECTION("uniform white balance allocates exactly one map table") {
        TransformRun run = run_transform(white_balance(1.0, 1.0, 1.0), img);
        size_t two_col = 0;
        for (const auto& l : run.layout.lookups) two_col += l.table.size() == 2;
        CHECK(two_col == 1);  // one gated lookup against one shared table
        CHECK(run.circuit_output == run.native_output);
    }
    SECTION("distinct gains use three lookups") {
        TransformRun run = run_transform(white_balance(0.5, 1.0, 1.5), img);
        size_t two_col = 0;
        for (const auto& l : run.layout.lookups) two_col += l.table.size() == 2;
        CHECK(two_col == 3);
    }
    SECTION("identity contrast table is the identity map") {
        auto m = contrast_map(1.0);
        for (int i = 0; i < 256; ++i) REQUIRE(m[size_t(i)] == i);
    }
}

TEST_CASE("arithmetic outputs are range-pinned in circuit") {
    Image img = random_image(8, 6, 8);
    auto rng = test::rng(88);
    for (TransformSpec t : {contrast(1.9), white_balance(1.3, 0.8, 1.0),
                            simple(TransformKind::rgb2ycbcr), simple(TransformKind::sharpen),
                            simple(TransformKind::blur)}) {
        CircuitBuilder cb(9, 6);
        Synth synth(cb);
        StageData in = make_input_stage(synth, img);
        StageData out = synth_transform(synth, t, in, {});
        CircuitLayout layout = synth.finalize_layout();
        WitnessGrid w = synth.freeze_witness(layout);
        REQUIRE(check_constraints(layout, w, {}).satisfied);

        // flipping any sampled output sub-pixel cell must break satisfaction
        for (int iter = 0; iter < 20; ++iter) {
            CellRef c = out.grid.cells[rng() % out.grid.cells.size()];
            Fe before = w.at(c);
            w.set(c, before + Fe::from_u64(1 + rng() % 1000));
            auto rep = check_constraints(layout, w, {});
            INFO(transform_kind_name(t.kind) << " cell (" << c.col << "," << c.row << ")");
            REQUIRE_FALSE(rep.satisfied);
            w.set(c, before);
        }
    }
}

TEST_CASE("convolution handles degenerate image sizes") {
    for (auto [w, h] : {std::pair<uint32_t, uint32_t>{1, 1}, {1, 5}, {2, 2}, {5, 1}, {3, 3}}) {
        Image img = random_image(w, h, 60 + w * 10 + h);
        for (TransformKind k : {TransformKind::blur, TransformKind::sharpen}) {
            TransformRun run = run_transform(simple(k), img);
            INFO(transform_kind_name(k) << " " << w << "x" << h);
            REQUIRE(run.report.satisfied);
            REQUIRE(run.circuit_output == run.native_output);
        }
    }
}

TEST_CASE("bulk packing constrains elements to the byte strip") {
    Image img = random_image(5, 4, 9);
    CircuitBuilder cb(9, 6);
    Synth synth(cb);
    StageData in = make_input_stage(synth, img);
    PixelGrid strip = ensure_width1(synth, in);
    std::vector<CellRef> elems = bulk_pack(synth, strip);
    REQUIRE(elems.size() == packed_element_count(img.data.size()));

    CircuitLayout layout = synth.finalize_layout();
    WitnessGrid w = synth.freeze_witness(layout);
    REQUIRE(check_constraints(layout, w, {}).satisfied);

    auto expect = pack_bytes_le(img.data);
    for (size_t i = 0; i < elems.size(); ++i) REQUIRE(w.at(elems[i]) == expect[i]);

    // a forged element value is caught by the pack gate
    w.set(elems[1], w.at(elems[1]) + Fe::one());
    CHECK_FALSE(check_constraints(layout, w, {}).satisfied);
}
