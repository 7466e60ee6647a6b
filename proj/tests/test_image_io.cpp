#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "zkimg/image.hpp"
#include "zkimg/poseidon.hpp"

using namespace zkimg;

namespace {

Image gradient(uint32_t w, uint32_t h) {
    Image img = Image::filled(w, h);
    for (uint32_t y = 0; y < h; ++y)
        for (uint32_t x = 0; x < w; ++x)
            for (uint32_t c = 0; c < 3; ++c)
                img.at(x, y, c) = static_cast<uint8_t>((x * 7 + y * 13 + c * 101) & 0xff);
    return img;
}

Image noise(uint32_t w, uint32_t h, uint64_t seed) {
    auto r = test::rng(seed);
    Image img = Image::filled(w, h);
    for (auto& b : img.data) b = static_cast<uint8_t>(r());
    return img;
}

}  // namespace

TEST_CASE("round trip identity over the generated corpus") {
    const std::pair<uint32_t, uint32_t> sizes[] = {{1, 1}, {64, 48}, {720, 480}, {1280, 720}};
    for (auto [w, h] : sizes) {
        for (const Image& img : {gradient(w, h), noise(w, h, w * 1000 + h), Image::filled(w, h, 17)}) {
            auto bytes = save_ppm(img);
            Image back = load_ppm(bytes);
            REQUIRE(back == img);
            // and byte-for-byte stability of the writer
            REQUIRE(save_ppm(back) == bytes);
        }
    }
}

TEST_CASE("HD file carries 2,764,800 sub-pixels") {
    Image img = load_ppm(save_ppm(Image::filled(1280, 720)));
    CHECK(img.sub_pixels() == 2764800u);
}

TEST_CASE("canonical 1x1 black image layout") {
    Image px = Image::filled(1, 1);
    auto bytes = save_ppm(px);
    // header "P6\n1 1\n255\n" (11 bytes) + 3 zero payload bytes
    REQUIRE(bytes.size() == 14);
    CHECK(std::string(bytes.begin(), bytes.begin() + 11) == "P6\n1 1\n255\n");
    CHECK(bytes[11] == 0);
    CHECK(bytes[12] == 0);
    CHECK(bytes[13] == 0);
}

TEST_CASE("two saves of the same image are identical, and digests are stable") {
    Image img = gradient(37, 23);
    CHECK(save_ppm(img) == save_ppm(img));
    CHECK(hash_image(load_ppm(save_ppm(img))) == hash_image(img));
}

TEST_CASE("maxval other than 255 is rejected") {
    std::string f = "P6\n2 2\n65535\n";
    std::vector<uint8_t> bytes(f.begin(), f.end());
    bytes.resize(bytes.size() + 2 * 2 * 3 * 2, 0);
    try {
        load_ppm(bytes);
        FAIL("expected UnsupportedMaxval");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unsupported_maxval);
    }
}

TEST_CASE("malformed headers are rejected") {
    auto expect_malformed = [](const std::string& s) {
        std::vector<uint8_t> bytes(s.begin(), s.end());
        try {
            load_ppm(bytes);
            FAIL("expected MalformedHeader for: " << s);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::malformed_header);
        }
    };
    expect_malformed("P5\n1 1\n255\n");
    expect_malformed("P6\nx 1\n255\n");
    expect_malformed("P6\n0 4\n255\n");
    expect_malformed("");
}

TEST_CASE("comments in the header are tolerated") {
    std::string f = "P6\n# a comment\n2 1\n255\n";
    std::vector<uint8_t> bytes(f.begin(), f.end());
    bytes.resize(bytes.size() + 6, 9);
    Image img = load_ppm(bytes);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.data == std::vector<uint8_t>(6, 9));
}

TEST_CASE("payload size mismatches are rejected") {
    Image img = Image::filled(4, 4, 1);
    auto bytes = save_ppm(img);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 5);
    try {
        load_ppm(truncated);
        FAIL("expected TruncatedPayload");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::truncated_payload);
    }

    auto padded = bytes;
    padded.push_back(0);
    CHECK_THROWS_AS(load_ppm(padded), Error);
}
