#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "zkimg/field.hpp"

using namespace zkimg;
using test::cpp_int;
using test::from_big;
using test::prime;
using test::to_big;

TEST_CASE("small integer arithmetic") {
    CHECK(Fe::from_u64(2) + Fe::from_u64(3) == Fe::from_u64(5));
    CHECK(Fe::from_u64(7) * Fe::one() == Fe::from_u64(7));
    CHECK(Fe::from_u64(7) * Fe::zero() == Fe::zero());
}

TEST_CASE("additive identity and wraparound at p") {
    Fe pm1 = Fe::from_i64(-1);  // p - 1
    CHECK(pm1 + Fe::one() == Fe::zero());
    CHECK(to_big(pm1) == prime() - 1);

    auto r = test::rng();
    for (int i = 0; i < 50; ++i) {
        Fe x = Fe::random(r);
        CHECK(x + Fe::zero() == x);
    }
}

TEST_CASE("(p-1)^2 = 1") {
    Fe pm1 = Fe::from_i64(-1);
    CHECK(pm1 * pm1 == Fe::one());
}

TEST_CASE("group laws against big-integer oracle") {
    auto r = test::rng(1);
    const cpp_int& p = prime();
    for (int i = 0; i < 200; ++i) {
        Fe a = Fe::random(r), b = Fe::random(r), c = Fe::random(r);
        cpp_int A = to_big(a), B = to_big(b), C = to_big(c);
        CHECK(to_big(a + b) == (A + B) % p);
        CHECK(to_big(a * b) == (A * B) % p);
        CHECK(to_big(a - b) == ((A - B) % p + p) % p);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
    }
}

TEST_CASE("inverse: 1000 random nonzero elements") {
    auto r = test::rng(2);
    for (int i = 0; i < 1000; ++i) {
        Fe a = Fe::random(r);
        if (a.is_zero()) continue;
        CHECK(a * a.inverse() == Fe::one());
    }
}

TEST_CASE("inverse edge cases") {
    CHECK(Fe::one().inverse() == Fe::one());
    // inv(2) = (p+1)/2, checked via the oracle.
    cpp_int half = (prime() + 1) / 2;
    CHECK(Fe::from_u64(2).inverse() == from_big(half));
    CHECK_THROWS_AS(Fe::zero().inverse(), Error);
    try {
        Fe::zero().inverse();
    } catch (const Error& e) {
        CHECK(e.code() == Errc::zero_inverse);
    }
}

TEST_CASE("from_i64 signed mapping") {
    CHECK(Fe::from_i64(5) == Fe::from_u64(5));
    CHECK(to_big(Fe::from_i64(-1)) == prime() - 1);
    CHECK(to_big(Fe::from_i64(-43)) == prime() - 43);
    CHECK(Fe::from_i64(INT64_MIN) + Fe::from_u64(uint64_t(1) << 63) == Fe::zero());
}

TEST_CASE("signed round trip: from_i64(-n) + from_i64(n) = 0") {
    auto r = test::rng(3);
    std::uniform_int_distribution<int64_t> dist(0, (int64_t(1) << 32) - 1);
    std::vector<int64_t> cases = {0, 1, 2, (int64_t(1) << 32) - 1};
    for (int i = 0; i < 2000; ++i) cases.push_back(dist(r));
    for (int64_t n : cases) {
        CHECK(Fe::from_i64(-n) + Fe::from_i64(n) == Fe::zero());
    }
}

TEST_CASE("32-byte little-endian encoding round trip and canonicality") {
    auto r = test::rng(4);
    for (int i = 0; i < 200; ++i) {
        Fe a = Fe::random(r);
        auto bytes = a.to_bytes();
        auto back = Fe::from_bytes(bytes);
        REQUIRE(back.has_value());
        CHECK(*back == a);
    }

    // Low byte of the LE encoding is the low byte of the canonical value.
    auto five = Fe::from_u64(5).to_bytes();
    CHECK(five[0] == 5);
    for (size_t i = 1; i < 32; ++i) CHECK(five[i] == 0);

    // Encodings >= p are rejected.
    auto reject = [](const cpp_int& v) {
        std::array<uint8_t, 32> buf{};
        cpp_int x = v;
        for (size_t i = 0; i < 32; ++i) {
            buf[i] = static_cast<uint8_t>(x & 0xff);
            x >>= 8;
        }
        return Fe::from_bytes(buf);
    };
    CHECK_FALSE(reject(prime()).has_value());
    CHECK_FALSE(reject(prime() + 1).has_value());
    CHECK_FALSE(reject((cpp_int(1) << 256) - 1).has_value());
    CHECK(reject(prime() - 1).has_value());
}

TEST_CASE("pow matches oracle") {
    auto r = test::rng(5);
    for (int i = 0; i < 20; ++i) {
        Fe a = Fe::random(r);
        uint64_t e = r() % 1000;
        cpp_int expect = boost::multiprecision::powm(to_big(a), cpp_int(e), prime());
        CHECK(to_big(a.pow(e)) == expect);
    }
}

TEST_CASE("hex form is 64 lowercase hex chars") {
    Fe a = Fe::from_u64(0xdeadbeef);
    auto h = a.to_hex();
    CHECK(h.size() == 64);
    CHECK(h.substr(0, 8) == "efbeadde");
}
