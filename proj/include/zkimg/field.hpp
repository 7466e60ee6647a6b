#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "zkimg/errors.hpp"

namespace zkimg {

namespace fe_detail {

using Limbs = std::array<uint64_t, 4>;
using u128 = unsigned __int128;

// p = 21888242871839275222246405745257275088548364400416034343698204186575808495617
inline constexpr Limbs modulus = {0x43E1F593F0000001ull, 0x2833E84879B97091ull,
                                  0xB85045B68181585Dull, 0x30644E72E131A029ull};

constexpr bool less_than(const Limbs& a, const Limbs& b) {
    for (int i = 3; i >= 0; --i) {
        size_t j = static_cast<size_t>(i);
        if (a[j] != b[j]) return a[j] < b[j];
    }
    return false;
}

constexpr std::pair<Limbs, uint64_t> add_limbs(const Limbs& a, const Limbs& b) {
    Limbs out{};
    uint64_t carry = 0;
    for (size_t i = 0; i < 4; ++i) {
        u128 s = static_cast<u128>(a[i]) + b[i] + carry;
        out[i] = static_cast<uint64_t>(s);
        carry = static_cast<uint64_t>(s >> 64);
    }
    return {out, carry};
}

constexpr std::pair<Limbs, uint64_t> sub_limbs(const Limbs& a, const Limbs& b) {
    Limbs out{};
    uint64_t borrow = 0;
    for (size_t i = 0; i < 4; ++i) {
        u128 d = static_cast<u128>(a[i]) - b[i] - borrow;
        out[i] = static_cast<uint64_t>(d);
        borrow = static_cast<uint64_t>(d >> 64) & 1;
    }
    return {out, borrow};
}

// -p^{-1} mod 2^64 via Newton iteration on the odd low limb.
constexpr uint64_t mont_inv() {
    uint64_t x = 1;
    for (int i = 0; i < 6; ++i) x *= 2 - modulus[0] * x;
    return ~x + 1;
}

// CIOS Montgomery multiplication; p < 2^254 < R/4 keeps the running sum below
// 2p, so one conditional subtraction suffices.
constexpr Limbs mont_mul(const Limbs& a, const Limbs& b) {
    constexpr uint64_t n0 = mont_inv();
    uint64_t t[5] = {0, 0, 0, 0, 0};
    for (size_t i = 0; i < 4; ++i) {
        uint64_t carry = 0;
        for (size_t j = 0; j < 4; ++j) {
            u128 v = static_cast<u128>(t[j]) + static_cast<u128>(a[i]) * b[j] + carry;
            t[j] = static_cast<uint64_t>(v);
            carry = static_cast<uint64_t>(v >> 64);
        }
        t[4] += carry;

        uint64_t m = t[0] * n0;
        u128 v = static_cast<u128>(t[0]) + static_cast<u128>(m) * modulus[0];
        carry = static_cast<uint64_t>(v >> 64);
        for (size_t j = 1; j < 4; ++j) {
            v = static_cast<u128>(t[j]) + static_cast<u128>(m) * modulus[j] + carry;
            t[j - 1] = static_cast<uint64_t>(v);
            carry = static_cast<uint64_t>(v >> 64);
        }
        t[3] = t[4] + carry;
        t[4] = 0;
    }
    Limbs out{t[0], t[1], t[2], t[3]};
    if (!less_than(out, modulus)) out = sub_limbs(out, modulus).first;
    return out;
}

constexpr Limbs double_mod(Limbs acc, int times) {
    for (int i = 0; i < times; ++i) {
        auto [s, carry] = add_limbs(acc, acc);
        if (carry || !less_than(s, modulus)) s = sub_limbs(s, modulus).first;
        acc = s;
    }
    return acc;
}

inline constexpr Limbs r_mod_p = double_mod({1, 0, 0, 0}, 256);
inline constexpr Limbs r2_mod_p = double_mod(r_mod_p, 256);

}  // namespace fe_detail

// Element of the 254-bit scalar field used by all circuit values.
//
// Internally kept in Montgomery form (R = 2^256 mod p) over four 64-bit
// little-endian limbs. Only canonical-value semantics are observable: every
// conversion and encoding goes through the canonical representative in [0, p).
class Fe {
  public:
    using Limbs = fe_detail::Limbs;

    static constexpr Limbs modulus = fe_detail::modulus;

    constexpr Fe() : r_{0, 0, 0, 0} {}

    static constexpr Fe zero() { return Fe(); }
    static constexpr Fe one() { return from_montgomery_limbs(fe_detail::r_mod_p); }

    static constexpr Fe from_u64(uint64_t v) { return from_canonical_unchecked({v, 0, 0, 0}); }

    // n >= 0 maps to n, n < 0 maps to p - |n|.
    static constexpr Fe from_i64(int64_t n) {
        if (n >= 0) return from_u64(static_cast<uint64_t>(n));
        return from_u64(static_cast<uint64_t>(-(n + 1)) + 1).neg();
    }

    // Canonical limbs in [0, p); rejects anything >= p.
    static constexpr std::optional<Fe> from_canonical(const Limbs& v) {
        if (!fe_detail::less_than(v, modulus)) return std::nullopt;
        return from_canonical_unchecked(v);
    }

    // Reduces a raw integer < 2p (e.g. a 254-bit sample) into the field.
    static constexpr Fe reduce_raw(Limbs v) {
        if (!fe_detail::less_than(v, modulus)) v = fe_detail::sub_limbs(v, modulus).first;
        return from_canonical_unchecked(v);
    }

    constexpr Limbs canonical() const { return fe_detail::mont_mul(r_, {1, 0, 0, 0}); }

    // Value as u64; caller must know the element is small (witness bytes etc).
    constexpr uint64_t as_u64() const {
        Limbs c = canonical();
        if (c[1] || c[2] || c[3]) fail(Errc::internal, "field element does not fit in 64 bits");
        return c[0];
    }

    constexpr bool is_zero() const { return r_[0] == 0 && r_[1] == 0 && r_[2] == 0 && r_[3] == 0; }

    constexpr Fe operator+(const Fe& o) const {
        auto [s, carry] = fe_detail::add_limbs(r_, o.r_);
        if (carry || !fe_detail::less_than(s, modulus)) s = fe_detail::sub_limbs(s, modulus).first;
        return from_montgomery_limbs(s);
    }

    constexpr Fe operator-(const Fe& o) const {
        auto [d, borrow] = fe_detail::sub_limbs(r_, o.r_);
        if (borrow) d = fe_detail::add_limbs(d, modulus).first;
        return from_montgomery_limbs(d);
    }

    constexpr Fe operator*(const Fe& o) const {
        return from_montgomery_limbs(fe_detail::mont_mul(r_, o.r_));
    }

    Fe& operator+=(const Fe& o) { return *this = *this + o; }
    Fe& operator-=(const Fe& o) { return *this = *this - o; }
    Fe& operator*=(const Fe& o) { return *this = *this * o; }

    constexpr Fe neg() const { return Fe() - *this; }
    constexpr Fe operator-() const { return neg(); }

    constexpr Fe square() const { return *this * *this; }

    // Exponent given as a canonical little-endian 256-bit integer.
    constexpr Fe pow(const Limbs& exp) const {
        Fe acc = one();
        for (int limb = 3; limb >= 0; --limb) {
            for (int bit = 63; bit >= 0; --bit) {
                acc = acc.square();
                if ((exp[static_cast<size_t>(limb)] >> bit) & 1) acc = acc * *this;
            }
        }
        return acc;
    }

    constexpr Fe pow(uint64_t e) const { return pow(Limbs{e, 0, 0, 0}); }

    Fe inverse() const {
        if (is_zero()) fail(Errc::zero_inverse, "inverse of zero");
        // p - 2; p[0] >= 2 so only the low limb changes.
        Limbs e = modulus;
        e[0] -= 2;
        return pow(e);
    }

    constexpr bool operator==(const Fe& o) const { return r_ == o.r_; }
    constexpr bool operator!=(const Fe& o) const { return r_ != o.r_; }

    // 32-byte little-endian canonical encoding.
    std::array<uint8_t, 32> to_bytes() const {
        Limbs c = canonical();
        std::array<uint8_t, 32> out{};
        for (size_t i = 0; i < 4; ++i)
            for (size_t b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<uint8_t>(c[i] >> (8 * b));
        return out;
    }

    static std::optional<Fe> from_bytes(std::span<const uint8_t> in) {
        if (in.size() != 32) return std::nullopt;
        Limbs v{};
        for (size_t i = 0; i < 4; ++i)
            for (size_t b = 0; b < 8; ++b) v[i] |= static_cast<uint64_t>(in[i * 8 + b]) << (8 * b);
        return from_canonical(v);
    }

    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        auto bytes = to_bytes();
        std::string s(64, '0');
        for (size_t i = 0; i < 32; ++i) {
            s[2 * i] = digits[bytes[i] >> 4];
            s[2 * i + 1] = digits[bytes[i] & 0xf];
        }
        return s;
    }

    // Uniform element via rejection sampling from a 64-bit generator.
    template <typename Rng>
    static Fe random(Rng& rng) {
        for (;;) {
            Limbs v{rng(), rng(), rng(), rng()};
            v[3] &= (uint64_t(1) << 62) - 1;  // p < 2^254
            if (fe_detail::less_than(v, modulus)) return from_canonical_unchecked(v);
        }
    }

    struct Hash {
        size_t operator()(const Fe& f) const {
            uint64_t h = 0x9e3779b97f4a7c15ull;
            for (uint64_t limb : f.r_) {
                h ^= limb + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            }
            return static_cast<size_t>(h);
        }
    };

    // Signed interpretation under the from_i64 convention; nullopt when the
    // magnitude does not fit an int64.
    std::optional<int64_t> to_i64() const {
        Limbs c = canonical();
        if (!c[1] && !c[2] && !c[3] && c[0] <= static_cast<uint64_t>(INT64_MAX))
            return static_cast<int64_t>(c[0]);
        Limbs n = fe_detail::sub_limbs(modulus, c).first;  // p - c = |negative value|
        if (!n[1] && !n[2] && !n[3] && n[0] <= static_cast<uint64_t>(INT64_MAX))
            return -static_cast<int64_t>(n[0]);
        return std::nullopt;
    }

  private:
    Limbs r_;

    static constexpr Fe from_montgomery_limbs(const Limbs& m) {
        Fe f;
        f.r_ = m;
        return f;
    }

    static constexpr Fe from_canonical_unchecked(const Limbs& v) {
        return from_montgomery_limbs(fe_detail::mont_mul(v, fe_detail::r2_mod_p));
    }
};

}  // namespace zkimg
