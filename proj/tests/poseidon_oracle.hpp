#pragma once

// Independent Poseidon reference for the test suites: parameter generation
// and permutation written from the reference specification over
// boost::multiprecision integers, sharing no arithmetic with the library.

#include <array>
#include <vector>

#include "big_oracle.hpp"

namespace zkimg::test {

class OracleGrain {
  public:
    OracleGrain(unsigned field, unsigned sbox, unsigned n, unsigned t, unsigned rf, unsigned rp) {
        auto put = [&](uint64_t v, unsigned width) {
            for (int i = static_cast<int>(width) - 1; i >= 0; --i)
                state_.push_back(static_cast<uint8_t>((v >> i) & 1));
        };
        put(field, 2);
        put(sbox, 4);
        put(n, 12);
        put(t, 12);
        put(rf, 10);
        put(rp, 10);
        for (int i = 0; i < 30; ++i) state_.push_back(1);
        for (int i = 0; i < 160; ++i) update();
    }

    cpp_int sample(bool reject_above_p) {
        for (;;) {
            cpp_int v = 0;
            for (int i = 0; i < 254; ++i) {
                v <<= 1;
                v += output_bit();
            }
            if (!reject_above_p) return v % prime();
            if (v < prime()) return v;
        }
    }

  private:
    uint8_t update() {
        uint8_t nb = state_[62] ^ state_[51] ^ state_[38] ^ state_[23] ^ state_[13] ^ state_[0];
        state_.erase(state_.begin());
        state_.push_back(nb);
        return nb;
    }

    uint8_t output_bit() {
        for (;;) {
            uint8_t b1 = update();
            uint8_t b2 = update();
            if (b1) return b2;
        }
    }

    std::vector<uint8_t> state_;
};

struct OraclePoseidon {
    static constexpr unsigned t = 3, rf = 8, rp = 57;
    std::vector<cpp_int> c;                    // (rf+rp)*t round constants
    std::array<std::array<cpp_int, 3>, 3> m;  // MDS

    static const OraclePoseidon& get() {
        static OraclePoseidon p = generate();
        return p;
    }

    static OraclePoseidon generate() {
        OraclePoseidon p;
        OracleGrain g(1, 0, 254, t, rf, rp);
        for (unsigned i = 0; i < (rf + rp) * t; ++i) p.c.push_back(g.sample(true));
        std::array<cpp_int, 3> xs, ys;
        for (auto& x : xs) x = g.sample(false);
        for (auto& y : ys) y = g.sample(false);
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = 0; j < 3; ++j)
                p.m[i][j] = boost::multiprecision::powm(xs[i] + ys[j], prime() - 2, prime());
        return p;
    }

    std::array<cpp_int, 3> permute(std::array<cpp_int, 3> s) const {
        const cpp_int& p = prime();
        auto pow5 = [&](const cpp_int& x) { return boost::multiprecision::powm(x, 5, p); };
        for (unsigned r = 0; r < rf + rp; ++r) {
            for (size_t i = 0; i < 3; ++i) s[i] = (s[i] + c[size_t(r) * 3 + i]) % p;
            if (r < rf / 2 || r >= rf / 2 + rp) {
                for (auto& lane : s) lane = pow5(lane);
            } else {
                s[0] = pow5(s[0]);
            }
            std::array<cpp_int, 3> next;
            for (size_t i = 0; i < 3; ++i)
                next[i] = (m[i][0] * s[0] + m[i][1] * s[1] + m[i][2] * s[2]) % p;
            s = next;
        }
        return s;
    }

    cpp_int hash(const std::vector<cpp_int>& inputs) const {
        std::array<cpp_int, 3> s{cpp_int(inputs.size()), 0, 0};
        for (size_t i = 0; i < inputs.size(); i += 2) {
            s[1] = (s[1] + inputs[i]) % prime();
            if (i + 1 < inputs.size()) s[2] = (s[2] + inputs[i + 1]) % prime();
            s = permute(s);
        }
        return s[0];
    }
};

}  // namespace zkimg::test
