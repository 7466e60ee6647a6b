#pragma once

#include <array>
#include <span>
#include <vector>

#include "zkimg/field.hpp"
#include "zkimg/image.hpp"

namespace zkimg {

// Poseidon over the 254-bit field: width 3, rate 2, x^5 s-box, 8 full and 57
// partial rounds (the standard 128-bit parameterization for this curve).
// Round constants and the MDS matrix come from the reference Grain-LFSR
// procedure, so digests are reproducible against independent implementations.
struct PoseidonParams {
    static constexpr size_t width = 3;
    static constexpr size_t rate = 2;
    static constexpr unsigned alpha = 5;
    static constexpr unsigned full_rounds = 8;
    static constexpr unsigned partial_rounds = 57;
    static constexpr unsigned total_rounds = full_rounds + partial_rounds;

    std::array<Fe, size_t(total_rounds) * width> round_constants;
    std::array<std::array<Fe, width>, width> mds;
};

namespace poseidon_detail {

// Grain LFSR keyed by the Poseidon parameter profile. Self-shrinking output:
// bits are consumed in pairs (b1, b2) and b2 is emitted when b1 = 1.
class GrainLfsr {
  public:
    GrainLfsr(unsigned field_tag, unsigned sbox_tag, unsigned n_bits, unsigned t, unsigned r_f,
              unsigned r_p) {
        size_t at = 0;
        auto put = [&](uint64_t v, unsigned width) {
            for (int i = static_cast<int>(width) - 1; i >= 0; --i)
                bits_[at++] = static_cast<uint8_t>((v >> i) & 1);
        };
        put(field_tag, 2);
        put(sbox_tag, 4);
        put(n_bits, 12);
        put(t, 12);
        put(r_f, 10);
        put(r_p, 10);
        for (int i = 0; i < 30; ++i) bits_[at++] = 1;
        for (int i = 0; i < 160; ++i) update();
    }

    uint8_t bit() {
        for (;;) {
            uint8_t b1 = update();
            uint8_t b2 = update();
            if (b1) return b2;
        }
    }

    // 254 bits, most significant first, as little-endian limbs.
    Fe::Limbs sample_raw() {
        Fe::Limbs v{};
        for (int i = 0; i < 254; ++i) {
            // v <<= 1
            for (int l = 3; l > 0; --l) v[size_t(l)] = (v[size_t(l)] << 1) | (v[size_t(l) - 1] >> 63);
            v[0] <<= 1;
            v[0] |= bit();
        }
        return v;
    }

    // Rejection-sampled canonical element (used for round constants).
    Fe sample_field() {
        for (;;) {
            auto f = Fe::from_canonical(sample_raw());
            if (f) return *f;
        }
    }

    // Raw 254-bit sample reduced mod p (used for the MDS Cauchy points).
    Fe sample_reduced() { return Fe::reduce_raw(sample_raw()); }

  private:
    uint8_t update() {
        auto at = [&](size_t i) { return bits_[(head_ + i) % 80]; };
        uint8_t nb = at(62) ^ at(51) ^ at(38) ^ at(23) ^ at(13) ^ at(0);
        bits_[head_ % 80] = nb;
        head_ = (head_ + 1) % 80;
        return nb;
    }

    std::array<uint8_t, 80> bits_{};
    size_t head_ = 0;
};

inline PoseidonParams generate_params() {
    GrainLfsr g(1, 0, 254, PoseidonParams::width, PoseidonParams::full_rounds,
                PoseidonParams::partial_rounds);
    PoseidonParams p;
    for (Fe& c : p.round_constants) c = g.sample_field();
    std::array<Fe, PoseidonParams::width> xs, ys;
    for (Fe& x : xs) x = g.sample_reduced();
    for (Fe& y : ys) y = g.sample_reduced();
    for (size_t i = 0; i < PoseidonParams::width; ++i)
        for (size_t j = 0; j < PoseidonParams::width; ++j)
            p.mds[i][j] = (xs[i] + ys[j]).inverse();
    return p;
}

}  // namespace poseidon_detail

inline const PoseidonParams& poseidon_params() {
    static const PoseidonParams params = poseidon_detail::generate_params();
    return params;
}

inline Fe pow5(const Fe& x) { return x.square().square() * x; }

using PoseidonState = std::array<Fe, PoseidonParams::width>;

inline PoseidonState poseidon_permute(PoseidonState s) {
    const PoseidonParams& p = poseidon_params();
    constexpr unsigned half = PoseidonParams::full_rounds / 2;
    for (unsigned r = 0; r < PoseidonParams::total_rounds; ++r) {
        for (size_t i = 0; i < 3; ++i) s[i] += p.round_constants[size_t(r) * 3 + i];
        bool full = r < half || r >= half + PoseidonParams::partial_rounds;
        if (full) {
            for (Fe& lane : s) lane = pow5(lane);
        } else {
            s[0] = pow5(s[0]);
        }
        PoseidonState next{};
        for (size_t i = 0; i < 3; ++i) {
            Fe acc = p.mds[i][0] * s[0];
            acc += p.mds[i][1] * s[1];
            acc += p.mds[i][2] * s[2];
            next[i] = acc;
        }
        s = next;
    }
    return s;
}

// A digest is a single canonical field element; 32-byte encoding, hex in CLI
// output.
using Digest = Fe;

// Sponge with rate 2. The capacity lane (lane 0) is initialized to the input
// length as a domain tag, inputs are zero-padded to a multiple of the rate,
// and the digest is the first lane after the final permutation.
inline Digest hash_elements(std::span<const Fe> inputs) {
    if (inputs.empty()) fail(Errc::empty_input, "hash_elements requires at least one input");
    PoseidonState s{Fe::from_u64(inputs.size()), Fe::zero(), Fe::zero()};
    for (size_t i = 0; i < inputs.size(); i += 2) {
        s[1] += inputs[i];
        if (i + 1 < inputs.size()) s[2] += inputs[i + 1];
        s = poseidon_permute(s);
    }
    return s[0];
}

inline Digest hash_elements(const std::vector<Fe>& inputs) {
    return hash_elements(std::span<const Fe>(inputs));
}

// Sub-pixel packing convention (normative: camera and verifier must agree):
// bytes are taken row-major and channel-interleaved, 31 per field element,
// little-endian within the element. 31 * 8 = 248 bits < field capacity.
inline constexpr size_t pack_chunk_bytes = 31;

inline size_t packed_element_count(size_t byte_count) {
    return (byte_count + pack_chunk_bytes - 1) / pack_chunk_bytes;
}

inline std::vector<Fe> pack_bytes_le(std::span<const uint8_t> bytes) {
    std::vector<Fe> out;
    out.reserve(packed_element_count(bytes.size()));
    for (size_t off = 0; off < bytes.size(); off += pack_chunk_bytes) {
        size_t n = std::min(pack_chunk_bytes, bytes.size() - off);
        Fe::Limbs limbs{};
        for (size_t i = 0; i < n; ++i)
            limbs[i / 8] |= static_cast<uint64_t>(bytes[off + i]) << (8 * (i % 8));
        auto f = Fe::from_canonical(limbs);
        out.push_back(*f);  // < 2^248 < p, always canonical
    }
    return out;
}

inline Digest hash_image(const Image& img) {
    if (img.data.empty()) fail(Errc::empty_input, "cannot hash an empty image");
    return hash_elements(pack_bytes_le(img.data));
}

}  // namespace zkimg
