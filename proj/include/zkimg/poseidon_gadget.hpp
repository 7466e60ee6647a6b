#pragma once

#include "zkimg/gadgets.hpp"
#include "zkimg/poseidon.hpp"

namespace zkimg {

// In-circuit Poseidon sponge. Layout: one absorb row plus one row per round,
// state lanes in three adjacent advice columns, absorbed inputs in two more.
// Round constants live in three fixed columns repeating with the block
// stride, so one absorb gate, one full-round gate, and one partial-round
// gate cover every block. Row usage per call: 66 * ceil(inputs/2) + 1.
namespace poseidon_gadget_detail {

struct Shared {
    bool ready = false;
    std::array<uint32_t, 3> rc_cols{};
    GateId absorb = 0, full = 0, partial = 0;
};

inline Expr pow5_expr(const Expr& e) {
    Expr e2 = e * e;
    return e2 * e2 * e;
}

inline Shared& ensure(Synth& s, const Synth::Strip& strip) {
    Shared& sh = s.extra<Shared>("poseidon_gates");
    if (sh.ready) return sh;
    const PoseidonParams& P = poseidon_params();

    for (size_t k = 0; k < 3; ++k) sh.rc_cols[k] = s.builder().add_column(ColumnKind::fixed).index;

    uint32_t s0 = strip.cols[0], s1 = strip.cols[1], s2 = strip.cols[2];
    uint32_t x0 = strip.cols[3], x1 = strip.cols[4];
    std::array<uint32_t, 3> lane{s0, s1, s2};

    auto cur = [](uint32_t col) { return Expr::cell(col, 0); };
    auto nxt = [](uint32_t col) { return Expr::cell(col, 1); };

    sh.absorb = s.builder().add_gate("poseidon_absorb",
                                     {nxt(s0) - cur(s0), nxt(s1) - cur(s1) - cur(x0),
                                      nxt(s2) - cur(s2) - cur(x1)});

    std::vector<Expr> full_polys, partial_polys;
    for (size_t j = 0; j < 3; ++j) {
        Expr acc_full = nxt(lane[j]);
        Expr acc_part = nxt(lane[j]);
        for (size_t k = 0; k < 3; ++k) {
            Expr pre = cur(lane[k]) + cur(sh.rc_cols[k]);
            acc_full = acc_full - pow5_expr(pre).scaled(P.mds[j][k]);
            acc_part = acc_part - (k == 0 ? pow5_expr(pre) : pre).scaled(P.mds[j][k]);
        }
        full_polys.push_back(acc_full);
        partial_polys.push_back(acc_part);
    }
    sh.full = s.builder().add_gate("poseidon_full_round", std::move(full_polys));
    sh.partial = s.builder().add_gate("poseidon_partial_round", std::move(partial_polys));
    sh.ready = true;
    return sh;
}

}  // namespace poseidon_gadget_detail

inline constexpr uint64_t poseidon_rows_per_block = PoseidonParams::total_rounds + 1;  // 66

inline uint64_t hash_gadget_rows(uint64_t n_inputs) {
    return ((n_inputs + 1) / 2) * poseidon_rows_per_block + 1;
}

// Sponge over already-constrained element cells; returns the digest cell
// (capacity lane of the final state), constrained by the round gates.
inline CellRef hash_gadget(Synth& s, std::span<const CellRef> inputs) {
    using namespace poseidon_gadget_detail;
    if (inputs.empty()) fail(Errc::empty_input, "hash_gadget requires at least one input");

    Synth::Strip& strip = s.strip("poseidon", 5);
    Shared& sh = ensure(s, strip);
    const PoseidonParams& P = poseidon_params();
    CircuitBuilder& cb = s.builder();
    constexpr unsigned half = PoseidonParams::full_rounds / 2;
    constexpr unsigned rounds = PoseidonParams::total_rounds;

    uint64_t blocks = (inputs.size() + 1) / 2;
    uint64_t base = strip.cursor;
    strip.cursor += blocks * poseidon_rows_per_block + 1;

    uint32_t s0 = strip.cols[0], s1 = strip.cols[1], s2 = strip.cols[2];
    uint32_t x0 = strip.cols[3], x1 = strip.cols[4];
    auto set_state = [&](uint64_t row, const PoseidonState& st) {
        s.set({s0, row}, st[0]);
        s.set({s1, row}, st[1]);
        s.set({s2, row}, st[2]);
    };

    // Initial state (0-padded rate, length tag in the capacity lane) is
    // pinned by copies to shared constant cells.
    Fe tag = Fe::from_u64(inputs.size());
    PoseidonState state{tag, Fe::zero(), Fe::zero()};
    cb.add_copy({s0, base}, s.constant_cell(tag));
    cb.add_copy({s1, base}, s.constant_cell(Fe::zero()));
    cb.add_copy({s2, base}, s.constant_cell(Fe::zero()));
    set_state(base, state);

    cb.enable_gate_run(sh.absorb, base, poseidon_rows_per_block, blocks);
    for (unsigned r = 0; r < rounds; ++r) {
        bool full = r < half || r >= half + PoseidonParams::partial_rounds;
        cb.enable_gate_run(full ? sh.full : sh.partial, base + 1 + r, poseidon_rows_per_block,
                           blocks);
        for (size_t k = 0; k < 3; ++k)
            cb.assign_fixed_run(sh.rc_cols[k], base + 1 + r, poseidon_rows_per_block, blocks,
                                P.round_constants[size_t(r) * 3 + k]);
    }

    for (uint64_t b = 0; b < blocks; ++b) {
        uint64_t row = base + b * poseidon_rows_per_block;
        CellRef in0 = inputs[2 * b];
        CellRef in1 = 2 * b + 1 < inputs.size() ? inputs[2 * b + 1] : s.zero_cell();
        Fe v0 = s.value(in0), v1 = s.value(in1);
        s.set({x0, row}, v0);
        s.set({x1, row}, v1);
        cb.add_copy(in0, {x0, row});
        cb.add_copy(in1, {x1, row});

        state[1] += v0;
        state[2] += v1;
        set_state(row + 1, state);  // post-absorb, pre-round
        for (unsigned r = 0; r < rounds; ++r) {
            for (size_t i = 0; i < 3; ++i) state[i] += P.round_constants[size_t(r) * 3 + i];
            bool full = r < half || r >= half + PoseidonParams::partial_rounds;
            if (full) {
                for (Fe& lane : state) lane = pow5(lane);
            } else {
                state[0] = pow5(state[0]);
            }
            PoseidonState next{};
            for (size_t i = 0; i < 3; ++i)
                next[i] = P.mds[i][0] * state[0] + P.mds[i][1] * state[1] + P.mds[i][2] * state[2];
            state = next;
            set_state(row + 2 + r, state);
        }
    }

    return {s0, base + blocks * poseidon_rows_per_block};
}

}  // namespace zkimg
