#pragma once

#include <any>
#include <functional>
#include <span>
#include <unordered_map>

#include "zkimg/checker.hpp"
#include "zkimg/circuit.hpp"

namespace zkimg {

// Synthesis context: a builder, the witness being filled alongside it, and
// caches that make tables, gates, and constants shareable across gadget call
// sites (one range table per width, one remainder table per divisor, one
// clamp table per bound pair).
class Synth {
  public:
    explicit Synth(CircuitBuilder& cb) : cb_(cb), asg_(cb) {}

    CircuitBuilder& builder() { return cb_; }
    Assignments& assignments() { return asg_; }

    void set(CellRef c, const Fe& v) { asg_.set(c, v); }

    // Value of an advice or interned constant cell.
    Fe value(CellRef c) const {
        if (cb_.column_kind(c.col) == ColumnKind::advice) return asg_.get(c);
        auto it = fixed_vals_.find(key(c));
        if (it == fixed_vals_.end())
            fail(Errc::internal, "value() on a fixed cell without a recorded constant");
        return it->second;
    }

    int64_t value_i64(CellRef c) const {
        auto v = value(c).to_i64();
        if (!v) fail(Errc::internal, "cell value out of int64 range");
        return *v;
    }

    // Fixed cell pinned to a constant, shared per value. Copy-constraining an
    // advice cell to one of these forces it to the constant; the zero cell is
    // the revealed black pixel used by censoring and translation fills.
    CellRef constant_cell(const Fe& v) {
        auto it = const_cells_.find(v);
        if (it != const_cells_.end()) return it->second;
        if (const_col_ == UINT32_MAX) const_col_ = cb_.add_column(ColumnKind::fixed).index;
        CellRef cell{const_col_, const_rows_++};
        cb_.assign_fixed(cell, v);
        const_cells_.emplace(v, cell);
        fixed_vals_.emplace(key(cell), v);
        return cell;
    }

    CellRef zero_cell() { return constant_cell(Fe::zero()); }

    struct TableRef {
        std::vector<uint32_t> cols;
        uint64_t entries = 0;
    };

    // Interned fixed table; `gen` produces one vector per column, equal
    // lengths. Requests with the same name share one table.
    TableRef table(const std::string& name,
                   const std::function<std::vector<std::vector<Fe>>()>& gen) {
        auto it = tables_.find(name);
        if (it != tables_.end()) return it->second;
        auto data = gen();
        TableRef ref;
        ref.entries = data.empty() ? 0 : data[0].size();
        for (const auto& colvals : data) {
            Column col = cb_.add_column(ColumnKind::fixed);
            ref.cols.push_back(col.index);
            for (uint64_t r = 0; r < colvals.size(); ++r)
                if (!colvals[r].is_zero()) cb_.assign_fixed({col.index, r}, colvals[r]);
            cb_.declare_table_extent(col.index, colvals.size());
        }
        tables_.emplace(name, ref);
        return ref;
    }

    bool has_table(const std::string& name) const { return tables_.count(name) != 0; }
    size_t table_count() const { return tables_.size(); }

    TableRef range_table(unsigned bits) {
        if (bits != 8 && bits != 16)
            fail(Errc::unsupported_width, "range tables support 8 or 16 bits");
        return table("range" + std::to_string(bits), [bits] {
            std::vector<Fe> vals(uint64_t(1) << bits);
            for (uint64_t i = 0; i < vals.size(); ++i) vals[i] = Fe::from_u64(i);
            return std::vector<std::vector<Fe>>{std::move(vals)};
        });
    }

    // Shared per-purpose strips: a named set of columns with a row cursor.
    struct Strip {
        std::vector<uint32_t> cols;
        uint64_t cursor = 0;
    };

    Strip& strip(const std::string& name, size_t n_cols,
                 const std::function<void(Strip&)>& on_create = {}) {
        auto it = strips_.find(name);
        if (it != strips_.end()) return it->second;
        Strip s;
        for (size_t i = 0; i < n_cols; ++i) s.cols.push_back(cb_.add_column(ColumnKind::advice).index);
        auto [it2, _] = strips_.emplace(name, std::move(s));
        if (on_create) on_create(it2->second);
        return it2->second;
    }

    GateId gate(const std::string& name, const std::function<std::vector<Expr>()>& gen) {
        auto it = gates_.find(name);
        if (it != gates_.end()) return it->second;
        GateId id = cb_.add_gate(name, gen());
        gates_.emplace(name, id);
        return id;
    }

    // Typed per-circuit scratch state for composite gadgets.
    template <typename T>
    T& extra(const std::string& name) {
        auto& slot = extras_[name];
        if (!slot.has_value()) slot = T{};
        return *std::any_cast<T>(&slot);
    }

    CircuitLayout finalize_layout() { return std::move(cb_).finalize(); }
    WitnessGrid freeze_witness(const CircuitLayout& layout) {
        return std::move(asg_).freeze(layout);
    }

  private:
    static uint64_t key(CellRef c) { return (static_cast<uint64_t>(c.col) << 44) | c.row; }

    CircuitBuilder& cb_;
    Assignments asg_;
    uint32_t const_col_ = UINT32_MAX;
    uint64_t const_rows_ = 0;
    std::unordered_map<Fe, CellRef, Fe::Hash> const_cells_;
    std::unordered_map<uint64_t, Fe> fixed_vals_;
    std::unordered_map<std::string, TableRef> tables_;
    std::unordered_map<std::string, Strip> strips_;
    std::unordered_map<std::string, GateId> gates_;
    std::unordered_map<std::string, std::any> extras_;
};

// ---- range check ----------------------------------------------------------

// Registers the range lookup for a whole advice column: every row of the
// column (including padding zeros) must lie in [0, 2^bits).
inline void range_check_column(Synth& s, uint32_t col, unsigned bits) {
    auto tab = s.range_table(bits);
    s.builder().add_lookup("range" + std::to_string(bits) + ":col" + std::to_string(col),
                           {Expr::cell(col)}, tab.cols);
}

// Constrains one cell to [0, 2^bits) by parking a copy of it in the shared
// range-checked column for that width.
inline void range_check(Synth& s, CellRef cell, unsigned bits) {
    if (bits != 8 && bits != 16) fail(Errc::unsupported_width, "range_check supports 8 or 16 bits");
    std::string name = "rangecheck" + std::to_string(bits);
    auto& strip = s.strip(name, 1, [&](Synth::Strip& st) { range_check_column(s, st.cols[0], bits); });
    CellRef slot{strip.cols[0], strip.cursor++};
    s.set(slot, s.value(cell));
    s.builder().add_copy(cell, slot);
}

// ---- constant-divisor division ---------------------------------------------

struct DivCells {
    CellRef quotient;
    CellRef remainder;
};

// c = b*a + r with 0 <= r < a, divisor a fixed in the gate. The dividend must
// be known-nonnegative and below 2^quotient_bits * a; the quotient is range
// checked to quotient_bits and the remainder against a dedicated a-entry
// table (shared across call sites with the same divisor).
inline DivCells div_const(Synth& s, CellRef c, uint64_t a, unsigned quotient_bits) {
    if (a == 0) fail(Errc::invalid_params, "division by zero divisor");
    if (quotient_bits != 8 && quotient_bits != 16)
        fail(Errc::unsupported_width, "quotient range must be 8 or 16 bits");

    std::string key = "div:" + std::to_string(a) + ":" + std::to_string(quotient_bits);
    auto& strip = s.strip(key, 3, [&](Synth::Strip& st) {
        uint32_t col_c = st.cols[0], col_b = st.cols[1], col_r = st.cols[2];
        auto rem = s.table("rem" + std::to_string(a), [a] {
            std::vector<Fe> vals(a);
            for (uint64_t i = 0; i < a; ++i) vals[i] = Fe::from_u64(i);
            return std::vector<std::vector<Fe>>{std::move(vals)};
        });
        s.builder().add_lookup("rem" + std::to_string(a) + ":col" + std::to_string(col_r),
                               {Expr::cell(col_r)}, rem.cols);
        range_check_column(s, col_b, quotient_bits);
        s.gate(key, [&] {
            return std::vector<Expr>{Expr::cell(col_c) -
                                     Expr::cell(col_b).scaled(Fe::from_u64(a)) -
                                     Expr::cell(col_r)};
        });
    });

    uint64_t row = strip.cursor++;
    CellRef cc{strip.cols[0], row}, cb{strip.cols[1], row}, cr{strip.cols[2], row};
    uint64_t cv = s.value(c).as_u64();
    s.set(cc, Fe::from_u64(cv));
    s.set(cb, Fe::from_u64(cv / a));
    s.set(cr, Fe::from_u64(cv % a));
    s.builder().add_copy(c, cc);
    s.builder().enable_gate(s.gate(key, {}), row);
    return {cb, cr};
}

// ---- dot product with hard-coded coefficients ------------------------------

// y = sum(coeff_i * input_i) + offset. Coefficients live in the gate
// polynomial, not in cells: n+1 assigned cells per call.
inline CellRef dot_const(Synth& s, std::span<const CellRef> inputs,
                         std::span<const int64_t> coeffs, int64_t offset) {
    if (inputs.size() != coeffs.size() || inputs.empty())
        fail(Errc::length_mismatch, "dot_const needs equal, nonempty inputs and coeffs");

    std::string key = "dot:";
    for (int64_t k : coeffs) key += std::to_string(k) + ",";
    key += ";" + std::to_string(offset);

    size_t n = inputs.size();
    auto& strip = s.strip(key, 2, [&](Synth::Strip& st) {
        uint32_t col_in = st.cols[0], col_out = st.cols[1];
        s.gate(key, [&] {
            Expr e = Expr::cell(col_out) - Expr::constant(offset);
            for (size_t i = 0; i < n; ++i) {
                if (coeffs[i] == 0) continue;
                e = e - Expr::cell(col_in, static_cast<int32_t>(i)).scaled(Fe::from_i64(coeffs[i]));
            }
            return std::vector<Expr>{e};
        });
    });

    uint64_t row = strip.cursor;
    strip.cursor += n;
    Fe acc = Fe::from_i64(offset);
    for (size_t i = 0; i < n; ++i) {
        if (coeffs[i] == 0) continue;
        CellRef slot{strip.cols[0], row + i};
        Fe v = s.value(inputs[i]);
        s.set(slot, v);
        s.builder().add_copy(inputs[i], slot);
        acc += Fe::from_i64(coeffs[i]) * v;
    }
    CellRef out{strip.cols[1], row};
    s.set(out, acc);
    s.builder().enable_gate(s.gate(key, {}), row);
    return out;
}

// ---- clamp via two-column lookup -------------------------------------------

// Output cell equals Max(Min(x, 255), 0) where x is the signed value of the
// input cell minus `bias`. The table maps x - lo -> clamped(x) and is shared
// per (lo, hi); the lookup key shift happens inside the input expression, so
// negative x (field values p - |x|) needs no extra cells.
inline CellRef clamp_biased(Synth& s, CellRef x, int64_t bias, int64_t lo, int64_t hi) {
    if (lo > hi) fail(Errc::invalid_params, "clamp bounds inverted");
    if (hi - lo + 1 > (int64_t(1) << 16))
        fail(Errc::bound_too_wide, "clamp table would exceed 2^16 entries");
    // Padding rows feed (0,0) tuples shifted by the key offset; they land on
    // the genuine x = -bias entry, which must clamp to 0.
    if (bias < 0 || -bias < lo || -bias > hi)
        fail(Errc::invalid_params, "clamp bias outside table domain");

    auto clamp01 = [](int64_t v) { return std::min<int64_t>(255, std::max<int64_t>(0, v)); };
    if (clamp01(-bias) != 0) fail(Errc::invalid_params, "clamp padding entry must map to zero");

    std::string tab_key = "clamp:" + std::to_string(lo) + ":" + std::to_string(hi);
    auto tab = s.table(tab_key, [&] {
        size_t n = static_cast<size_t>(hi - lo + 1);
        std::vector<Fe> keys(n), vals(n);
        for (size_t i = 0; i < n; ++i) {
            keys[i] = Fe::from_u64(i);
            vals[i] = Fe::from_i64(clamp01(lo + static_cast<int64_t>(i)));
        }
        return std::vector<std::vector<Fe>>{std::move(keys), std::move(vals)};
    });

    std::string strip_key = "clampstrip:" + tab_key + ":" + std::to_string(bias);
    auto& strip = s.strip(strip_key, 2, [&](Synth::Strip& st) {
        s.builder().add_lookup(
            strip_key, {Expr::cell(st.cols[0]) + Expr::constant(-bias - lo), Expr::cell(st.cols[1])},
            tab.cols);
    });

    uint64_t row = strip.cursor++;
    CellRef cx{strip.cols[0], row}, cy{strip.cols[1], row};
    Fe xv = s.value(x);
    auto signed_x = (xv - Fe::from_i64(bias)).to_i64();
    if (!signed_x || *signed_x < lo || *signed_x > hi)
        fail(Errc::invalid_params, "clamp witness value outside declared bounds");
    s.set(cx, xv);
    s.set(cy, Fe::from_i64(clamp01(*signed_x)));
    s.builder().add_copy(x, cx);
    return cy;
}

inline CellRef clamp(Synth& s, CellRef x, int64_t lo, int64_t hi) {
    return clamp_biased(s, x, 0, lo, hi);
}

// ---- byte packing -----------------------------------------------------------

// e = sum(cell_i * 256^i), little-endian. Callers must have range-checked the
// byte cells; 31 bytes = 248 bits stays below field capacity.
inline CellRef pack_bytes(Synth& s, std::span<const CellRef> cells) {
    if (cells.empty()) fail(Errc::empty_input, "pack_bytes needs at least one byte cell");
    if (cells.size() > 31) fail(Errc::too_many_bytes, "pack_bytes packs at most 31 bytes");

    size_t n = cells.size();
    std::string key = "pack:" + std::to_string(n);
    auto& strip = s.strip(key, 2, [&](Synth::Strip& st) {
        uint32_t col_in = st.cols[0], col_out = st.cols[1];
        s.gate(key, [&] {
            Expr e = Expr::cell(col_out);
            Fe w = Fe::one();
            Fe base = Fe::from_u64(256);
            for (size_t i = 0; i < n; ++i) {
                e = e - Expr::cell(col_in, static_cast<int32_t>(i)).scaled(w);
                w *= base;
            }
            return std::vector<Expr>{e};
        });
    });

    uint64_t row = strip.cursor;
    strip.cursor += n;
    Fe acc = Fe::zero();
    Fe w = Fe::one();
    Fe base = Fe::from_u64(256);
    for (size_t i = 0; i < n; ++i) {
        CellRef slot{strip.cols[0], row + i};
        Fe v = s.value(cells[i]);
        s.set(slot, v);
        s.builder().add_copy(cells[i], slot);
        acc += w * v;
        w *= base;
    }
    CellRef out{strip.cols[1], row};
    s.set(out, acc);
    s.builder().enable_gate(s.gate(key, {}), row);
    return out;
}

}  // namespace zkimg
