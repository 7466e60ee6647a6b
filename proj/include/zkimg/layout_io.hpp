#pragma once

#include "zkimg/circuit.hpp"
#include "zkimg/serial.hpp"

namespace zkimg {

// Versioned binary encoding of a compiled CircuitLayout. The serialized form
// identifies the computation to a verifier, so it must be stable and
// bit-exact; bump the version on any change.
namespace layout_io {

inline constexpr uint32_t magic = 0x59414c5a;  // "ZLAY"
inline constexpr uint16_t version = 1;

namespace detail {

inline void write_expr(ByteWriter& w, const Expr& e) {
    // postfix node stream, terminated by an end marker
    struct V {
        ByteWriter& w;
        void walk(const Expr::Node* n) {
            switch (n->op) {
                case Expr::Op::constant:
                    w.u8(0);
                    w.fe(n->k);
                    return;
                case Expr::Op::cell:
                    w.u8(1);
                    w.u32(n->col);
                    w.i32(n->rot);
                    return;
                case Expr::Op::add:
                case Expr::Op::mul:
                    walk(n->a.get());
                    walk(n->b.get());
                    w.u8(n->op == Expr::Op::add ? 2 : 3);
                    return;
                case Expr::Op::neg:
                    walk(n->a.get());
                    w.u8(4);
                    return;
                case Expr::Op::scale:
                    walk(n->a.get());
                    w.u8(5);
                    w.fe(n->k);
                    return;
            }
        }
    } v{w};
    v.walk(e.root().get());
    w.u8(255);
}

inline Expr read_expr(ByteReader& r) {
    std::vector<Expr> stack;
    for (;;) {
        uint8_t tag = r.u8();
        if (tag == 255) break;
        switch (tag) {
            case 0:
                stack.push_back(Expr::constant(r.fe()));
                break;
            case 1: {
                uint32_t col = r.u32();
                int32_t rot = r.i32();
                stack.push_back(Expr::cell(col, rot));
                break;
            }
            case 2:
            case 3: {
                if (stack.size() < 2) fail(Errc::malformed_bundle, "bad expression encoding");
                Expr b = stack.back();
                stack.pop_back();
                Expr a = stack.back();
                stack.pop_back();
                stack.push_back(tag == 2 ? a + b : a * b);
                break;
            }
            case 4: {
                if (stack.empty()) fail(Errc::malformed_bundle, "bad expression encoding");
                Expr a = stack.back();
                stack.pop_back();
                stack.push_back(-a);
                break;
            }
            case 5: {
                if (stack.empty()) fail(Errc::malformed_bundle, "bad expression encoding");
                Expr a = stack.back();
                stack.pop_back();
                stack.push_back(a.scaled(r.fe()));
                break;
            }
            default:
                fail(Errc::malformed_bundle, "unknown expression node tag");
        }
    }
    if (stack.size() != 1) fail(Errc::malformed_bundle, "bad expression encoding");
    return stack[0];
}

}  // namespace detail

inline void write(ByteWriter& w, const CircuitLayout& l) {
    w.u32(magic);
    w.u16(version);
    w.u32(l.max_degree);
    w.u64(l.blinding_rows);
    w.u64(l.rows);
    w.u64(l.used_rows);

    w.u32(static_cast<uint32_t>(l.columns.size()));
    for (auto k : l.columns) w.u8(static_cast<uint8_t>(k));

    w.u32(static_cast<uint32_t>(l.gates.size()));
    for (const CustomGate& g : l.gates) {
        w.str(g.name);
        w.u32(g.selector);
        w.u32(static_cast<uint32_t>(g.polys.size()));
        for (const Expr& p : g.polys) detail::write_expr(w, p);
    }

    w.u32(static_cast<uint32_t>(l.lookups.size()));
    for (const LookupArgument& lk : l.lookups) {
        w.str(lk.name);
        w.u32(static_cast<uint32_t>(lk.inputs.size()));
        for (const Expr& e : lk.inputs) detail::write_expr(w, e);
        w.u32(static_cast<uint32_t>(lk.table.size()));
        for (uint32_t c : lk.table) w.u32(c);
        w.u64(lk.entries);
    }

    for (uint32_t c = 0; c < l.columns.size(); ++c) {
        if (l.columns[c] != ColumnKind::fixed && l.columns[c] != ColumnKind::selector) continue;
        w.u32(static_cast<uint32_t>(l.col_runs[c].size()));
        for (const FixedRun& run : l.col_runs[c]) {
            w.u64(run.start);
            w.u64(run.stride);
            w.u64(run.count);
            w.fe(run.value);
        }
    }

    w.u64(l.copy_classes.size());
    for (const auto& cls : l.copy_classes) {
        w.u32(static_cast<uint32_t>(cls.size()));
        for (const CellRef& c : cls) {
            w.u32(c.col);
            w.u64(c.row);
        }
    }

    w.u32(static_cast<uint32_t>(l.instance_slots.size()));
    for (const CellRef& c : l.instance_slots) {
        w.u32(c.col);
        w.u64(c.row);
    }
}

inline CircuitLayout read(ByteReader& r) {
    if (r.u32() != magic) fail(Errc::malformed_bundle, "bad layout magic");
    if (r.u16() != version) fail(Errc::malformed_bundle, "unsupported layout version");

    CircuitLayout l;
    l.max_degree = r.u32();
    l.blinding_rows = r.u64();
    l.rows = r.u64();
    l.used_rows = r.u64();

    uint32_t ncols = r.u32();
    l.columns.reserve(ncols);
    for (uint32_t i = 0; i < ncols; ++i) {
        uint8_t k = r.u8();
        if (k > 3) fail(Errc::malformed_bundle, "bad column kind");
        l.columns.push_back(static_cast<ColumnKind>(k));
    }
    l.col_runs.resize(ncols);

    uint32_t ngates = r.u32();
    for (uint32_t i = 0; i < ngates; ++i) {
        CustomGate g;
        g.name = r.str();
        g.selector = r.u32();
        uint32_t npolys = r.u32();
        for (uint32_t j = 0; j < npolys; ++j) g.polys.push_back(detail::read_expr(r));
        for (const Expr& p : g.polys) g.tapes.push_back(p.compile());
        if (g.selector >= ncols || l.columns[g.selector] != ColumnKind::selector)
            fail(Errc::malformed_bundle, "gate selector is not a selector column");
        l.gates.push_back(std::move(g));
    }

    uint32_t nlookups = r.u32();
    for (uint32_t i = 0; i < nlookups; ++i) {
        LookupArgument lk;
        lk.name = r.str();
        uint32_t nin = r.u32();
        for (uint32_t j = 0; j < nin; ++j) lk.inputs.push_back(detail::read_expr(r));
        uint32_t ntab = r.u32();
        for (uint32_t j = 0; j < ntab; ++j) {
            uint32_t c = r.u32();
            if (c >= ncols || l.columns[c] != ColumnKind::fixed)
                fail(Errc::malformed_bundle, "lookup table column is not fixed");
            lk.table.push_back(c);
        }
        lk.entries = r.u64();
        for (const Expr& e : lk.inputs) lk.tapes.push_back(e.compile());
        l.lookups.push_back(std::move(lk));
    }

    for (uint32_t c = 0; c < ncols; ++c) {
        if (l.columns[c] != ColumnKind::fixed && l.columns[c] != ColumnKind::selector) continue;
        uint32_t nruns = r.u32();
        for (uint32_t i = 0; i < nruns; ++i) {
            FixedRun run;
            run.start = r.u64();
            run.stride = r.u64();
            run.count = r.u64();
            run.value = r.fe();
            if (run.stride == 0 || (run.count > 0 &&
                                    run.start + run.stride * (run.count - 1) >= l.rows))
                fail(Errc::malformed_bundle, "fixed run exceeds grid");
            l.col_runs[c].push_back(run);
        }
    }

    uint64_t nclasses = r.u64();
    for (uint64_t i = 0; i < nclasses; ++i) {
        uint32_t n = r.u32();
        std::vector<CellRef> cls;
        cls.reserve(n);
        for (uint32_t j = 0; j < n; ++j) {
            CellRef c{r.u32(), r.u64()};
            if (c.col >= ncols || c.row >= l.rows)
                fail(Errc::malformed_bundle, "copy cell exceeds grid");
            cls.push_back(c);
        }
        if (cls.size() < 2) fail(Errc::malformed_bundle, "degenerate copy class");
        l.copy_classes.push_back(std::move(cls));
    }

    uint32_t nslots = r.u32();
    for (uint32_t i = 0; i < nslots; ++i) {
        CellRef c{r.u32(), r.u64()};
        if (c.col >= ncols || l.columns[c.col] != ColumnKind::instance || c.row >= l.rows)
            fail(Errc::malformed_bundle, "instance slot exceeds grid");
        l.instance_slots.push_back(c);
    }
    return l;
}

inline std::vector<uint8_t> encode(const CircuitLayout& l) {
    ByteWriter w;
    write(w, l);
    return std::move(w).take();
}

inline CircuitLayout decode(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    CircuitLayout l = read(r);
    return l;
}

}  // namespace layout_io
}  // namespace zkimg
