#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "zkimg/checker.hpp"
#include "zkimg/circuit.hpp"
#include "zkimg/layout_io.hpp"

using namespace zkimg;

namespace {

// The toy system: prove knowledge of a, b, c with a + b = 5, a + c = 7 and
// a in {0..3}. Column 0 holds a twice (tied by a copy), column 1 holds b and
// c, column 2 is public, column 3 is the range table.
struct ToyCircuit {
    CircuitLayout layout;
    uint32_t col_a = 0, col_bc = 1, col_pub = 2, col_tab = 3;

    static ToyCircuit build(bool enable_gate_row0 = true, bool enable_gate_row1 = true) {
        CircuitBuilder cb(9, 6);
        Column a = cb.add_column(ColumnKind::advice);
        Column bc = cb.add_column(ColumnKind::advice);
        Column pub = cb.add_column(ColumnKind::instance);
        Column tab = cb.add_column(ColumnKind::fixed);

        for (uint64_t i = 0; i < 4; ++i) cb.assign_fixed({tab.index, i}, Fe::from_u64(i));

        GateId sum = cb.add_gate(
            "row_sum", {Expr::cell(a.index) + Expr::cell(bc.index) - Expr::cell(pub.index)});
        if (enable_gate_row0) cb.enable_gate(sum, 0);
        if (enable_gate_row1) cb.enable_gate(sum, 1);

        cb.add_lookup("a_range", {Expr::cell(a.index)}, {tab.index});
        cb.add_copy({a.index, 0}, {a.index, 1});

        cb.expose_instance({pub.index, 0});
        cb.expose_instance({pub.index, 1});

        ToyCircuit t;
        t.layout = std::move(cb).finalize();
        return t;
    }

    WitnessGrid witness(uint64_t a, uint64_t b, uint64_t c) const {
        WitnessGrid w = WitnessGrid::for_layout(layout);
        w.set({col_a, 0}, Fe::from_u64(a));
        w.set({col_a, 1}, Fe::from_u64(a));
        w.set({col_bc, 0}, Fe::from_u64(b));
        w.set({col_bc, 1}, Fe::from_u64(c));
        return w;
    }

    std::vector<Fe> instance() const { return {Fe::from_u64(5), Fe::from_u64(7)}; }
};

}  // namespace

TEST_CASE("builder construction limits") {
    CHECK_NOTHROW(CircuitBuilder(9));
    CHECK_NOTHROW(CircuitBuilder(3));
    CHECK_THROWS_AS(CircuitBuilder(2), Error);
    try {
        CircuitBuilder cb(2);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degree_too_small);
    }
}

TEST_CASE("empty builder pads to one row") {
    CircuitBuilder cb(9);
    cb.add_column(ColumnKind::advice);
    CircuitLayout l = std::move(cb).finalize();
    CHECK(l.rows == 1);
    CHECK(l.used_rows == 0);
}

TEST_CASE("finalize rejects column-free circuits") {
    CircuitBuilder cb(9);
    CHECK_THROWS_AS(std::move(cb).finalize(), Error);
}

TEST_CASE("toy system: satisfying witness passes") {
    ToyCircuit t = ToyCircuit::build();
    // table 4 entries + 6 blinding = 10 usable rows needed -> 16
    CHECK(t.layout.rows == 16);

    auto report = check_constraints(t.layout, t.witness(2, 3, 5), t.instance());
    INFO(report.summary());
    CHECK(report.satisfied);
}

TEST_CASE("toy system: out-of-range a trips only the lookup") {
    ToyCircuit t = ToyCircuit::build();
    // a=4 with b=1, c=3 keeps both sums correct; only membership fails.
    auto report = check_constraints(t.layout, t.witness(4, 1, 3), t.instance());
    REQUIRE_FALSE(report.satisfied);
    for (const auto& v : report.violations) CHECK(v.kind == Violation::Kind::lookup);
    // a appears (and is out of range) on rows 0 and 1.
    CHECK(report.total_violations == 2);
    CHECK(report.violations[0].row == 0);
    CHECK(report.violations[1].row == 1);
}

TEST_CASE("toy system: wrong b trips the gate at row 0") {
    ToyCircuit t = ToyCircuit::build();
    auto report = check_constraints(t.layout, t.witness(2, 4, 5), t.instance());
    REQUIRE_FALSE(report.satisfied);
    REQUIRE(report.total_violations == 1);
    CHECK(report.violations[0].kind == Violation::Kind::gate);
    CHECK(report.violations[0].row == 0);
}

TEST_CASE("toy system: broken copy is reported as a copy violation") {
    ToyCircuit t = ToyCircuit::build(false, false);  // gates off: isolate the copy
    WitnessGrid w = WitnessGrid::for_layout(t.layout);
    w.set({t.col_a, 0}, Fe::from_u64(2));
    w.set({t.col_a, 1}, Fe::from_u64(3));
    auto report = check_constraints(t.layout, w, t.instance());
    REQUIRE_FALSE(report.satisfied);
    bool saw_copy = false;
    for (const auto& v : report.violations) saw_copy |= v.kind == Violation::Kind::copy;
    CHECK(saw_copy);
}

TEST_CASE("disabling the selector on the violating row removes exactly that violation") {
    ToyCircuit bad = ToyCircuit::build();
    auto before = check_constraints(bad.layout, bad.witness(2, 4, 5), bad.instance());
    REQUIRE(before.total_violations == 1);
    REQUIRE(before.violations[0].row == 0);

    ToyCircuit fixed = ToyCircuit::build(false, true);  // row 0 deselected
    auto after = check_constraints(fixed.layout, fixed.witness(2, 4, 5), fixed.instance());
    CHECK(after.satisfied);
}

TEST_CASE("gate never enabled is satisfied by any witness") {
    CircuitBuilder cb(9);
    Column x = cb.add_column(ColumnKind::advice);
    cb.add_gate("never", {Expr::cell(x.index) * Expr::cell(x.index) - 1});
    cb.touch(4);
    CircuitLayout l = std::move(cb).finalize();
    WitnessGrid w = WitnessGrid::for_layout(l);
    auto r = test::rng(7);
    for (uint64_t i = 0; i < l.rows; ++i) w.set({x.index, i}, Fe::random(r));
    CHECK(check_constraints(l, w, {}).satisfied);
}

TEST_CASE("range gate x(x-1)(x-2)(x-3)") {
    auto build = [](uint64_t value) {
        CircuitBuilder cb(9);
        Column x = cb.add_column(ColumnKind::advice);
        Expr e = Expr::cell(x.index);
        GateId g = cb.add_gate("range4", {e * (e - 1) * (e - 2) * (e - 3)});
        cb.enable_gate(g, 0);
        CircuitLayout l = std::move(cb).finalize();
        WitnessGrid w = WitnessGrid::for_layout(l);
        w.set({x.index, 0}, Fe::from_u64(value));
        return check_constraints(l, w, {});
    };
    CHECK(build(0).satisfied);
    CHECK(build(2).satisfied);
    CHECK(build(3).satisfied);
    auto report = build(5);
    REQUIRE_FALSE(report.satisfied);
    CHECK(report.violations[0].kind == Violation::Kind::gate);
}

TEST_CASE("copy transitivity: three-cell class") {
    CircuitBuilder cb(9);
    Column x = cb.add_column(ColumnKind::advice);
    cb.add_copy({x.index, 0}, {x.index, 1});
    cb.add_copy({x.index, 1}, {x.index, 2});
    CircuitLayout l = std::move(cb).finalize();
    REQUIRE(l.copy_classes.size() == 1);
    CHECK(l.copy_classes[0].size() == 3);

    WitnessGrid w = WitnessGrid::for_layout(l);
    w.set({x.index, 0}, Fe::from_u64(1));
    w.set({x.index, 1}, Fe::from_u64(1));
    w.set({x.index, 2}, Fe::from_u64(9));
    auto report = check_constraints(l, w, {});
    REQUIRE_FALSE(report.satisfied);
    CHECK(report.violations[0].kind == Violation::Kind::copy);
}

TEST_CASE("copy of a cell to itself is a no-op") {
    CircuitBuilder cb(9);
    Column x = cb.add_column(ColumnKind::advice);
    cb.add_copy({x.index, 0}, {x.index, 0});
    CircuitLayout l = std::move(cb).finalize();
    CHECK(l.copy_classes.empty());
}

TEST_CASE("copy class containing an instance slot reports kind=instance") {
    CircuitBuilder cb(9);
    Column x = cb.add_column(ColumnKind::advice);
    Column inst = cb.add_column(ColumnKind::instance);
    cb.expose_instance({inst.index, 0});
    cb.add_copy({x.index, 0}, {inst.index, 0});
    CircuitLayout l = std::move(cb).finalize();

    WitnessGrid w = WitnessGrid::for_layout(l);
    w.set({x.index, 0}, Fe::from_u64(10));
    CHECK(check_constraints(l, w, {Fe::from_u64(10)}).satisfied);
    auto report = check_constraints(l, w, {Fe::from_u64(11)});
    REQUIRE_FALSE(report.satisfied);
    CHECK(report.violations[0].kind == Violation::Kind::instance);
}

TEST_CASE("padding: 2^k + 1 used rows pads to 2^(k+1)") {
    CircuitBuilder cb(9);
    cb.add_column(ColumnKind::advice);
    cb.touch(9);  // 2^3 + 1
    CircuitLayout l = std::move(cb).finalize();
    CHECK(l.rows == 16);
}

TEST_CASE("padding: tables reserve blinding rows") {
    // 7 used rows, t=6, largest table 4 entries: max(7, 4+6) = 10 -> 16 rows.
    CircuitBuilder cb(9, 6);
    Column a = cb.add_column(ColumnKind::advice);
    Column tab = cb.add_column(ColumnKind::fixed);
    for (uint64_t i = 0; i < 4; ++i) cb.assign_fixed({tab.index, i}, Fe::from_u64(i));
    cb.add_lookup("r", {Expr::cell(a.index)}, {tab.index});
    cb.touch(7);
    CircuitLayout l = std::move(cb).finalize();
    CHECK(l.rows == 16);
    CHECK(l.lookups[0].entries == 4);
}

TEST_CASE("padding formula covers the 2^24-entry table rule") {
    CHECK(padded_rows(0, uint64_t(1) << 24, 6) == uint64_t(1) << 25);
    CHECK(padded_rows(100, 0, 6) == 128);
    CHECK(padded_rows(1, 0, 6) == 1);
    CHECK(padded_rows((uint64_t(1) << 10) + 1, 0, 6) == uint64_t(1) << 11);
}

TEST_CASE("rows are always a power of two and cover usage") {
    auto r = test::rng(11);
    for (int i = 0; i < 50; ++i) {
        uint64_t used = r() % 5000;
        uint64_t entries = r() % 3000;
        uint64_t t = r() % 10;
        uint64_t rows = padded_rows(used, entries, t);
        CHECK((rows & (rows - 1)) == 0);
        CHECK(rows >= std::max<uint64_t>(1, used));
        if (entries) CHECK(rows >= entries + t);
    }
}

TEST_CASE("builder error paths") {
    CircuitBuilder cb(9);
    Column a = cb.add_column(ColumnKind::advice);
    Column f = cb.add_column(ColumnKind::fixed);

    SECTION("copy to unknown column is OutOfGrid") {
        CHECK_THROWS_AS(cb.add_copy({a.index, 0}, {99, 0}), Error);
    }
    SECTION("lookup with non-fixed table column") {
        try {
            cb.add_lookup("bad", {Expr::cell(a.index)}, {a.index});
            FAIL("expected NotFixedColumn");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::not_fixed_column);
        }
    }
    SECTION("lookup with no inputs") {
        try {
            cb.add_lookup("empty", {}, {f.index});
            FAIL("expected InvalidLookup");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::invalid_lookup);
        }
    }
    SECTION("gate over the degree budget") {
        Expr e = Expr::cell(a.index);
        Expr p = e;
        for (int i = 0; i < 8; ++i) p = p * e;  // degree 9, +1 selector = 10 > 9
        try {
            cb.add_gate("too_big", {p});
            FAIL("expected DegreeExceeded");
        } catch (const Error& e2) {
            CHECK(e2.code() == Errc::degree_exceeded);
        }
    }
    SECTION("gate rotation below row zero") {
        GateId g = cb.add_gate("back", {Expr::cell(a.index, -1)});
        CHECK_THROWS_AS(cb.enable_gate(g, 0), Error);
        CHECK_NOTHROW(cb.enable_gate(g, 1));
    }
}

TEST_CASE("checker dimension validation") {
    ToyCircuit t = ToyCircuit::build();
    WitnessGrid w = t.witness(2, 3, 5);
    SECTION("wrong instance arity") {
        CHECK_THROWS_AS(check_constraints(t.layout, w, {Fe::from_u64(5)}), Error);
    }
    SECTION("wrong row count") {
        w.rows += 1;
        CHECK_THROWS_AS(check_constraints(t.layout, w, t.instance()), Error);
    }
}

TEST_CASE("checker is deterministic and thread-count independent") {
    ToyCircuit t = ToyCircuit::build();
    auto w = t.witness(4, 1, 3);
    auto a = check_constraints(t.layout, w, t.instance());
    auto b = check_constraints(t.layout, w, t.instance(), {.threads = 4});
    CHECK(a.satisfied == b.satisfied);
    CHECK(a.total_violations == b.total_violations);
    REQUIRE(a.violations.size() == b.violations.size());
    for (size_t i = 0; i < a.violations.size(); ++i) {
        CHECK(a.violations[i].kind == b.violations[i].kind);
        CHECK(a.violations[i].index == b.violations[i].index);
        CHECK(a.violations[i].row == b.violations[i].row);
    }
}

TEST_CASE("metamorphic soundness: flipping any pinned advice cell breaks satisfaction") {
    ToyCircuit t = ToyCircuit::build();
    WitnessGrid w = t.witness(2, 3, 5);
    REQUIRE(check_constraints(t.layout, w, t.instance()).satisfied);

    auto cells = strictly_constrained_advice_cells(t.layout);
    REQUIRE_FALSE(cells.empty());
    auto r = test::rng(13);
    for (const CellRef& c : cells) {
        Fe before = w.at(c);
        Fe delta = Fe::random(r);
        if (delta.is_zero()) delta = Fe::one();
        w.set(c, before + delta);
        auto report = check_constraints(t.layout, w, t.instance());
        INFO("cell (" << c.col << "," << c.row << ")");
        CHECK_FALSE(report.satisfied);
        w.set(c, before);
    }
}

TEST_CASE("layout serialization round trip") {
    ToyCircuit t = ToyCircuit::build();
    auto bytes = layout_io::encode(t.layout);
    CircuitLayout back = layout_io::decode(bytes);

    CHECK(back.describe() == t.layout.describe());
    CHECK(layout_io::encode(back) == bytes);

    // Decoded layout checks identically.
    auto w = t.witness(2, 3, 5);
    CHECK(check_constraints(back, w, t.instance()).satisfied);
    auto bad = check_constraints(back, t.witness(2, 4, 5), t.instance());
    CHECK(bad.total_violations == 1);
}

TEST_CASE("layout decode rejects corrupt bytes") {
    ToyCircuit t = ToyCircuit::build();
    auto bytes = layout_io::encode(t.layout);
    bytes.resize(bytes.size() / 2);
    CHECK_THROWS_AS(layout_io::decode(bytes), Error);

    std::vector<uint8_t> garbage = {0x00, 0x01, 0x02};
    CHECK_THROWS_AS(layout_io::decode(garbage), Error);
}
