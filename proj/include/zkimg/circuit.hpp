#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "zkimg/expr.hpp"
#include "zkimg/field.hpp"

namespace zkimg {

enum class ColumnKind : uint8_t { advice, fixed, instance, selector };

inline const char* column_kind_name(ColumnKind k) {
    switch (k) {
        case ColumnKind::advice: return "advice";
        case ColumnKind::fixed: return "fixed";
        case ColumnKind::instance: return "instance";
        case ColumnKind::selector: return "selector";
    }
    return "?";
}

struct Column {
    uint32_t index = 0;
    ColumnKind kind = ColumnKind::advice;
};

struct CellRef {
    uint32_t col = 0;
    uint64_t row = 0;

    bool operator==(const CellRef&) const = default;
    auto operator<=>(const CellRef&) const = default;
};

// Selector enables and fixed assignments are stored as strided runs; image
// circuits assign them in arithmetic progressions, so runs keep layouts small
// on disk and cheap to build.
struct FixedRun {
    uint64_t start = 0;
    uint64_t stride = 1;
    uint64_t count = 0;
    Fe value;
};

struct CustomGate {
    std::string name;
    uint32_t selector = 0;  // dedicated selector column
    std::vector<Expr> polys;
    std::vector<std::vector<Expr::Instr>> tapes;  // compiled at finalize
};

struct LookupArgument {
    std::string name;
    std::vector<Expr> inputs;
    std::vector<uint32_t> table;  // fixed columns holding the entries
    uint64_t entries = 0;         // resolved at finalize from table assignments
    std::vector<std::vector<Expr::Instr>> tapes;
};

using GateId = uint32_t;
using LookupId = uint32_t;

// Union-find partition over declared cell equalities.
class CopySets {
  public:
    void unite(CellRef a, CellRef b) {
        uint32_t ia = index_of(a), ib = index_of(b);
        uint32_t ra = find(ia), rb = find(ib);
        if (ra != rb) parent_[rb] = ra;
    }

    bool empty() const { return cells_.empty(); }
    size_t cell_count() const { return cells_.size(); }

    // Equivalence classes with >= 2 members, deterministically ordered.
    std::vector<std::vector<CellRef>> classes() const {
        std::unordered_map<uint32_t, std::vector<CellRef>> by_root;
        for (uint32_t i = 0; i < cells_.size(); ++i) by_root[find(i)].push_back(cells_[i]);
        std::vector<std::vector<CellRef>> out;
        for (auto& [root, members] : by_root) {
            if (members.size() < 2) continue;
            std::sort(members.begin(), members.end());
            out.push_back(std::move(members));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void for_each_cell(auto&& fn) const {
        for (const CellRef& c : cells_) fn(c);
    }

  private:
    static uint64_t key(CellRef c) { return (static_cast<uint64_t>(c.col) << 44) | c.row; }

    uint32_t index_of(CellRef c) {
        auto [it, inserted] = index_.try_emplace(key(c), static_cast<uint32_t>(cells_.size()));
        if (inserted) {
            cells_.push_back(c);
            parent_.push_back(it->second);
        }
        return it->second;
    }

    uint32_t find(uint32_t i) const {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    std::unordered_map<uint64_t, uint32_t> index_;
    mutable std::vector<uint32_t> parent_;
    std::vector<CellRef> cells_;
};

// Compiled, immutable circuit description: columns, gates, lookups, copy
// classes, fixed data, and the public instance slots. Serialized, this plays
// the role of a verification key - it encodes what was computed.
struct CircuitLayout {
    uint32_t max_degree = 9;
    uint64_t blinding_rows = 6;
    uint64_t rows = 1;       // power of two
    uint64_t used_rows = 0;  // rows carrying constrained values
    std::vector<ColumnKind> columns;
    std::vector<CustomGate> gates;
    std::vector<LookupArgument> lookups;
    std::vector<std::vector<FixedRun>> col_runs;  // per column; empty for advice/instance
    std::vector<std::vector<CellRef>> copy_classes;
    std::vector<CellRef> instance_slots;

    size_t count_columns(ColumnKind k) const {
        size_t n = 0;
        for (auto c : columns) n += (c == k);
        return n;
    }

    uint64_t total_cells() const { return rows * columns.size(); }

    // Dense per-row expansion of one fixed/selector column.
    template <typename T>
    std::vector<T> expand_column(uint32_t col) const {
        std::vector<T> out(rows, T{});
        for (const FixedRun& run : col_runs[col]) {
            uint64_t r = run.start;
            for (uint64_t i = 0; i < run.count; ++i, r += run.stride) {
                if constexpr (std::is_same_v<T, Fe>) {
                    out[r] = run.value;
                } else {
                    out[r] = static_cast<T>(run.value.as_u64());
                }
            }
        }
        return out;
    }

    std::string describe() const {
        std::ostringstream os;
        os << "rows " << rows << " (used " << used_rows << "), blinding " << blinding_rows
           << ", max_degree " << max_degree << "\n";
        os << "columns:";
        for (size_t i = 0; i < columns.size(); ++i)
            os << " " << i << ":" << column_kind_name(columns[i]);
        os << "\n";
        for (size_t i = 0; i < gates.size(); ++i)
            os << "gate " << i << " '" << gates[i].name << "' selector col " << gates[i].selector
               << ", " << gates[i].polys.size() << " polys\n";
        for (size_t i = 0; i < lookups.size(); ++i) {
            os << "lookup " << i << " '" << lookups[i].name << "' " << lookups[i].inputs.size()
               << " inputs, table cols";
            for (auto c : lookups[i].table) os << " " << c;
            os << " (" << lookups[i].entries << " entries)\n";
        }
        os << copy_classes.size() << " copy classes, " << instance_slots.size()
           << " instance slots\n";
        return os.str();
    }
};

// Private assignment to the advice cells of one circuit execution.
struct WitnessGrid {
    uint64_t rows = 0;
    std::vector<std::vector<Fe>> advice;  // indexed by column id; empty for non-advice

    static WitnessGrid for_layout(const CircuitLayout& layout) {
        WitnessGrid w;
        w.rows = layout.rows;
        w.advice.resize(layout.columns.size());
        for (size_t c = 0; c < layout.columns.size(); ++c)
            if (layout.columns[c] == ColumnKind::advice) w.advice[c].assign(layout.rows, Fe());
        return w;
    }

    const Fe& at(CellRef c) const { return advice[c.col][c.row]; }
    void set(CellRef c, const Fe& v) { advice[c.col][c.row] = v; }
};

struct Violation {
    enum class Kind : uint8_t { gate, lookup, copy, instance };
    Kind kind;
    uint32_t index = 0;  // gate/lookup/class index
    uint64_t row = 0;    // row for gate/lookup; unused for copy classes
    std::string detail;

    auto sort_key() const { return std::tuple(static_cast<int>(kind), index, row); }
};

inline const char* violation_kind_name(Violation::Kind k) {
    switch (k) {
        case Violation::Kind::gate: return "gate";
        case Violation::Kind::lookup: return "lookup";
        case Violation::Kind::copy: return "copy";
        case Violation::Kind::instance: return "instance";
    }
    return "?";
}

struct SatisfactionReport {
    bool satisfied = true;
    uint64_t total_violations = 0;
    std::vector<Violation> violations;  // capped; total_violations has the full count

    static constexpr size_t max_recorded = 256;

    void add(Violation v) {
        satisfied = false;
        ++total_violations;
        if (violations.size() < max_recorded) violations.push_back(std::move(v));
    }

    std::string summary() const {
        if (satisfied) return "satisfied";
        std::ostringstream os;
        os << total_violations << " violation(s)";
        for (size_t i = 0; i < violations.size() && i < 8; ++i) {
            const auto& v = violations[i];
            os << "; " << violation_kind_name(v.kind) << "[" << v.index << "]";
            if (v.kind == Violation::Kind::gate || v.kind == Violation::Kind::lookup)
                os << " row " << v.row;
            if (!v.detail.empty()) os << " (" << v.detail << ")";
        }
        return os.str();
    }
};

inline uint64_t next_pow2(uint64_t n) {
    uint64_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Grid padding rule: rows must be a power of two covering all used rows and
// every lookup table including its blinding reserve.
inline uint64_t padded_rows(uint64_t used_rows, uint64_t max_table_entries, uint64_t blinding) {
    uint64_t need = std::max<uint64_t>(1, used_rows);
    if (max_table_entries > 0) need = std::max(need, max_table_entries + blinding);
    return next_pow2(need);
}

// Mutable circuit under construction. Single-owner; finalize() consumes it.
class CircuitBuilder {
  public:
    explicit CircuitBuilder(uint32_t max_degree = 9, uint64_t blinding_rows = 6)
        : max_degree_(max_degree), blinding_rows_(blinding_rows) {
        if (max_degree < 3) fail(Errc::degree_too_small, "max polynomial degree must be >= 3");
    }

    uint32_t max_degree() const { return max_degree_; }
    uint64_t blinding_rows() const { return blinding_rows_; }

    Column add_column(ColumnKind kind) {
        uint32_t idx = static_cast<uint32_t>(columns_.size());
        columns_.push_back(kind);
        col_runs_.emplace_back();
        return Column{idx, kind};
    }

    size_t column_count() const { return columns_.size(); }
    ColumnKind column_kind(uint32_t col) const { return columns_.at(col); }

    // Registers a gate; a dedicated selector column is allocated and the
    // checker evaluates selector * poly, so a poly of degree d uses d+1 of
    // the degree budget.
    GateId add_gate(const std::string& name, std::vector<Expr> polys) {
        if (polys.empty()) fail(Errc::invalid_params, "gate '" + name + "' has no polynomials");
        for (const Expr& p : polys) {
            if (p.degree() + 1 > max_degree_)
                fail(Errc::degree_exceeded, "gate '" + name + "' degree " +
                                                std::to_string(p.degree()) +
                                                " + selector exceeds max degree " +
                                                std::to_string(max_degree_));
            check_cols_exist(p, "gate '" + name + "'");
        }
        Column sel = add_column(ColumnKind::selector);
        CustomGate g;
        g.name = name;
        g.selector = sel.index;
        g.polys = std::move(polys);
        gates_.push_back(std::move(g));
        return static_cast<GateId>(gates_.size() - 1);
    }

    void enable_gate(GateId id, uint64_t row) { enable_gate_run(id, row, 1, 1); }

    void enable_gate_run(GateId id, uint64_t start, uint64_t stride, uint64_t count) {
        if (count == 0) return;
        const CustomGate& g = gates_.at(id);
        int64_t max_rot = 0, min_rot = 0;
        for (const Expr& p : g.polys) {
            max_rot = std::max<int64_t>(max_rot, p.max_rotation());
            min_rot = std::min<int64_t>(min_rot, p.min_rotation());
        }
        if (static_cast<int64_t>(start) + min_rot < 0)
            fail(Errc::out_of_grid, "gate '" + g.name + "' rotation exits the grid at row " +
                                        std::to_string(start));
        uint64_t last = start + stride * (count - 1);
        touch(last + static_cast<uint64_t>(max_rot) + 1);
        col_runs_[g.selector].push_back({start, std::max<uint64_t>(stride, 1), count, Fe::one()});
    }

    // Lookup: on every row, the tuple of input expressions must appear among
    // the assigned entry rows of the table columns.
    LookupId add_lookup(const std::string& name, std::vector<Expr> inputs,
                        std::vector<uint32_t> table) {
        if (inputs.empty()) fail(Errc::invalid_lookup, "lookup '" + name + "' has no inputs");
        if (table.empty()) fail(Errc::invalid_lookup, "lookup '" + name + "' has no table columns");
        if (inputs.size() != table.size())
            fail(Errc::invalid_lookup, "lookup '" + name + "' arity mismatch: " +
                                           std::to_string(inputs.size()) + " inputs vs " +
                                           std::to_string(table.size()) + " table columns");
        for (uint32_t c : table) {
            if (c >= columns_.size() || columns_[c] != ColumnKind::fixed)
                fail(Errc::not_fixed_column,
                     "lookup '" + name + "' table column " + std::to_string(c) + " is not fixed");
        }
        for (const Expr& e : inputs) {
            check_cols_exist(e, "lookup '" + name + "'");
            if (e.max_rotation() != 0 || e.min_rotation() != 0)
                fail(Errc::invalid_lookup, "lookup '" + name + "' inputs must use rotation 0");
        }
        LookupArgument l;
        l.name = name;
        l.inputs = std::move(inputs);
        l.table = std::move(table);
        lookups_.push_back(std::move(l));
        return static_cast<LookupId>(lookups_.size() - 1);
    }

    // Declares two cells equal (symmetric/transitive closure maintained).
    void add_copy(CellRef a, CellRef b) {
        check_cell(a);
        check_cell(b);
        if (a == b) return;
        touch(a.row + 1);
        touch(b.row + 1);
        copies_.unite(a, b);
    }

    void assign_fixed(CellRef c, const Fe& v) {
        check_cell(c);
        if (columns_[c.col] != ColumnKind::fixed)
            fail(Errc::not_fixed_column,
                 "assign_fixed on non-fixed column " + std::to_string(c.col));
        assign_fixed_run(c.col, c.row, 1, 1, v);
    }

    void assign_fixed_run(uint32_t col, uint64_t start, uint64_t stride, uint64_t count,
                          const Fe& v) {
        if (count == 0) return;
        if (col >= columns_.size() || (columns_[col] != ColumnKind::fixed))
            fail(Errc::not_fixed_column, "fixed run on non-fixed column " + std::to_string(col));
        if (v.is_zero()) return;  // zero is the default
        uint64_t last = start + stride * (count - 1);
        touch(last + 1);
        col_runs_[col].push_back({start, std::max<uint64_t>(stride, 1), count, v});
    }

    // Exposes an instance-column cell as public slot; returns the slot index.
    uint32_t expose_instance(CellRef c) {
        check_cell(c);
        if (columns_[c.col] != ColumnKind::instance)
            fail(Errc::invalid_params, "instance slot must live in an instance column");
        touch(c.row + 1);
        instance_slots_.push_back(c);
        return static_cast<uint32_t>(instance_slots_.size() - 1);
    }

    // Extends the used-row extent (advice assignments are tracked by the
    // synthesis layer, which reports them here).
    void touch(uint64_t row_count) { used_rows_ = std::max(used_rows_, row_count); }

    // Declares how many rows of a fixed column are table entries, covering
    // trailing zero-valued entries that run-length storage would not reveal.
    void declare_table_extent(uint32_t col, uint64_t rows) {
        if (col >= columns_.size() || columns_[col] != ColumnKind::fixed)
            fail(Errc::not_fixed_column, "table extent on non-fixed column");
        table_extent_[col] = std::max(table_extent_[col], rows);
        touch(rows);
    }

    uint64_t used_rows() const { return used_rows_; }

    // Current entry count of a fixed column (max assigned row + 1).
    uint64_t column_extent(uint32_t col) const {
        uint64_t extent = 0;
        for (const FixedRun& r : col_runs_[col])
            extent = std::max(extent, r.start + r.stride * (r.count - 1) + 1);
        return extent;
    }

    CircuitLayout finalize() && {
        if (columns_.empty()) fail(Errc::invalid_params, "circuit has no columns");

        CircuitLayout layout;
        layout.max_degree = max_degree_;
        layout.blinding_rows = blinding_rows_;
        layout.columns = std::move(columns_);
        layout.gates = std::move(gates_);
        layout.lookups = std::move(lookups_);
        layout.col_runs = std::move(col_runs_);
        layout.instance_slots = std::move(instance_slots_);

        uint64_t max_entries = 0;
        for (LookupArgument& l : layout.lookups) {
            uint64_t entries = 0;
            for (uint32_t c : l.table) {
                uint64_t extent = 0;
                for (const FixedRun& r : layout.col_runs[c])
                    extent = std::max(extent, r.start + r.stride * (r.count - 1) + 1);
                auto it = table_extent_.find(c);
                if (it != table_extent_.end()) extent = std::max(extent, it->second);
                entries = std::max(entries, extent);
            }
            l.entries = entries;
            max_entries = std::max(max_entries, entries);
        }

        layout.used_rows = used_rows_;
        layout.rows = padded_rows(used_rows_, max_entries, blinding_rows_);

        for (CustomGate& g : layout.gates) {
            g.tapes.clear();
            for (const Expr& p : g.polys) g.tapes.push_back(p.compile());
        }
        for (LookupArgument& l : layout.lookups) {
            l.tapes.clear();
            for (const Expr& e : l.inputs) l.tapes.push_back(e.compile());
        }

        layout.copy_classes = copies_.classes();
        return layout;
    }

  private:
    void check_cell(CellRef c) const {
        if (c.col >= columns_.size())
            fail(Errc::out_of_grid, "cell references unknown column " + std::to_string(c.col));
    }

    void check_cols_exist(const Expr& e, const std::string& what) const {
        std::vector<std::pair<uint32_t, int32_t>> refs;
        e.collect_cols(refs);
        for (auto [col, rot] : refs) {
            (void)rot;
            if (col >= columns_.size())
                fail(Errc::out_of_grid, what + " references unknown column " + std::to_string(col));
        }
    }

    uint32_t max_degree_;
    uint64_t blinding_rows_;
    uint64_t used_rows_ = 0;
    std::map<uint32_t, uint64_t> table_extent_;
    std::vector<ColumnKind> columns_;
    std::vector<std::vector<FixedRun>> col_runs_;
    std::vector<CustomGate> gates_;
    std::vector<LookupArgument> lookups_;
    CopySets copies_;
    std::vector<CellRef> instance_slots_;
};

// Growable advice assignment used during synthesis, before the final row
// count is known. Frozen into a dense WitnessGrid after finalize.
class Assignments {
  public:
    explicit Assignments(CircuitBuilder& cb) : cb_(&cb) {}

    void set(CellRef c, const Fe& v) {
        if (cb_->column_kind(c.col) != ColumnKind::advice)
            fail(Errc::internal, "witness assignment to non-advice column");
        if (cols_.size() <= c.col) cols_.resize(c.col + 1);
        auto& col = cols_[c.col];
        if (col.size() <= c.row) col.resize(c.row + 1, Fe());
        col[c.row] = v;
        cb_->touch(c.row + 1);
    }

    Fe get(CellRef c) const {
        if (c.col < cols_.size() && c.row < cols_[c.col].size()) return cols_[c.col][c.row];
        return Fe();
    }

    WitnessGrid freeze(const CircuitLayout& layout) && {
        WitnessGrid w = WitnessGrid::for_layout(layout);
        for (size_t c = 0; c < cols_.size(); ++c) {
            if (cols_[c].empty()) continue;
            for (size_t r = 0; r < cols_[c].size(); ++r) w.advice[c][r] = cols_[c][r];
        }
        return w;
    }

  private:
    CircuitBuilder* cb_;
    std::vector<std::vector<Fe>> cols_;
};

}  // namespace zkimg
