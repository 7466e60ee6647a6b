#pragma once

#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "zkimg/circuit.hpp"

namespace zkimg {

struct CheckOptions {
    unsigned threads = 1;
};

namespace check_detail {

// Lookup tuples are at most a handful of elements; keep them inline.
struct Tuple {
    std::array<Fe, 4> v{};
    uint8_t n = 0;

    bool operator==(const Tuple& o) const {
        if (n != o.n) return false;
        for (uint8_t i = 0; i < n; ++i)
            if (v[i] != o.v[i]) return false;
        return true;
    }

    struct Hash {
        size_t operator()(const Tuple& t) const {
            size_t h = t.n;
            Fe::Hash fh;
            for (uint8_t i = 0; i < t.n; ++i) h ^= fh(t.v[i]) + 0x9e3779b9 + (h << 6) + (h >> 2);
            return h;
        }
    };
};

inline void parallel_rows(uint64_t begin, uint64_t end, unsigned threads, auto&& body) {
    uint64_t n = end > begin ? end - begin : 0;
    if (threads <= 1 || n < 4096) {
        body(begin, end);
        return;
    }
    unsigned workers = std::min<uint64_t>(threads, std::max<uint64_t>(1, n / 1024));
    std::vector<std::thread> pool;
    uint64_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        uint64_t lo = begin + t * chunk;
        uint64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace check_detail

// Evaluates every constraint of a compiled layout against a witness and the
// public instance values. This is the desk-scale stand-in for proving plus
// verification: a report instead of a succinct proof.
class ConstraintChecker {
  public:
    ConstraintChecker(const CircuitLayout& layout, const WitnessGrid& witness,
                      const std::vector<Fe>& instance)
        : layout_(layout), witness_(witness) {
        if (witness.rows != layout.rows)
            fail(Errc::dimension_mismatch,
                 "witness has " + std::to_string(witness.rows) + " rows, layout has " +
                     std::to_string(layout.rows));
        if (witness.advice.size() != layout.columns.size())
            fail(Errc::dimension_mismatch, "witness column count does not match layout");
        for (size_t c = 0; c < layout.columns.size(); ++c) {
            bool want = layout.columns[c] == ColumnKind::advice;
            if (want != !witness.advice[c].empty())
                fail(Errc::dimension_mismatch,
                     "witness advice columns do not match layout columns");
            if (want && witness.advice[c].size() != layout.rows)
                fail(Errc::dimension_mismatch, "witness column length does not match row count");
        }
        if (instance.size() != layout.instance_slots.size())
            fail(Errc::dimension_mismatch,
                 "instance has " + std::to_string(instance.size()) + " values, layout exposes " +
                     std::to_string(layout.instance_slots.size()) + " slots");

        fixed_.resize(layout.columns.size());
        selector_.resize(layout.columns.size());
        for (uint32_t c = 0; c < layout.columns.size(); ++c) {
            if (layout.columns[c] == ColumnKind::fixed)
                fixed_[c] = layout.expand_column<Fe>(c);
            else if (layout.columns[c] == ColumnKind::selector)
                selector_[c] = layout.expand_column<uint8_t>(c);
        }
        for (size_t i = 0; i < layout.instance_slots.size(); ++i)
            instance_vals_[cell_key(layout.instance_slots[i])] = instance[i];
    }

    Fe cell_value(uint32_t col, uint64_t row) const {
        switch (layout_.columns[col]) {
            case ColumnKind::advice: return witness_.advice[col][row];
            case ColumnKind::fixed: return fixed_[col][row];
            case ColumnKind::selector: return Fe::from_u64(selector_[col][row]);
            case ColumnKind::instance: {
                auto it = instance_vals_.find(cell_key({col, row}));
                return it == instance_vals_.end() ? Fe() : it->second;
            }
        }
        return Fe();
    }

    SatisfactionReport run(CheckOptions opts = {}) const {
        std::vector<Violation> all;
        std::atomic<uint64_t> total{0};
        std::mutex mu;

        auto sink = [&](std::vector<Violation>&& local, uint64_t count) {
            total += count;
            std::lock_guard<std::mutex> lock(mu);
            for (auto& v : local) {
                if (all.size() < SatisfactionReport::max_recorded * 4)
                    all.push_back(std::move(v));
            }
        };

        check_gates(opts, sink);
        check_lookups(opts, sink);
        check_copies(sink);

        SatisfactionReport report;
        std::sort(all.begin(), all.end(),
                  [](const Violation& a, const Violation& b) { return a.sort_key() < b.sort_key(); });
        if (all.size() > SatisfactionReport::max_recorded)
            all.resize(SatisfactionReport::max_recorded);
        report.violations = std::move(all);
        report.total_violations = total.load();
        report.satisfied = report.total_violations == 0;
        return report;
    }

  private:
    static uint64_t cell_key(CellRef c) { return (static_cast<uint64_t>(c.col) << 44) | c.row; }

    template <typename Sink>
    void check_gates(const CheckOptions& opts, Sink&& sink) const {
        for (uint32_t gi = 0; gi < layout_.gates.size(); ++gi) {
            const CustomGate& g = layout_.gates[gi];
            const auto& sel = selector_[g.selector];
            check_detail::parallel_rows(0, layout_.rows, opts.threads, [&](uint64_t lo,
                                                                           uint64_t hi) {
                std::vector<Violation> local;
                uint64_t count = 0;
                std::vector<Fe> stack;
                auto at = [this](uint32_t col, uint64_t row) { return cell_value(col, row); };
                for (uint64_t row = lo; row < hi; ++row) {
                    if (!sel[row]) continue;
                    for (size_t pi = 0; pi < g.tapes.size(); ++pi) {
                        Fe v = Expr::eval(g.tapes[pi], row, at, stack);
                        if (!v.is_zero()) {
                            ++count;
                            if (local.size() < SatisfactionReport::max_recorded)
                                local.push_back({Violation::Kind::gate, gi, row,
                                                 "gate '" + g.name + "' poly " +
                                                     std::to_string(pi) + " != 0"});
                        }
                    }
                }
                if (count) sink(std::move(local), count);
            });
        }
    }

    template <typename Sink>
    void check_lookups(const CheckOptions& opts, Sink&& sink) const {
        using check_detail::Tuple;
        for (uint32_t li = 0; li < layout_.lookups.size(); ++li) {
            const LookupArgument& l = layout_.lookups[li];
            std::unordered_set<Tuple, Tuple::Hash> table;
            table.reserve(l.entries * 2);
            for (uint64_t r = 0; r < l.entries; ++r) {
                Tuple t;
                t.n = static_cast<uint8_t>(l.table.size());
                for (size_t c = 0; c < l.table.size(); ++c) t.v[c] = fixed_[l.table[c]][r];
                table.insert(t);
            }
            check_detail::parallel_rows(0, layout_.rows, opts.threads, [&](uint64_t lo,
                                                                           uint64_t hi) {
                std::vector<Violation> local;
                uint64_t count = 0;
                std::vector<Fe> stack;
                auto at = [this](uint32_t col, uint64_t row) { return cell_value(col, row); };
                for (uint64_t row = lo; row < hi; ++row) {
                    Tuple t;
                    t.n = static_cast<uint8_t>(l.tapes.size());
                    for (size_t e = 0; e < l.tapes.size(); ++e)
                        t.v[e] = Expr::eval(l.tapes[e], row, at, stack);
                    if (!table.count(t)) {
                        ++count;
                        if (local.size() < SatisfactionReport::max_recorded)
                            local.push_back({Violation::Kind::lookup, li, row,
                                             "lookup '" + l.name + "' input not in table"});
                    }
                }
                if (count) sink(std::move(local), count);
            });
        }
    }

    template <typename Sink>
    void check_copies(Sink&& sink) const {
        std::vector<Violation> local;
        uint64_t count = 0;
        for (uint32_t ci = 0; ci < layout_.copy_classes.size(); ++ci) {
            const auto& cls = layout_.copy_classes[ci];
            bool has_instance = false;
            for (const CellRef& c : cls)
                if (layout_.columns[c.col] == ColumnKind::instance) has_instance = true;
            Fe first = cell_value(cls[0].col, cls[0].row);
            bool equal = true;
            for (size_t i = 1; i < cls.size(); ++i) {
                if (cell_value(cls[i].col, cls[i].row) != first) {
                    equal = false;
                    break;
                }
            }
            if (!equal) {
                ++count;
                std::string detail = "cells";
                for (size_t i = 0; i < cls.size() && i < 4; ++i)
                    detail += " (" + std::to_string(cls[i].col) + "," +
                              std::to_string(cls[i].row) + ")";
                if (cls.size() > 4) detail += " ...";
                detail += " disagree";
                local.push_back({has_instance ? Violation::Kind::instance : Violation::Kind::copy,
                                 ci, 0, std::move(detail)});
            }
        }
        if (count) sink(std::move(local), count);
    }

    const CircuitLayout& layout_;
    const WitnessGrid& witness_;
    std::vector<std::vector<Fe>> fixed_;
    std::vector<std::vector<uint8_t>> selector_;
    std::unordered_map<uint64_t, Fe> instance_vals_;
};

inline SatisfactionReport check_constraints(const CircuitLayout& layout,
                                            const WitnessGrid& witness,
                                            const std::vector<Fe>& instance,
                                            CheckOptions opts = {}) {
    return ConstraintChecker(layout, witness, instance).run(opts);
}

// Advice cells whose value is strictly pinned by some constraint: queried by
// an enabled gate, member of a copy class, or fed bare (cell or cell+const)
// into a lookup. Used by mutation/audit tests.
inline std::vector<CellRef> strictly_constrained_advice_cells(const CircuitLayout& layout) {
    std::unordered_set<uint64_t> seen;
    std::vector<CellRef> out;
    auto push = [&](CellRef c) {
        if (layout.columns[c.col] != ColumnKind::advice) return;
        uint64_t key = (static_cast<uint64_t>(c.col) << 44) | c.row;
        if (seen.insert(key).second) out.push_back(c);
    };

    for (const CustomGate& g : layout.gates) {
        std::vector<std::pair<uint32_t, int32_t>> refs;
        for (const Expr& p : g.polys) p.collect_cols(refs);
        for (const FixedRun& run : layout.col_runs[g.selector]) {
            uint64_t row = run.start;
            for (uint64_t i = 0; i < run.count; ++i, row += run.stride)
                for (auto [col, rot] : refs)
                    push({col, static_cast<uint64_t>(static_cast<int64_t>(row) + rot)});
        }
    }
    for (const auto& cls : layout.copy_classes)
        for (const CellRef& c : cls) push(c);

    for (const LookupArgument& l : layout.lookups) {
        for (const Expr& e : l.inputs) {
            // bare cell, optionally plus a constant
            const auto* n = e.root().get();
            const Expr::Node* cell = nullptr;
            if (n->op == Expr::Op::cell) {
                cell = n;
            } else if (n->op == Expr::Op::add) {
                const auto *a = n->a.get(), *b = n->b.get();
                if (a->op == Expr::Op::cell && b->op == Expr::Op::constant) cell = a;
                if (b->op == Expr::Op::cell && a->op == Expr::Op::constant) cell = b;
            }
            if (cell && layout.columns[cell->col] == ColumnKind::advice)
                for (uint64_t r = 0; r < layout.rows; ++r) push({cell->col, r});
        }
    }
    return out;
}

}  // namespace zkimg
