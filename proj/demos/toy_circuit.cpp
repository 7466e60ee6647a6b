// Walkthrough of the Plonkish building blocks on a toy statement: prove
// knowledge of a, b, c with a + b = 5, a + c = 7, and a in {0..3}, keeping
// a, b, c hidden. Run it to see the grid, the constraints, and what the
// checker reports for honest and dishonest witnesses.

#include <iostream>

#include "zkimg/checker.hpp"
#include "zkimg/circuit.hpp"

using namespace zkimg;

int main() {
    CircuitBuilder cb(/*max_degree=*/9, /*blinding_rows=*/6);

    // column 0: a (twice, tied by a copy constraint)
    // column 1: b then c
    // column 2: the public sums (5, 7)
    // column 3: fixed table {0,1,2,3}
    Column a = cb.add_column(ColumnKind::advice);
    Column bc = cb.add_column(ColumnKind::advice);
    Column pub = cb.add_column(ColumnKind::instance);
    Column tab = cb.add_column(ColumnKind::fixed);

    for (uint64_t i = 0; i < 4; ++i) cb.assign_fixed({tab.index, i}, Fe::from_u64(i));

    GateId sum = cb.add_gate(
        "row_sum", {Expr::cell(a.index) + Expr::cell(bc.index) - Expr::cell(pub.index)});
    cb.enable_gate(sum, 0);
    cb.enable_gate(sum, 1);

    cb.add_lookup("a_in_table", {Expr::cell(a.index)}, {tab.index});
    cb.add_copy({a.index, 0}, {a.index, 1});
    cb.expose_instance({pub.index, 0});
    cb.expose_instance({pub.index, 1});

    CircuitLayout layout = std::move(cb).finalize();
    std::cout << layout.describe() << "\n";

    auto witness_for = [&](uint64_t av, uint64_t bv, uint64_t cv) {
        WitnessGrid w = WitnessGrid::for_layout(layout);
        w.set({a.index, 0}, Fe::from_u64(av));
        w.set({a.index, 1}, Fe::from_u64(av));
        w.set({bc.index, 0}, Fe::from_u64(bv));
        w.set({bc.index, 1}, Fe::from_u64(cv));
        return w;
    };
    std::vector<Fe> instance = {Fe::from_u64(5), Fe::from_u64(7)};

    std::cout << "honest witness (a=2, b=3, c=5):   "
              << check_constraints(layout, witness_for(2, 3, 5), instance).summary() << "\n";
    std::cout << "out-of-range a (a=4, b=1, c=3):   "
              << check_constraints(layout, witness_for(4, 1, 3), instance).summary() << "\n";
    std::cout << "wrong sum (a=2, b=4, c=5):        "
              << check_constraints(layout, witness_for(2, 4, 5), instance).summary() << "\n";
    return 0;
}
