"""Rectangle covers of communication matrices, and the cut audit that ties
them to circuit width.

Run:  python demos/rectangle_covers.py
"""
from widthforge.comm import (Partition, cardinality_fooling_family, cc_best_third, comm_matrix,
                             cut_cc_audit, fooling_set_bound, min_rectangle_cover)
from widthforge.compiler import compile_widths
from widthforge.gadgets import cardinality_function, eq_function, grid_formula

f = eq_function(3)
blocks = Partition.of([1, 2, 3], [4, 5, 6])
r = min_rectangle_cover(f, blocks)
print(f"EQ_3 with x | y: {r.s_min} rectangles (identity matrix), cc = {r.cc:g}")
best = cc_best_third(f)
print(f"EQ_3 best balanced split Y={list(best.partition.Y)}: {best.s_min} rectangle")

M = comm_matrix(cardinality_function(6, 2), Partition.of([1, 2], [3, 4, 5, 6]))
print("\nat most 2 of 6, rows = assignments to x1 x2:")
for row in M.astype(int):
    print("  " + "".join(map(str, row)))
p = Partition.of([1, 2], [3, 4, 5, 6])
fr = fooling_set_bound(cardinality_function(6, 2), p, cardinality_fooling_family(6, 2, p))
print(f"fooling set of size {fr.bound}; exact cover {min_rectangle_cover(cardinality_function(6, 2), p).s_min}")

# every v-tree node of a compiled circuit must carry at least as many gates as
# the cover size of the split it induces
_, wi, D, _ = compile_widths(grid_formula(2, 4))
audit = cut_cc_audit(D)
print(f"\ngrid 2x4 circuit of width {wi}:")
for row in audit.rows:
    print(f"  node {row.node:>2}: gates {row.ell:>2} >= s_min {row.s_min}  {'ok' if row.ok else 'VIOLATION'}")
