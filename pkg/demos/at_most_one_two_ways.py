"""Pairwise versus ladder at-most-one: same function, very different treewidth.

Run:  python demos/at_most_one_two_ways.py
"""
from widthforge.cnf import has_dependent_aux, is_clausal_encoding
from widthforge.gadgets import amo_ladder, amo_naive
from widthforge.graphs import primal_graph
from widthforge.treewidth import exact_treewidth, validate_td

print(f"{'n':>3} {'naive tw_p':>11} {'ladder width':>13} {'ladder vars':>12} {'dependent':>10}")
for n in range(3, 9):
    naive = amo_naive(n)
    tw, _ = exact_treewidth(primal_graph(naive.formula))
    ladder = amo_ladder(n)
    assert is_clausal_encoding(ladder.formula, ladder.spec)
    w = validate_td(primal_graph(ladder.formula), ladder.td)
    dep = bool(has_dependent_aux(ladder.formula))
    print(f"{n:>3} {tw:>11} {w:>13} {ladder.formula.num_vars:>12} {str(dep):>10}")

# The naive encoding's primal graph is complete, so tw = n - 1.  The ladder adds
# n + 1 prefix bits and keeps the width at 2.
