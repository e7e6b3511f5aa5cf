"""Four width measures of a five-variable formula, each with a checked witness.

Run:  python demos/widths_of_a_small_formula.py
"""
from widthforge.gadgets import example_formula
from widthforge.graphs import vertex_token
from widthforge.treewidth import validate_td, width_report

F = example_formula()
print("clauses:")
for i, c in enumerate(F.clauses, 1):
    print(f"  C{i}: {' '.join(map(str, c.sorted_literals()))}")

report = width_report(F)
print("\n" + report.text())

# every witness is re-validated against its own graph before we trust the number
for name, m in report.items():
    w = validate_td(m.graph, m.witness)
    bags = [" ".join(vertex_token(v) for v in sorted(m.witness.bags[t], key=str))
            for t in m.witness.preorder()]
    print(f"\n{name}: width {w}")
    for b in bags:
        print(f"  [{b}]")

# The primal graph has a 4-clique from the long clause.  Clause vertices in the
# incidence graph break it up, and C3/C4 share a neighbourhood, so contraction helps more.
