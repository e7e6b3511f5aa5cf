from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from widthforge.cnf import CnfFormula
from widthforge.dnnf import StructuredDnnf, VTree
from widthforge.graphs import Graph

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("repo")


@st.composite
def clause_lists(draw, max_vars: int = 6, max_clauses: int = 8, min_len: int = 1, taut: bool = False):
    n = draw(st.integers(1, max_vars))
    m = draw(st.integers(1, max_clauses))
    clauses = []
    for _ in range(m):
        k = draw(st.integers(min_len, min(3, n)))
        vs = draw(st.lists(st.integers(1, n), min_size=k, max_size=k, unique=True))
        clauses.append([v if draw(st.booleans()) else -v for v in vs])
    if taut and draw(st.booleans()):
        v = draw(st.integers(1, n))
        clauses.append([v, -v])
    return n, clauses


@st.composite
def formulas(draw, max_vars: int = 6, max_clauses: int = 8):
    n, clauses = draw(clause_lists(max_vars, max_clauses))
    return CnfFormula.build(clauses)


@st.composite
def formulas_with_aux(draw, max_vars: int = 7, max_clauses: int = 8):
    n, clauses = draw(clause_lists(max_vars, max_clauses))
    F = CnfFormula.build(clauses)
    vs = list(F.variables)
    k = draw(st.integers(0, max(0, len(vs) - 1)))
    aux = vs[len(vs) - k:]
    return CnfFormula.build(clauses, input_vars=vs[:len(vs) - k], aux_vars=aux)


@st.composite
def graphs(draw, max_vertices: int = 7):
    n = draw(st.integers(0, max_vertices))
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.build(range(1, n + 1), chosen)


def figure_dnnf() -> StructuredDnnf:
    """The three-variable circuit over the v-tree x | (y | z) with x=1, y=2, z=3.

    Nodes: 0 = a (root), 1 = leaf x, 2 = b, 3 = leaf y, 4 = leaf z.
    Function: x(y <-> z) or (not x)(not y)(not z)."""
    vt = VTree.from_nested((1, (2, 3)))
    kind, args, mu = [], [], []

    def add(k, a, t):
        kind.append(k)
        args.append(a)
        mu.append(t)
        return len(kind) - 1

    x1, x0 = add("L", (1, True), 1), add("L", (1, False), 1)
    y1, y0 = add("L", (2, True), 3), add("L", (2, False), 3)
    z1, z0 = add("L", (3, True), 4), add("L", (3, False), 4)
    b3, b4, b5 = add("A", (y1, z1), 2), add("A", (y0, z0), 2), add("A", (y0, z0), 2)
    b1, b2 = add("O", (b3, b4), 2), add("O", (b5,), 2)
    a2, a3 = add("A", (x1, b1), 0), add("A", (x0, b2), 0)
    out = add("O", (a2, a3), 0)
    return StructuredDnnf(vt, tuple(kind), tuple(args), tuple(mu), out)


@pytest.fixture
def fig_dnnf() -> StructuredDnnf:
    return figure_dnnf()
