"""Compile CNF with a primal tree decomposition into deterministic complete
structured DNNF.

Each variable is attached to the v-tree when the decomposition walk leaves its
topmost bag; subtrees of different decomposition children are joined side by
side.  For a v-tree node u with variables V_u, the outside neighborhood
O_u = N(V_u) \\ V_u of the primal graph lies inside one bag, and the circuit
keeps one or-gate per assignment to O_u that leaves the clauses touching V_u
satisfiable.  Hence at most 2^(k+1) or-gates per node for a width-k
decomposition.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from widthforge.cnf import CnfFormula
from widthforge.dnnf import DnnfConstant, StructuredDnnf, VTree, reduce
from widthforge.graphs import primal_graph
from widthforge.treewidth import TreeDecomposition, exact_treewidth, measure, validate_td


@dataclass
class _Plan:
    """v-tree skeleton: each internal node is a join or an attachment of one variable."""
    children: dict
    var: dict
    root: int | None
    attach: dict  # internal node -> attached variable (None for joins)


def _plan(F: CnfFormula, T: TreeDecomposition) -> _Plan:
    top = T.top_node()
    own: dict[int, list[int]] = {t: [] for t in T.bags}
    for v in F.variables:
        own[top[v]].append(v)
    ch = T.children()
    children, var, attach = {}, {}, {}
    counter = itertools.count()
    piece: dict[int, int | None] = {}
    for t in reversed(T.preorder()):
        cur = None
        for c in ch[t]:
            p = piece[c]
            if p is None:
                continue
            if cur is None:
                cur = p
            else:
                u = next(counter)
                children[u] = (cur, p)
                attach[u] = None
                cur = u
        for y in sorted(own[t]):
            leaf = next(counter)
            var[leaf] = y
            if cur is None:
                cur = leaf
            else:
                u = next(counter)
                children[u] = (cur, leaf)
                attach[u] = y
                cur = u
        piece[t] = cur
    return _Plan(children, var, piece[T.root], attach)


def td_to_vtree(F: CnfFormula, T: TreeDecomposition) -> VTree:
    validate_td(primal_graph(F), T)
    plan = _plan(F, T)
    if plan.root is None:
        raise ValueError("formula has no variables")
    return VTree(plan.children, plan.var, plan.root)


def _assignments(vars: tuple[int, ...]):
    for bits in itertools.product((0, 1), repeat=len(vars)):
        yield dict(zip(vars, bits))


def _satisfied(clause, a) -> bool:
    return any((a[abs(l)] == 1) == (l > 0) for l in clause.literals)


def compile_cnf(F: CnfFormula, T: TreeDecomposition) -> StructuredDnnf | DnnfConstant:
    """Deterministic complete structured DNNF equivalent to F over all its variables."""
    G = primal_graph(F)
    validate_td(G, T)
    allvars = F.variables
    if any(len(c.literals) == 0 for c in F.clauses):
        return DnnfConstant(False, allvars)
    if not allvars:
        return DnnfConstant(True, ())
    plan = _plan(F, T)
    vt = VTree(plan.children, plan.var, plan.root)
    below = vt.vars_below()
    adj = {v: G.neighbors(v) for v in allvars}
    clauses_of: dict[int, list] = {v: [] for v in allvars}
    for c in F.clauses:
        for v in c.variables:
            clauses_of[v].append(c)

    kind: list[str] = []
    args: list[tuple] = []
    mu: list[int] = []
    lit_gate: dict[tuple, int] = {}
    and_gate: dict[tuple, int] = {}
    or_gate: dict[tuple, int] = {}

    def add(k, a, t):
        kind.append(k)
        args.append(a)
        mu.append(t)
        return len(kind) - 1

    def literal(t, y, b):
        key = (t, b)
        if key not in lit_gate:
            lit_gate[key] = add("L", (y, bool(b)), t)
        return lit_gate[key]

    def conj(t, g1, g2):
        key = (g1, g2)
        if key not in and_gate:
            and_gate[key] = add("A", key, t)
        return and_gate[key]

    def disj(t, inputs):
        key = (t, tuple(inputs))
        if key not in or_gate:
            or_gate[key] = add("O", tuple(inputs), t)
        return or_gate[key]

    boundary: dict[int, tuple[int, ...]] = {}
    # states[u][assignment tuple over boundary[u]] -> list of gates (a disjunction)
    states: dict[int, dict[tuple, list[int]]] = {}
    for u in vt.postorder():
        V = below[u]
        out = set()
        for v in V:
            out |= adj[v]
        O = tuple(sorted(out - V))
        boundary[u] = O
        table: dict[tuple, list[int]] = {}
        if u in vt.var:
            y = vt.var[u]
            for sigma in _assignments(O):
                gates = []
                for b in (1, 0):
                    full = {**sigma, y: b}
                    if all(_satisfied(c, full) for c in clauses_of[y]):
                        gates.append(literal(u, y, b))
                table[tuple(sigma[v] for v in O)] = gates
        elif plan.attach[u] is not None:
            prev, leaf = vt.children[u]
            y = plan.attach[u]
            Vp = below[prev]
            fresh = [c for c in clauses_of[y] if not (c.variables & Vp)]
            Op = boundary[prev]
            for sigma in _assignments(O):
                inputs = []
                for b in (1, 0):
                    full = {**sigma, y: b}
                    if not all(_satisfied(c, full) for c in fresh):
                        continue
                    for h in states[prev][tuple(full[v] for v in Op)]:
                        inputs.append(conj(u, h, literal(leaf, y, b)))
                table[tuple(sigma[v] for v in O)] = [disj(u, inputs)] if inputs else []
        else:
            left, right = vt.children[u]
            Ol, Or = boundary[left], boundary[right]
            for sigma in _assignments(O):
                inputs = []
                for g1 in states[left][tuple(sigma[v] for v in Ol)]:
                    for g2 in states[right][tuple(sigma[v] for v in Or)]:
                        inputs.append(conj(u, g1, g2))
                table[tuple(sigma[v] for v in O)] = [disj(u, inputs)] if inputs else []
        states[u] = table
    root = states[vt.root][()]
    if not root:
        return DnnfConstant(False, allvars)
    if len(root) == 2:
        return DnnfConstant(True, allvars)
    D = StructuredDnnf(vt, tuple(kind), tuple(args), tuple(mu), root[0], True)
    return reduce(D)


def compile_widths(F: CnfFormula, exact: bool = False):
    """Decompose, compile and return ``(k, wi, D, T)``."""
    G = primal_graph(F)
    if exact:
        k, T = exact_treewidth(G)
    else:
        m = measure(G)
        k, T = m.value, m.witness
    D = compile_cnf(F, T)
    wi = D.width if isinstance(D, StructuredDnnf) else 0
    return k, wi, D, T
