"""k-expressions (plain and signed) as checkable witnesses.

An expression is a postfix program over a stack of labeled graphs:

* ``("v", vertex, label)`` pushes a single vertex,
* ``("u",)`` pops two graphs and pushes their disjoint union,
* ``("j", i, j, sign)`` joins every i-vertex to every j-vertex (sign ``None``
  for the unsigned operation, ``"+"``/``"-"`` for the signed one),
* ``("r", i, j)`` renames label i to j.

Labels are arbitrary hashable values; the text format numbers them.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

from widthforge.cnf import CnfFormula
from widthforge.graphs import (CLAUSE, PLAIN, VARIABLE, Graph, SignedGraph, clause_vertex,
                               parse_token, primal_graph, signed_incidence_graph,
                               vertex_token, vkey)
from widthforge.treewidth import (TDError, TreeDecomposition, is_special, make_special, measure,
                                  validate_td)


class ExpressionError(ValueError):
    """Malformed expression or structural mismatch with a target graph."""


class LabelArityError(ExpressionError):
    """The expression uses more labels than it declares."""


@dataclass(frozen=True)
class CwExpression:
    ops: tuple
    declared: int | None = None

    @property
    def signed(self) -> bool:
        return any(op[0] == "j" and op[3] is not None for op in self.ops)

    def labels(self) -> set:
        used = set()
        for op in self.ops:
            if op[0] == "v":
                used.add(op[2])
            elif op[0] in ("j", "r"):
                used.update(op[1:3])
        return used

    @property
    def num_labels(self) -> int:
        return len(self.labels())

    def __add__(self, other: "CwExpression") -> "CwExpression":
        return CwExpression(self.ops + other.ops)


def create(v, label) -> tuple:
    return ("v", v, label)


def union() -> tuple:
    return ("u",)


def join(i, j, sign: str | None = None) -> tuple:
    return ("j", i, j, sign)


def rename(i, j) -> tuple:
    return ("r", i, j)


@dataclass
class LabeledGraph:
    graph: Graph
    label: dict = field(default_factory=dict)


class _Piece:
    __slots__ = ("label", "members", "edges")

    def __init__(self):
        self.label = {}
        self.members = {}
        self.edges = {}


def _role(v) -> str:
    if isinstance(v, int) and not isinstance(v, bool):
        return VARIABLE
    if isinstance(v, tuple) and len(v) == 2 and v[0] == "C":
        return CLAUSE
    return PLAIN


def eval_expression(e: CwExpression) -> LabeledGraph:
    stack: list[_Piece] = []
    seen = set()
    for n, op in enumerate(e.ops, 1):
        kind = op[0]
        if kind == "v":
            _, v, lab = op
            if v in seen:
                raise ExpressionError(f"op {n}: vertex {vertex_token(v)} created twice")
            seen.add(v)
            p = _Piece()
            p.label[v] = lab
            p.members[lab] = {v}
            stack.append(p)
        elif kind == "u":
            if len(stack) < 2:
                raise ExpressionError(f"op {n}: union needs two operands")
            b, a = stack.pop(), stack.pop()
            if len(a.label) < len(b.label):
                a, b = b, a
            for v, lab in b.label.items():
                a.label[v] = lab
                a.members.setdefault(lab, set()).add(v)
            a.edges.update(b.edges)
            stack.append(a)
        elif kind == "j":
            _, i, j, sign = op
            if i == j:
                raise ExpressionError(f"op {n}: join with identical labels {i!r}")
            if not stack:
                raise ExpressionError(f"op {n}: join on empty stack")
            p = stack[-1]
            for u in p.members.get(i, ()):
                for w in p.members.get(j, ()):
                    key = frozenset((u, w))
                    old = p.edges.get(key, sign)
                    if old != sign:
                        raise ExpressionError(
                            f"op {n}: edge {vertex_token(u)}-{vertex_token(w)} joined with both signs")
                    p.edges[key] = sign
        elif kind == "r":
            _, i, j = op
            if i == j:
                raise ExpressionError(f"op {n}: rename with identical labels {i!r}")
            if not stack:
                raise ExpressionError(f"op {n}: rename on empty stack")
            p = stack[-1]
            moved = p.members.pop(i, set())
            for v in moved:
                p.label[v] = j
            if moved:
                p.members.setdefault(j, set()).update(moved)
        else:
            raise ExpressionError(f"op {n}: unknown operator {kind!r}")
    if len(stack) > 1:
        raise ExpressionError(f"expression leaves {len(stack)} graphs on the stack")
    p = stack[0] if stack else _Piece()
    roles = {v: _role(v) for v in p.label}
    if e.signed:
        if any(s is None for s in p.edges.values()):
            raise ExpressionError("signed expression mixes unsigned joins")
        g = SignedGraph(roles, frozenset(p.edges), signs=dict(p.edges))
    else:
        g = Graph(roles, frozenset(p.edges))
    return LabeledGraph(g, dict(p.label))


def validate_expression(e: CwExpression, G: Graph) -> int:
    """Check that ``e`` builds exactly G (vertices, edges, signs); return labels used."""
    H = eval_expression(e).graph
    k = e.num_labels
    if e.declared is not None and k > e.declared:
        raise LabelArityError(f"expression uses {k} labels but declares {e.declared}")
    missing = sorted(set(G.roles) - set(H.roles), key=vkey)
    extra = sorted(set(H.roles) - set(G.roles), key=vkey)
    if missing:
        raise ExpressionError(f"vertex {vertex_token(missing[0])} is never created")
    if extra:
        raise ExpressionError(f"vertex {vertex_token(extra[0])} is not in the target graph")
    diff = [(pair, "missing") for pair in _pairs(G.edges - H.edges)]
    diff += [(pair, "extra") for pair in _pairs(H.edges - G.edges)]
    if diff:
        diff.sort(key=lambda d: (vkey(d[0][0]), vkey(d[0][1])))
        (u, w), what = diff[0]
        raise ExpressionError(f"{what} edge {vertex_token(u)}-{vertex_token(w)}")
    want_signed = isinstance(G, SignedGraph)
    if want_signed != isinstance(H, SignedGraph) and G.edges:
        raise ExpressionError("signedness of expression and target graph differ")
    if want_signed and G.edges:
        for u, w in G.sorted_edges():
            if G.sign(u, w) != H.sign(u, w):
                raise ExpressionError(f"edge {vertex_token(u)}-{vertex_token(w)} has sign "
                                      f"{H.sign(u, w)}, expected {G.sign(u, w)}")
    return k


def _pairs(edges):
    return [tuple(sorted(e, key=vkey)) for e in edges]


# ---------------------------------------------------------------------------
# special decomposition -> signed expression


def _expand_clause_nodes(F: CnfFormula, T: TreeDecomposition):
    """Assign clauses to nodes and duplicate bags so each node carries at most
    one clause.  Returns (bags, parent, clause_at)."""
    order = T.preorder()
    owner: dict[int, list[int]] = {t: [] for t in T.bags}
    for ci, c in enumerate(F.clauses, 1):
        vs = c.variables
        host = next((t for t in order if vs <= T.bags[t]), None)
        if host is None:
            raise TDError("clause", ci, f"clause C{ci} is not covered by any bag")
        owner[host].append(ci)
    bags = dict(T.bags)
    parent = dict(T.parent)
    clause_at: dict[int, int] = {}
    fresh = max(bags) + 1
    ch = T.children()
    for t in order:
        cs = owner[t]
        if not cs:
            continue
        clause_at[t] = cs[0]
        last = t
        for ci in cs[1:]:
            bags[fresh] = T.bags[t]
            parent[fresh] = last
            clause_at[fresh] = ci
            last = fresh
            fresh += 1
        for c in ch[t]:
            parent[c] = last
    return TreeDecomposition(bags, parent, True), clause_at


def color_bags(T: TreeDecomposition, limit: int | None = None) -> dict:
    """Top-down coloring with colors 1.. such that each bag is rainbow."""
    color = {}
    for t in T.preorder():
        used = {color[v] for v in T.bags[t] if v in color}
        nxt = 1
        for v in sorted(T.bags[t], key=vkey):
            if v in color:
                continue
            while nxt in used:
                nxt += 1
            color[v] = nxt
            used.add(nxt)
    if limit is not None and color and max(color.values()) > limit:
        raise ValueError("coloring exceeded its palette")
    return color


def special_td_to_scw(F: CnfFormula, T: TreeDecomposition) -> CwExpression:
    """Signed expression for the signed incidence graph, built along a special
    decomposition of the primal graph with at most width + 3 labels."""
    G = primal_graph(F)
    if not is_special(T):
        raise TDError("special", None, "decomposition is not special")
    validate_td(G, TreeDecomposition(T.bags, T.parent, True))
    w = max(T.width, 0)
    T2, clause_at = _expand_clause_nodes(F, T)
    color = color_bags(T2, limit=w + 1)
    clause_label = w + 2
    dummy = w + 3
    ch = T2.children()
    ops: list = []
    pieces: dict[int, int] = {}
    for t in reversed(T2.preorder()):
        bag = T2.bags[t]
        count = 0
        child_vars = set()
        for c in ch[t]:
            child_vars |= T2.bags[c]
        # reversed preorder is a post-order, so the children's pieces sit on top
        for c in ch[t]:
            count += pieces[c]
        for _ in range(count - 1):
            ops.append(union())
        count = min(count, 1)
        for v in sorted(bag - child_vars, key=vkey):
            ops.append(create(v, color[v]))
            count += 1
            if count == 2:
                ops.append(union())
                count = 1
        ci = clause_at.get(t)
        if ci is not None:
            cv = clause_vertex(ci)
            ops.append(create(cv, clause_label))
            count += 1
            if count == 2:
                ops.append(union())
                count = 1
            for l in F.clauses[ci - 1].sorted_literals():
                ops.append(join(color[abs(l)], clause_label, "+" if l > 0 else "-"))
            ops.append(rename(clause_label, dummy))
        p = T2.parent[t]
        if count and p is not None:
            for v in sorted(bag - T2.bags[p], key=vkey):
                ops.append(rename(color[v], dummy))
        pieces[t] = count
    return CwExpression(tuple(ops))


def scw_width_bound(F: CnfFormula) -> tuple[int, CwExpression]:
    """Labels used by the special-decomposition construction, with its witness."""
    if not F.clauses and not F.variables:
        return 0, CwExpression(())
    G = primal_graph(F)
    T = make_special(measure(G).witness)
    e = special_td_to_scw(F, T)
    k = validate_expression(e, signed_incidence_graph(F))
    return k, e


# ---------------------------------------------------------------------------
# .cwx format


def write_cwx(e: CwExpression) -> str:
    num: dict = {}
    for op in e.ops:
        labs = [op[2]] if op[0] == "v" else list(op[1:3]) if op[0] in "jr" else []
        for lab in labs:
            num.setdefault(lab, len(num) + 1)
    out = io.StringIO()
    out.write(f"p cwx {len(num)}\n")
    for op in e.ops:
        if op[0] == "v":
            out.write(f"v {vertex_token(op[1])} {num[op[2]]}\n")
        elif op[0] == "u":
            out.write("u\n")
        elif op[0] == "j":
            tail = f" {op[3]}" if op[3] is not None else ""
            out.write(f"j {num[op[1]]} {num[op[2]]}{tail}\n")
        else:
            out.write(f"r {num[op[1]]} {num[op[2]]}\n")
    return out.getvalue()


def read_cwx(text: str) -> CwExpression:
    ops = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0] == "c":
            continue
        try:
            if toks[0] == "p":
                if len(toks) != 3 or toks[1] != "cwx":
                    raise ExpressionError(f"line {lineno}: malformed header {raw!r}")
                declared = int(toks[2])
            elif toks[0] == "v" and len(toks) == 3:
                ops.append(create(parse_token(toks[1]), int(toks[2])))
            elif toks[0] == "u" and len(toks) == 1:
                ops.append(union())
            elif toks[0] == "j" and len(toks) in (3, 4):
                sign = toks[3] if len(toks) == 4 else None
                if sign not in (None, "+", "-"):
                    raise ExpressionError(f"line {lineno}: bad sign {sign!r}")
                ops.append(join(int(toks[1]), int(toks[2]), sign))
            elif toks[0] == "r" and len(toks) == 3:
                ops.append(rename(int(toks[1]), int(toks[2])))
            else:
                raise ExpressionError(f"line {lineno}: malformed operator {raw!r}")
        except ValueError as exc:
            if isinstance(exc, ExpressionError):
                raise
            raise ExpressionError(f"line {lineno}: {exc}") from None
    return CwExpression(tuple(ops), declared)
