"""Tree decompositions: validation, exact and heuristic construction, the
special (leaf-root path) variant, the ``.td`` format and formula width reports."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable

from widthforge.cnf import CapExceeded, CnfFormula
from widthforge.graphs import (Graph, dual_graph, incidence_graph, module_contraction,
                               parse_token, primal_graph, vertex_token, vkey)

EXACT_CAP = 25


class TDError(ValueError):
    """A decomposition violates one of the tree-decomposition conditions."""

    def __init__(self, kind: str, item, message: str):
        self.kind = kind
        self.item = item
        super().__init__(message)


@dataclass
class TreeDecomposition:
    bags: dict[int, frozenset]
    parent: dict[int, int | None]
    special: bool = False

    @classmethod
    def path(cls, bags: Iterable[Iterable], special: bool = True) -> "TreeDecomposition":
        """Path-shaped decomposition rooted at its first bag."""
        bags = [frozenset(b) for b in bags]
        return cls({i: b for i, b in enumerate(bags)},
                   {i: (i - 1 if i else None) for i in range(len(bags))}, special)

    @classmethod
    def single(cls, bag: Iterable) -> "TreeDecomposition":
        return cls({0: frozenset(bag)}, {0: None}, True)

    @property
    def root(self) -> int:
        roots = [t for t, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise TDError("tree", roots, f"decomposition has {len(roots)} roots")
        return roots[0]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def children(self) -> dict[int, list[int]]:
        ch = {t: [] for t in self.bags}
        for t, p in sorted(self.parent.items()):
            if p is not None:
                ch[p].append(t)
        return ch

    def preorder(self) -> list[int]:
        ch = self.children()
        out, stack = [], [self.root]
        while stack:
            t = stack.pop()
            out.append(t)
            stack.extend(reversed(ch[t]))
        return out

    def vertices(self) -> set:
        return set().union(*self.bags.values()) if self.bags else set()

    def top_node(self) -> dict:
        """For each vertex, the bag closest to the root containing it."""
        top = {}
        for t in self.preorder():
            for v in self.bags[t]:
                top.setdefault(v, t)
        return top

    def relabel(self) -> "TreeDecomposition":
        """Renumber nodes 0.. in preorder."""
        order = self.preorder()
        new = {t: i for i, t in enumerate(order)}
        return TreeDecomposition({new[t]: self.bags[t] for t in order},
                                 {new[t]: (None if self.parent[t] is None else new[self.parent[t]])
                                  for t in order}, self.special)


def _check_tree(T: TreeDecomposition) -> None:
    if not T.bags:
        raise TDError("tree", None, "decomposition has no nodes")
    if set(T.parent) != set(T.bags):
        extra = set(T.parent) ^ set(T.bags)
        raise TDError("tree", min(extra), f"node {min(extra)} lacks a bag or a parent entry")
    root = T.root
    for t in T.bags:
        seen = set()
        u = t
        while u is not None:
            if u in seen:
                raise TDError("tree", t, f"node {t} lies on a cycle")
            seen.add(u)
            p = T.parent[u]
            if p is not None and p not in T.bags:
                raise TDError("tree", u, f"node {u} has unknown parent {p}")
            u = p
        if root not in seen:
            raise TDError("tree", t, f"node {t} is not connected to the root")


def validate_td(G: Graph, T: TreeDecomposition) -> int:
    """Check all decomposition conditions (and specialness if flagged); return the width."""
    _check_tree(T)
    verts = set(G.roles)
    occ: dict = {}
    for t, bag in T.bags.items():
        for v in bag:
            if v not in verts:
                raise TDError("vertex", v, f"bag {t} contains unknown vertex {vertex_token(v)}")
            occ.setdefault(v, set()).add(t)
    for v in G.vertices:
        if v not in occ:
            raise TDError("vertex", v, f"vertex {vertex_token(v)} is not covered by any bag")
    for u, w in G.sorted_edges():
        if not (occ[u] & occ[w]):
            raise TDError("edge", (u, w),
                          f"edge {vertex_token(u)}-{vertex_token(w)} is not covered by any bag")
    for v in G.vertices:
        tops = [t for t in occ[v] if T.parent[t] is None or T.parent[t] not in occ[v]]
        if len(tops) != 1:
            raise TDError("connectivity", v,
                          f"bags containing {vertex_token(v)} are disconnected (nodes {sorted(tops)})")
    if T.special:
        ch = T.children()
        for v in G.vertices:
            for t in sorted(occ[v]):
                down = [c for c in ch[t] if c in occ[v]]
                if len(down) > 1:
                    raise TDError("special", v,
                                  f"bags containing {vertex_token(v)} branch at node {t}; "
                                  "not on a single leaf-root path")
    return T.width


def is_special(T: TreeDecomposition) -> bool:
    ch = T.children()
    for t, bag in T.bags.items():
        for v in bag:
            if sum(1 for c in ch[t] if v in T.bags[c]) > 1:
                return False
    return True


# ---------------------------------------------------------------------------
# elimination orderings


def td_from_ordering(G: Graph, order: list) -> TreeDecomposition:
    """Decomposition induced by eliminating vertices in ``order``."""
    pos = {v: i for i, v in enumerate(order)}
    if set(pos) != set(G.roles):
        raise ValueError("ordering must list every vertex exactly once")
    adj = G.adjacency()
    bags, parent = {}, {}
    for i, v in enumerate(order):
        higher = adj[v]
        bags[i] = frozenset(higher | {v})
        if higher:
            nxt = min(pos[u] for u in higher)
            parent[i] = nxt
            for a in higher:
                adj[a].discard(v)
                adj[a].update(higher - {a})
        else:
            parent[i] = None
        del adj[v]
    if not bags:
        return TreeDecomposition({0: frozenset()}, {0: None}, True)
    roots = [t for t, p in parent.items() if p is None]
    for a, b in zip(roots, roots[1:]):
        parent[a] = b
    return compress(TreeDecomposition(bags, parent)).relabel()


def compress(T: TreeDecomposition) -> TreeDecomposition:
    """Contract every node whose bag is contained in its parent's bag."""
    bags = dict(T.bags)
    parent = dict(T.parent)
    changed = True
    while changed and len(bags) > 1:
        changed = False
        for t in sorted(bags):
            p = parent[t]
            if p is not None and bags[t] <= bags[p]:
                for c in [c for c, q in parent.items() if q == t]:
                    parent[c] = p
                del bags[t], parent[t]
                changed = True
                break
            if p is not None and bags[p] <= bags[t]:
                # keep the larger bag at the parent position
                bags[p] = bags[t]
                for c in [c for c, q in parent.items() if q == t]:
                    parent[c] = p
                del bags[t], parent[t]
                changed = True
                break
    return TreeDecomposition(bags, parent, T.special)


def minfill_ordering(G: Graph) -> list:
    adj = G.adjacency()

    def fill(v):
        ns = sorted(adj[v], key=vkey)
        return sum(1 for i, a in enumerate(ns) for b in ns[i + 1:] if b not in adj[a])

    score = {v: fill(v) for v in adj}
    order = []
    while adj:
        v = min(adj, key=lambda u: (score[u], vkey(u)))
        order.append(v)
        ns = adj.pop(v)
        for a in ns:
            adj[a].discard(v)
            adj[a].update(ns - {a})
        del score[v]
        touched = set(ns)
        for a in ns:
            touched |= adj[a]
        for u in touched:
            score[u] = fill(u)
    return order


def minfill_td(G: Graph) -> TreeDecomposition:
    return td_from_ordering(G, minfill_ordering(G))


# ---------------------------------------------------------------------------
# exact treewidth


def minor_min_width(G: Graph) -> int:
    """Lower bound: contract a min-degree vertex into its min-degree neighbor."""
    adj = G.adjacency()
    lb = 0 if adj else -1
    while len(adj) > 1:
        v = min(adj, key=lambda u: (len(adj[u]), vkey(u)))
        d = len(adj[v])
        lb = max(lb, d)
        if d == 0:
            del adj[v]
            continue
        u = min(adj[v], key=lambda w: (len(adj[w]), vkey(w)))
        for w in adj[v]:
            if w != u:
                adj[w].discard(v)
                adj[w].add(u)
                adj[u].add(w)
        adj[u].discard(v)
        del adj[v]
    return lb


def _is_clique(adj, vs) -> bool:
    vs = list(vs)
    return all(b in adj[a] for i, a in enumerate(vs) for b in vs[i + 1:])


def _eliminate(adj, v):
    ns = adj.pop(v)
    for a in ns:
        adj[a].discard(v)
        adj[a].update(ns - {a})


def _reduce(G: Graph, low: int):
    """Safe simplicial / almost-simplicial reductions.  Returns the prefix of
    the ordering, the kernel adjacency and the updated lower bound."""
    adj = G.adjacency()
    prefix = []
    changed = True
    while changed:
        changed = False
        for v in sorted(adj, key=vkey):
            ns = adj[v]
            if _is_clique(adj, ns):
                low = max(low, len(ns))
                prefix.append(v)
                _eliminate(adj, v)
                changed = True
                break
            if len(ns) <= low:
                for u in sorted(ns, key=vkey):
                    if _is_clique(adj, ns - {u}):
                        prefix.append(v)
                        _eliminate(adj, v)
                        changed = True
                        break
                if changed:
                    break
    return prefix, adj, low


class _Search:
    def __init__(self, verts: list, adj: dict, budget: int | None):
        self.verts = verts
        self.n = len(verts)
        idx = {v: i for i, v in enumerate(verts)}
        self.nbr = [0] * self.n
        for v in verts:
            for u in adj[v]:
                self.nbr[idx[v]] |= 1 << idx[u]
        self.full = (1 << self.n) - 1
        self.budget = budget
        self.steps = 0

    def degree(self, S: int, i: int) -> tuple[int, int]:
        """Neighborhood of vertex i in the graph obtained by eliminating S."""
        reach = self.nbr[i]
        comp = reach & S
        seen = comp
        while comp:
            low = comp & -comp
            comp ^= low
            j = low.bit_length() - 1
            new = self.nbr[j] & S & ~seen
            seen |= new
            comp |= new
            reach |= self.nbr[j]
        reach &= ~S & ~(1 << i)
        return bin(reach).count("1"), reach

    def decide(self, k: int):
        failed: set[int] = set()
        order: list[int] = []

        def rec(S: int) -> bool:
            self.steps += 1
            if self.budget is not None and self.steps > self.budget:
                raise CapExceeded("exact search budget exhausted")
            rest = self.n - bin(S).count("1")
            if rest <= k + 1:
                order.extend(i for i in range(self.n) if not (S >> i) & 1)
                return True
            if S in failed:
                return False
            cands = []
            for i in range(self.n):
                if (S >> i) & 1:
                    continue
                d, nb = self.degree(S, i)
                if d <= k:
                    cands.append((d, i, nb))
            cands.sort()
            # a simplicial candidate can always be eliminated first
            for d, i, nb in cands:
                if self._clique(S, nb):
                    order.append(i)
                    if rec(S | (1 << i)):
                        return True
                    order.pop()
                    failed.add(S)
                    return False
            for d, i, nb in cands:
                order.append(i)
                if rec(S | (1 << i)):
                    return True
                order.pop()
            failed.add(S)
            return False

        if rec(0):
            return [self.verts[i] for i in order]
        return None

    def _clique(self, S: int, nb: int) -> bool:
        m = nb
        while m:
            low = m & -m
            m ^= low
            j = low.bit_length() - 1
            _, nj = self.degree(S, j)
            if (nb & ~low) & ~nj:
                return False
        return True


def exact_treewidth(G: Graph, budget: int | None = None) -> tuple[int, TreeDecomposition]:
    """Minimum width with a witness.  The size cap applies to the kernel left
    after safe reductions."""
    if len(G) == 0:
        return -1, TreeDecomposition({0: frozenset()}, {0: None}, True)
    low = minor_min_width(G)
    prefix, adj, low = _reduce(G, low)
    verts = sorted(adj, key=vkey)
    if len(verts) > EXACT_CAP:
        raise CapExceeded(f"kernel of {len(verts)} vertices exceeds the exact cap {EXACT_CAP}")
    if verts:
        kernel = G.induced(verts)
        kadj = {v: set(adj[v]) for v in verts}
        # upper bound from min-fill on the kernel graph with its fill edges
        kg = Graph({v: kernel.roles[v] for v in verts},
                   frozenset(frozenset((a, b)) for a in verts for b in kadj[a]))
        ub_order = minfill_ordering(kg)
        ub = td_from_ordering(kg, ub_order).width
        search = _Search(verts, kadj, budget)
        best = ub_order
        lo = max(low, minor_min_width(kg))
        for k in range(lo, ub):
            found = search.decide(k)
            if found is not None:
                best = found
                break
        order = prefix + best
    else:
        order = prefix
    T = td_from_ordering(G, order)
    return validate_td(G, T), T


# ---------------------------------------------------------------------------
# special decompositions


def make_special(T: TreeDecomposition) -> TreeDecomposition:
    """A decomposition in which every vertex occurs along one leaf-root path.

    Already-special inputs come back unchanged (with the flag set).  Otherwise
    the nodes are laid out in preorder and each vertex occupies the interval
    from its first to its last occurrence, which yields a path decomposition."""
    if is_special(T):
        return TreeDecomposition(dict(T.bags), dict(T.parent), True)
    order = T.preorder()
    first, last = {}, {}
    for i, t in enumerate(order):
        for v in T.bags[t]:
            first.setdefault(v, i)
            last[v] = i
    bags = [frozenset(v for v in first if first[v] <= i <= last[v]) for i in range(len(order))]
    merged = []
    for b in bags:
        if merged and b <= merged[-1]:
            continue
        if merged and merged[-1] <= b:
            merged[-1] = b
            continue
        merged.append(b)
    return TreeDecomposition.path(merged, special=True)


# ---------------------------------------------------------------------------
# reports


@dataclass
class Measure:
    value: int
    tag: str
    witness: TreeDecomposition
    graph: Graph = field(repr=False)

    def __str__(self):
        return f"{self.value} {self.tag}"


@dataclass
class WidthReport:
    tw_p: Measure
    tw_d: Measure
    tw_i: Measure
    mtw: Measure

    def items(self):
        return [("tw_p", self.tw_p), ("tw_d", self.tw_d), ("tw_i", self.tw_i), ("mtw", self.mtw)]

    def text(self) -> str:
        parts = []
        for name, m in self.items():
            if m.tag == "exact":
                parts.append(f"{name}={m.value} exact")
            else:
                parts.append(f"{name}≤{m.value} upper-bound")
        return ", ".join(parts)


def measure(G: Graph, budget: int | None = 2_000_000) -> Measure:
    try:
        w, T = exact_treewidth(G, budget=budget)
        return Measure(w, "exact", T, G)
    except CapExceeded:
        T = minfill_td(G)
        return Measure(validate_td(G, T), "upper-bound", T, G)


def width_report(F: CnfFormula, budget: int | None = 2_000_000) -> WidthReport:
    inc = incidence_graph(F)
    contracted, _ = module_contraction(inc)
    return WidthReport(measure(primal_graph(F), budget), measure(dual_graph(F), budget),
                       measure(inc, budget), measure(contracted, budget))


# ---------------------------------------------------------------------------
# .td format


def write_td(T: TreeDecomposition, kind: str | None = None) -> str:
    T = T.relabel()
    verts = sorted(T.vertices(), key=vkey)
    num = {v: i for i, v in enumerate(verts, 1)}
    out = io.StringIO()
    if kind:
        out.write(f"c graph {kind}\n")
    if T.special:
        out.write("c special\n")
    for v in verts:
        out.write(f"c v {num[v]} {vertex_token(v)}\n")
    out.write(f"c root {T.root + 1}\n")
    out.write(f"s td {len(T.bags)} {T.width + 1} {len(verts)}\n")
    for t in sorted(T.bags):
        ids = sorted(num[v] for v in T.bags[t])
        out.write(" ".join(["b", str(t + 1)] + [str(i) for i in ids]) + "\n")
    for t in sorted(T.bags):
        p = T.parent[t]
        if p is not None:
            out.write(f"{p + 1} {t + 1}\n")
    return out.getvalue()


def read_td(text: str) -> TreeDecomposition:
    names: dict[int, object] = {}
    special = False
    root = None
    header = None
    bags: dict[int, frozenset] = {}
    raw_bags: dict[int, list[int]] = {}
    adj: dict[int, set[int]] = {}
    nedges = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks:
            continue
        if toks[0] == "c":
            if len(toks) == 2 and toks[1] == "special":
                special = True
            elif len(toks) == 4 and toks[1] == "v":
                names[int(toks[2])] = parse_token(toks[3])
            elif len(toks) == 3 and toks[1] == "root":
                root = int(toks[2])
            continue
        if toks[0] == "s":
            if len(toks) != 5 or toks[1] != "td":
                raise ValueError(f"line {lineno}: malformed header {raw!r}")
            header = tuple(int(x) for x in toks[2:])
            continue
        if header is None:
            raise ValueError(f"line {lineno}: content before 's td' header")
        if toks[0] == "b":
            if len(toks) < 2:
                raise ValueError(f"line {lineno}: bag line without id")
            b = int(toks[1])
            if not 1 <= b <= header[0]:
                raise ValueError(f"line {lineno}: bag id {b} out of range")
            raw_bags[b] = [int(x) for x in toks[2:]]
            continue
        if len(toks) != 2:
            raise ValueError(f"line {lineno}: malformed tree edge {raw!r}")
        a, b = int(toks[0]), int(toks[1])
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
        nedges += 1
    if header is None:
        raise ValueError("missing 's td' header")
    nb, _, nv = header
    if len(raw_bags) != nb:
        raise ValueError(f"header declares {nb} bags, found {len(raw_bags)}")
    if nedges != max(0, nb - 1):
        raise ValueError(f"a tree on {nb} bags needs {nb - 1} edges, found {nedges}")
    for b, ids in raw_bags.items():
        for i in ids:
            if not 1 <= i <= nv:
                raise ValueError(f"bag {b} references vertex {i} outside 1..{nv}")
        bags[b - 1] = frozenset(names.get(i, i) for i in ids)
    r = (root or min(raw_bags))
    parent = {r - 1: None}
    stack = [r]
    while stack:
        a = stack.pop()
        for b in sorted(adj.get(a, ())):
            if b - 1 not in parent:
                parent[b - 1] = a - 1
                stack.append(b)
    if len(parent) != nb:
        raise ValueError("tree edges do not connect all bags")
    return TreeDecomposition(bags, parent, special)
