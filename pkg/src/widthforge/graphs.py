"""Graph views of a CNF formula and neighborhood-type contraction.

Vertex ids are stable across constructions: a variable is its positive
integer id, a clause is ``("C", i)`` with ``i`` the 1-based clause index.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from widthforge.cnf import CnfFormula

Vertex = Hashable
VARIABLE, CLAUSE, PLAIN = "variable", "clause", "plain"


def vkey(v):
    """Total order on mixed vertex ids: variables, then clauses, then the rest."""
    if isinstance(v, bool):
        return (3, repr(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, tuple) and len(v) == 2 and v[0] == "C":
        return (1, v[1])
    return (2, repr(v))


def clause_vertex(i: int) -> tuple[str, int]:
    return ("C", i)


def vertex_token(v) -> str:
    if isinstance(v, int):
        return f"x{v}"
    if isinstance(v, tuple) and len(v) == 2 and v[0] == "C":
        return f"C{v[1]}"
    return repr(v)


def parse_token(tok: str):
    if tok.startswith("x") and tok[1:].isdigit():
        return int(tok[1:])
    if tok.startswith("C") and tok[1:].isdigit():
        return ("C", int(tok[1:]))
    if tok.lstrip("-").isdigit():
        return int(tok)
    return tok


def edge(u, v) -> frozenset:
    if u == v:
        raise ValueError(f"self-loop on {u!r}")
    return frozenset((u, v))


def edge_pair(e: frozenset) -> tuple:
    return tuple(sorted(e, key=vkey))


@dataclass(frozen=True)
class Graph:
    roles: Mapping[Vertex, str]
    edges: frozenset
    _adj: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        adj = {v: set() for v in self.roles}
        for e in self.edges:
            if len(e) != 2:
                raise ValueError(f"malformed edge {set(e)}")
            u, w = tuple(e)
            if u not in adj or w not in adj:
                raise ValueError(f"edge {edge_pair(e)} references a missing vertex")
            adj[u].add(w)
            adj[w].add(u)
        object.__setattr__(self, "_adj", {v: frozenset(s) for v, s in adj.items()})

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable[tuple], role: str = PLAIN,
              roles: Mapping | None = None) -> "Graph":
        r = {v: role for v in vertices}
        if roles:
            r.update(roles)
        es = set()
        for u, v in edges:
            r.setdefault(u, role)
            r.setdefault(v, role)
            es.add(edge(u, v))
        return cls(r, frozenset(es))

    @property
    def vertices(self) -> list:
        return sorted(self.roles, key=vkey)

    def neighbors(self, v) -> frozenset:
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def __len__(self) -> int:
        return len(self.roles)

    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u, v) -> bool:
        return v in self._adj.get(u, ())

    def sorted_edges(self) -> list[tuple]:
        return sorted((edge_pair(e) for e in self.edges), key=lambda p: (vkey(p[0]), vkey(p[1])))

    def induced(self, keep: Iterable) -> "Graph":
        keep = set(keep)
        return Graph({v: r for v, r in self.roles.items() if v in keep},
                     frozenset(e for e in self.edges if e <= keep))

    def adjacency(self) -> dict:
        return {v: set(n) for v, n in self._adj.items()}


@dataclass(frozen=True)
class SignedGraph(Graph):
    signs: Mapping[frozenset, str] = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        if set(self.signs) != set(self.edges):
            raise ValueError("every edge needs exactly one sign")
        bad = [e for e, s in self.signs.items() if s not in "+-" or len(s) != 1]
        if bad:
            raise ValueError(f"invalid sign on edge {edge_pair(bad[0])}")

    def sign(self, u, v) -> str:
        return self.signs[frozenset((u, v))]

    def unsigned(self) -> Graph:
        return Graph(dict(self.roles), self.edges)


class TautologyError(ValueError):
    def __init__(self, index: int, clause):
        self.index = index
        self.clause = clause
        super().__init__(f"clause C{index} {clause} contains both polarities of a variable")


def primal_graph(F: CnfFormula) -> Graph:
    roles = {v: VARIABLE for v in F.variables}
    es = set()
    for c in F.clauses:
        vs = sorted(c.variables)
        for i, u in enumerate(vs):
            for w in vs[i + 1:]:
                es.add(frozenset((u, w)))
    return Graph(roles, frozenset(es))


def incidence_graph(F: CnfFormula) -> Graph:
    roles = {v: VARIABLE for v in F.variables}
    es = set()
    for i, c in enumerate(F.clauses, 1):
        cv = clause_vertex(i)
        roles[cv] = CLAUSE
        for v in c.variables:
            es.add(frozenset((v, cv)))
    return Graph(roles, frozenset(es))


def dual_graph(F: CnfFormula) -> Graph:
    roles = {clause_vertex(i): CLAUSE for i in range(1, len(F.clauses) + 1)}
    occ: dict[int, list] = {}
    for i, c in enumerate(F.clauses, 1):
        for v in c.variables:
            occ.setdefault(v, []).append(clause_vertex(i))
    es = set()
    for cs in occ.values():
        for a in range(len(cs)):
            for b in range(a + 1, len(cs)):
                es.add(frozenset((cs[a], cs[b])))
    return Graph(roles, frozenset(es))


def signed_incidence_graph(F: CnfFormula) -> SignedGraph:
    roles = {v: VARIABLE for v in F.variables}
    signs = {}
    for i, c in enumerate(F.clauses, 1):
        if c.tautological:
            raise TautologyError(i, c)
        cv = clause_vertex(i)
        roles[cv] = CLAUSE
        for l in c.literals:
            signs[frozenset((abs(l), cv))] = "+" if l > 0 else "-"
    return SignedGraph(roles, frozenset(signs), signs=signs)


# ---------------------------------------------------------------------------
# neighborhood types


def same_type(G: Graph, u, v) -> bool:
    """u and v have the same neighborhood type: N(u)\\{v} = N(v)\\{u}."""
    return (G.neighbors(u) - {v}) == (G.neighbors(v) - {u})


def neighborhood_classes(G: Graph) -> list[list]:
    """Twin classes within each role, each sorted, listed by representative."""
    parent = {v: v for v in G.roles}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            if vkey(rb) < vkey(ra):
                ra, rb = rb, ra
            parent[rb] = ra

    # false twins share the open neighborhood, true twins the closed one
    buckets: dict = {}
    for v in G.vertices:
        role = G.roles[v]
        n = G.neighbors(v)
        buckets.setdefault(("open", role, n), []).append(v)
        buckets.setdefault(("closed", role, n | {v}), []).append(v)
    for members in buckets.values():
        for w in members[1:]:
            if same_type(G, members[0], w):
                union(members[0], w)
    classes: dict = {}
    for v in G.vertices:
        classes.setdefault(find(v), []).append(v)
    return [sorted(c, key=vkey) for _, c in sorted(classes.items(), key=lambda kv: vkey(kv[0]))]


def module_contraction(G: Graph) -> tuple[Graph, dict]:
    """Keep one representative (the smallest id) per neighborhood-type class.

    Returns the induced graph on representatives and the vertex -> representative map."""
    rep = {}
    for cls in neighborhood_classes(G):
        for v in cls:
            rep[v] = cls[0]
    H = G.induced(set(rep.values()))
    return H, rep


# ---------------------------------------------------------------------------
# .gr format


def write_gr(G: Graph, kind: str | None = None) -> str:
    verts = G.vertices
    num = {v: i for i, v in enumerate(verts, 1)}
    out = io.StringIO()
    if kind:
        out.write(f"c graph {kind}\n")
    for v in verts:
        out.write(f"c v {num[v]} {vertex_token(v)}\n")
    out.write(f"p tw {len(verts)} {G.num_edges()}\n")
    signed = isinstance(G, SignedGraph)
    for u, w in G.sorted_edges():
        line = f"{num[u]} {num[w]}"
        if signed:
            line += f" {G.sign(u, w)}"
        out.write(line + "\n")
    return out.getvalue()


def read_gr(text: str) -> Graph:
    header = None
    names: dict[int, object] = {}
    pairs = []
    signs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks:
            continue
        if toks[0] == "c":
            if len(toks) == 4 and toks[1] == "v":
                names[int(toks[2])] = parse_token(toks[3])
            continue
        if toks[0] == "p":
            if len(toks) != 4 or toks[1] != "tw":
                raise ValueError(f"line {lineno}: malformed header {raw!r}")
            header = (int(toks[2]), int(toks[3]))
            continue
        if header is None:
            raise ValueError(f"line {lineno}: edge before 'p tw' header")
        if len(toks) not in (2, 3):
            raise ValueError(f"line {lineno}: malformed edge {raw!r}")
        a, b = int(toks[0]), int(toks[1])
        for x in (a, b):
            if not 1 <= x <= header[0]:
                raise ValueError(f"line {lineno}: vertex {x} out of range")
        pairs.append((a, b))
        signs.append(toks[2] if len(toks) == 3 else None)
    if header is None:
        raise ValueError("missing 'p tw' header")
    if len(pairs) != header[1]:
        raise ValueError(f"header declares {header[1]} edges, found {len(pairs)}")

    def name(i):
        return names.get(i, i)

    def role(v):
        if isinstance(v, tuple):
            return CLAUSE
        return VARIABLE if names else PLAIN

    roles = {name(i): role(name(i)) for i in range(1, header[0] + 1)}
    es = {frozenset((name(a), name(b))) for a, b in pairs}
    if any(s is not None for s in signs):
        if any(s is None for s in signs):
            raise ValueError("signed graph with an unsigned edge")
        sg = {frozenset((name(a), name(b))): s for (a, b), s in zip(pairs, signs)}
        return SignedGraph(roles, frozenset(es), signs=sg)
    return Graph(roles, frozenset(es))
