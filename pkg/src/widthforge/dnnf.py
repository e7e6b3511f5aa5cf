"""Complete structured DNNF over v-trees.

Gates are numbered ``0..m-1``.  ``kind[g]`` is ``"L"`` (literal), ``"A"``
(binary and) or ``"O"`` (or); ``args[g]`` is ``(var, positive)`` for a
literal and a tuple of gate ids otherwise; ``mu[g]`` is the v-tree node the
gate belongs to.  Circuits that collapse to a constant are represented by
:class:`DnnfConstant`, because constant gates are not part of the formalism.
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Sequence

import numpy as np

from widthforge.cnf import MAX_ORACLE_VARS, CapExceeded, FunctionSpec


class DnnfError(ValueError):
    def __init__(self, message: str, gate: int | None = None):
        self.gate = gate
        super().__init__(message)


class DefinabilityError(ValueError):
    def __init__(self, var: int, rows: tuple[dict, dict]):
        self.var = var
        self.rows = rows
        super().__init__(f"x{var} is not definable: onset rows {rows[0]} and {rows[1]} differ only on it")


# ---------------------------------------------------------------------------
# v-trees


@dataclass(frozen=True)
class VTree:
    children: Mapping[int, tuple[int, int]]
    var: Mapping[int, int]
    root: int

    def __post_init__(self):
        nodes = set(self.children) | set(self.var)
        if set(self.children) & set(self.var):
            raise DnnfError("a v-tree node is both a leaf and internal")
        if self.root not in nodes:
            raise DnnfError("v-tree root is not a node")
        seen = set()
        stack = [self.root]
        while stack:
            t = stack.pop()
            if t in seen:
                raise DnnfError(f"v-tree node {t} is reachable twice")
            seen.add(t)
            if t in self.children:
                kids = self.children[t]
                if len(kids) != 2 or kids[0] == kids[1]:
                    raise DnnfError(f"v-tree node {t} needs exactly two children")
                stack.extend(kids)
            elif t not in self.var:
                raise DnnfError(f"v-tree node {t} is unknown")
        if seen != nodes:
            raise DnnfError(f"v-tree nodes {sorted(nodes - seen)} are unreachable")
        vals = list(self.var.values())
        if len(vals) != len(set(vals)):
            raise DnnfError("v-tree leaves repeat a variable")

    @classmethod
    def from_nested(cls, nested) -> "VTree":
        """Build from nested pairs of variable ids, e.g. ``(1, (2, 3))``."""
        children, var = {}, {}
        counter = itertools.count()

        def build(x):
            t = next(counter)
            if isinstance(x, tuple):
                if len(x) != 2:
                    raise DnnfError("nested v-tree entries must be pairs")
                children[t] = (build(x[0]), build(x[1]))
            else:
                var[t] = int(x)
            return t

        root = build(nested)
        return cls(children, var, root)

    @classmethod
    def balanced(cls, vars: Sequence[int]) -> "VTree":
        vars = list(vars)
        if not vars:
            raise DnnfError("a v-tree needs at least one variable")

        def nest(vs):
            if len(vs) == 1:
                return vs[0]
            h = len(vs) // 2
            return (nest(vs[:h]), nest(vs[h:]))

        return cls.from_nested(nest(vars))

    @property
    def nodes(self) -> list[int]:
        return self.postorder()

    def is_leaf(self, t: int) -> bool:
        return t in self.var

    def parent(self) -> dict[int, int | None]:
        par = {self.root: None}
        for t, (a, b) in self.children.items():
            par[a] = t
            par[b] = t
        return par

    def postorder(self) -> list[int]:
        out, stack = [], [(self.root, False)]
        while stack:
            t, done = stack.pop()
            if done or t in self.var:
                out.append(t)
                continue
            stack.append((t, True))
            a, b = self.children[t]
            stack.append((b, False))
            stack.append((a, False))
        return out

    def leaf_order(self, t: int | None = None) -> list[int]:
        """Variables below t, left to right."""
        t = self.root if t is None else t
        out, stack = [], [t]
        while stack:
            u = stack.pop()
            if u in self.var:
                out.append(self.var[u])
            else:
                a, b = self.children[u]
                stack.extend((b, a))
        return out

    def vars_below(self) -> dict[int, frozenset]:
        below = {}
        for t in self.postorder():
            if t in self.var:
                below[t] = frozenset([self.var[t]])
            else:
                a, b = self.children[t]
                below[t] = below[a] | below[b]
        return below

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted(self.var.values()))

    def leaf_of(self, x: int) -> int:
        for t, v in self.var.items():
            if v == x:
                return t
        raise KeyError(x)

    def nested(self):
        def go(t):
            if t in self.var:
                return self.var[t]
            a, b = self.children[t]
            return (go(a), go(b))
        return go(self.root)


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class DnnfConstant:
    """Marker for a circuit that propagated to a constant."""
    value: bool
    vars: tuple[int, ...] = ()
    deterministic: bool | None = True

    def function(self) -> FunctionSpec:
        return FunctionSpec(tuple(sorted(self.vars)),
                            np.full(1 << len(self.vars), self.value, dtype=bool))


@dataclass(frozen=True)
class StructuredDnnf:
    vtree: VTree
    kind: tuple[str, ...]
    args: tuple[tuple, ...]
    mu: tuple[int, ...]
    output: int
    deterministic: bool | None = None

    @property
    def num_gates(self) -> int:
        return len(self.kind)

    @property
    def variables(self) -> tuple[int, ...]:
        return self.vtree.variables

    def gates_at(self) -> dict[int, list[int]]:
        at = {t: [] for t in self.vtree.nodes}
        for g, t in enumerate(self.mu):
            at.setdefault(t, []).append(g)
        return at

    def or_counts(self) -> dict[int, int]:
        cnt = {t: 0 for t in self.vtree.nodes}
        for g, k in enumerate(self.kind):
            if k == "O":
                cnt[self.mu[g]] = cnt.get(self.mu[g], 0) + 1
        return cnt

    @property
    def width(self) -> int:
        return max(self.or_counts().values(), default=0)

    def topo(self) -> list[int]:
        """Gates reachable from the output, inputs before users."""
        out, seen, stack = [], set(), [(self.output, False)]
        while stack:
            g, done = stack.pop()
            if done:
                out.append(g)
                continue
            if g in seen:
                continue
            seen.add(g)
            stack.append((g, True))
            if self.kind[g] != "L":
                for h in reversed(self.args[g]):
                    if h not in seen:
                        stack.append((h, False))
        return out


Dnnf = StructuredDnnf | DnnfConstant


def validate_dnnf(D: Dnnf) -> int:
    """Check the complete-structured conditions; return the width."""
    if isinstance(D, DnnfConstant):
        return 0
    T = D.vtree
    n = D.num_gates
    if not (len(D.args) == len(D.mu) == n):
        raise DnnfError("kind/args/mu lengths differ")
    if not 0 <= D.output < n:
        raise DnnfError(f"output gate {D.output} does not exist")
    nodes = set(T.children) | set(T.var)
    for g in range(n):
        t = D.mu[g]
        if t not in nodes:
            raise DnnfError(f"gate {g} is assigned to unknown v-tree node {t}", g)
        k = D.kind[g]
        if k == "L":
            var, _pos = D.args[g]
            if t not in T.var:
                raise DnnfError(f"literal gate {g} sits at internal node {t}", g)
            if T.var[t] != var:
                raise DnnfError(f"literal gate {g} on x{var} sits at the leaf of x{T.var[t]}", g)
        elif k == "A":
            if t in T.var:
                raise DnnfError(f"and-gate {g} sits at a leaf", g)
            if len(D.args[g]) != 2:
                raise DnnfError(f"and-gate {g} has {len(D.args[g])} inputs, expected 2", g)
            a, b = D.args[g]
            for h in (a, b):
                if not 0 <= h < n:
                    raise DnnfError(f"and-gate {g} reads missing gate {h}", g)
                if D.kind[h] == "A":
                    raise DnnfError(f"and-gate {g} reads and-gate {h}", g)
            if D.mu[a] == D.mu[b]:
                raise DnnfError(f"and-gate {g} has both inputs under v-tree node {D.mu[a]}", g)
            if {D.mu[a], D.mu[b]} != set(T.children[t]):
                raise DnnfError(f"and-gate {g} inputs are not at the children of node {t}", g)
        elif k == "O":
            if not D.args[g]:
                raise DnnfError(f"or-gate {g} has no inputs (a constant)", g)
            if t in T.var:
                raise DnnfError(f"or-gate {g} sits at a leaf", g)
            for h in D.args[g]:
                if not 0 <= h < n:
                    raise DnnfError(f"or-gate {g} reads missing gate {h}", g)
                if D.kind[h] != "A" or D.mu[h] != t:
                    raise DnnfError(f"or-gate {g} input {h} is not an and-gate at node {t}", g)
        else:
            raise DnnfError(f"gate {g} has unknown kind {k!r} (constants are not allowed)", g)
    if D.mu[D.output] != T.root:
        raise DnnfError(f"output gate {D.output} is not at the v-tree root", D.output)
    return D.width


# ---------------------------------------------------------------------------
# semantics


def _local_tables(D: StructuredDnnf, dtype=bool) -> dict[int, np.ndarray]:
    """Per-gate tables over the variables below the gate's node, in leaf order.

    With an integer dtype the entries count satisfied proof trees."""
    below = len(D.vtree.leaf_order(D.vtree.root))
    if below > MAX_ORACLE_VARS:
        raise CapExceeded(f"{below} variables exceed the brute-force cap {MAX_ORACLE_VARS}")
    tab: dict[int, np.ndarray] = {}
    for g in D.topo():
        k = D.kind[g]
        if k == "L":
            _, pos = D.args[g]
            tab[g] = np.array([not pos, pos], dtype=dtype)
        elif k == "A":
            a, b = D.args[g]
            left, right = D.vtree.children[D.mu[g]]
            if D.mu[a] != left:
                a, b = b, a
            tab[g] = np.multiply.outer(tab[a], tab[b]).reshape(-1).astype(dtype) if dtype != bool \
                else np.logical_and.outer(tab[a], tab[b]).reshape(-1)
        else:
            acc = np.zeros_like(tab[D.args[g][0]])
            for h in D.args[g]:
                acc = acc + tab[h] if dtype != bool else (acc | tab[h])
            tab[g] = acc
    return tab


def _to_sorted(D: StructuredDnnf, table: np.ndarray) -> tuple[tuple[int, ...], np.ndarray]:
    order = D.vtree.leaf_order()
    n = len(order)
    t = table.reshape((2,) * n) if n else table
    perm = sorted(range(n), key=lambda i: order[i])
    return tuple(order[i] for i in perm), np.transpose(t, perm).reshape(-1)


def dnnf_function(D: Dnnf) -> FunctionSpec:
    if isinstance(D, DnnfConstant):
        return D.function()
    tab = _local_tables(D)
    vars, t = _to_sorted(D, tab[D.output])
    return FunctionSpec(vars, t)


def proof_tree_counts(D: Dnnf) -> np.ndarray:
    """For each assignment (rows in sorted-id order), the number of satisfied proof trees."""
    if isinstance(D, DnnfConstant):
        return D.function().onset.astype(np.int64)
    tab = _local_tables(D, np.int64)
    return _to_sorted(D, tab[D.output])[1]


def evaluate(D: Dnnf, a: Mapping[int, int]) -> int:
    if isinstance(D, DnnfConstant):
        missing = [v for v in D.vars if v not in a]
        if missing:
            raise ValueError(f"assignment is not total; missing {missing[:5]}")
        return int(D.value)
    missing = [v for v in D.variables if v not in a]
    if missing:
        raise ValueError(f"assignment is not total; missing {missing[:5]}")
    val: dict[int, bool] = {}
    for g in D.topo():
        k = D.kind[g]
        if k == "L":
            var, pos = D.args[g]
            val[g] = bool(a[var]) == bool(pos)
        elif k == "A":
            val[g] = val[D.args[g][0]] and val[D.args[g][1]]
        else:
            val[g] = any(val[h] for h in D.args[g])
    return int(val[D.output])


@dataclass(frozen=True)
class DeterminismCheck:
    ok: bool
    gate: int | None = None
    assignment: dict | None = None

    def __bool__(self):
        return self.ok


def is_deterministic(D: Dnnf) -> DeterminismCheck:
    if isinstance(D, DnnfConstant):
        return DeterminismCheck(True)
    tab = _local_tables(D)
    T = D.vtree
    for g in D.topo():
        if D.kind[g] != "O":
            continue
        hits = np.zeros(tab[g].shape, dtype=np.int64)
        for h in D.args[g]:
            hits += tab[h]
        bad = np.flatnonzero(hits > 1)
        if bad.size:
            local = T.leaf_order(D.mu[g])
            row = int(bad[0])
            m = len(local)
            a = {v: 0 for v in D.variables}
            a.update({v: (row >> (m - 1 - i)) & 1 for i, v in enumerate(local)})
            return DeterminismCheck(False, g, a)
    return DeterminismCheck(True)


def count_proof_trees(D: Dnnf) -> int:
    if isinstance(D, DnnfConstant):
        return int(D.value)
    cnt: dict[int, int] = {}
    for g in D.topo():
        k = D.kind[g]
        if k == "L":
            cnt[g] = 1
        elif k == "A":
            cnt[g] = cnt[D.args[g][0]] * cnt[D.args[g][1]]
        else:
            cnt[g] = sum(cnt[h] for h in D.args[g])
    return cnt[D.output]


def proof_trees(D: StructuredDnnf) -> Iterator[frozenset]:
    """Enumerate proof trees as gate sets (exponential in general)."""

    def expand(g) -> Iterator[frozenset]:
        k = D.kind[g]
        if k == "L":
            yield frozenset([g])
        elif k == "A":
            a, b = D.args[g]
            for x in expand(a):
                for y in expand(b):
                    yield x | y | {g}
        else:
            for h in D.args[g]:
                for x in expand(h):
                    yield x | {g}

    if isinstance(D, DnnfConstant):
        return iter(())
    return expand(D.output)


def proof_tree_satisfied(D: StructuredDnnf, tree: frozenset, a: Mapping[int, int]) -> bool:
    return all(bool(a[D.args[g][0]]) == bool(D.args[g][1]) for g in tree if D.kind[g] == "L")


# ---------------------------------------------------------------------------
# rewriting


def _rebuild(vtree: VTree, kind, args, mu, output, deterministic=None) -> StructuredDnnf:
    """Keep gates reachable from the output, renumbered in first-id order."""
    seen = set()
    stack = [output]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if kind[g] != "L":
            stack.extend(args[g])
    keep = sorted(seen)
    new = {g: i for i, g in enumerate(keep)}
    nk, na, nm = [], [], []
    for g in keep:
        nk.append(kind[g])
        nm.append(mu[g])
        if kind[g] == "L":
            na.append(tuple(args[g]))
        else:
            na.append(tuple(new[h] for h in args[g]))
    return StructuredDnnf(vtree, tuple(nk), tuple(na), tuple(nm), new[output], deterministic)


def reduce(D: Dnnf) -> Dnnf:
    """Drop gates without a path to the output."""
    if isinstance(D, DnnfConstant):
        return D
    return _rebuild(D.vtree, D.kind, D.args, D.mu, D.output, D.deterministic)


def canonical(D: Dnnf) -> Dnnf:
    """Renumber reachable gates in post-order from the output."""
    if isinstance(D, DnnfConstant):
        return D
    order = D.topo()
    new = {g: i for i, g in enumerate(order)}
    args = []
    for g in order:
        args.append(tuple(D.args[g]) if D.kind[g] == "L" else tuple(new[h] for h in D.args[g]))
    return StructuredDnnf(D.vtree, tuple(D.kind[g] for g in order), tuple(args),
                          tuple(D.mu[g] for g in order), new[D.output], D.deterministic)


def forget(D: Dnnf, z: int) -> Dnnf:
    """Existentially quantify z; the leaf of z and its parent are contracted."""
    if isinstance(D, DnnfConstant):
        if z not in D.vars:
            raise KeyError(f"x{z} is not a variable of the circuit")
        return DnnfConstant(D.value, tuple(v for v in D.vars if v != z), D.deterministic)
    T = D.vtree
    if z not in T.var.values():
        raise KeyError(f"x{z} is not a variable of the circuit")
    leaf = T.leaf_of(z)
    if leaf == T.root:
        return DnnfConstant(True, (), True)
    par = T.parent()
    p = par[leaf]
    a, b = T.children[p]
    s = b if a == leaf else a
    q = par[p]

    # new v-tree: s takes the place of p
    children = {t: kids for t, kids in T.children.items() if t != p}
    if q is not None:
        qa, qb = children[q]
        children[q] = (s if qa == p else qa, s if qb == p else qb)
    var = {t: v for t, v in T.var.items() if t != leaf}
    vtree = VTree(children, var, s if q is None else T.root)

    kind = list(D.kind)
    args = [tuple(x) for x in D.args]
    mu = list(D.mu)

    def add(k, arg, t):
        kind.append(k)
        args.append(tuple(arg))
        mu.append(t)
        return len(kind) - 1

    s_leaf = s in T.var
    # existing gates at s indexed for reuse
    or_at_s = {frozenset(args[g]): g for g in range(len(kind)) if mu[g] == s and kind[g] == "O"}
    lit_at_s = {args[g][1]: g for g in range(len(kind)) if mu[g] == s and kind[g] == "L"}

    def s_part(g_and):
        x, y = args[g_and]
        return y if mu[x] == leaf else x

    def value(g) -> frozenset:
        """Disjunction at s that replaces gate g at p (and-gates at s, or literals)."""
        if kind[g] == "A":
            h = s_part(g)
            return frozenset([h]) if s_leaf else frozenset(args[h])
        out = frozenset()
        for h in args[g]:
            out |= value(h)
        return out

    replacement: dict[int, object] = {}
    TRUE = "TRUE"
    for g in range(len(D.kind)):
        if D.mu[g] != p or (D.kind[g] == "A" and g != D.output):
            continue
        vals = value(g)
        if s_leaf:
            signs = {args[h][1] for h in vals}
            if len(signs) == 2:
                replacement[g] = TRUE
            else:
                replacement[g] = next(iter(vals))
        else:
            key = vals
            if key not in or_at_s:
                or_at_s[key] = add("O", sorted(key), s)
            replacement[g] = or_at_s[key]

    if D.output in replacement:
        out = replacement[D.output]
        if out is TRUE:
            return DnnfConstant(True, vtree.variables, True)
        return canonical(_rebuild(vtree, kind, args, mu, out))

    # rewire and-gates at q that read gates at p
    w = T.var.get(s)

    def literal(sign):
        if sign not in lit_at_s:
            lit_at_s[sign] = add("L", (w, sign), s)
        return lit_at_s[sign]

    split: dict[int, tuple[int, ...]] = {}
    for g in range(len(D.kind)):
        if D.kind[g] != "A" or D.mu[g] != q:
            continue
        x, y = args[g]
        if D.mu[x] == p:
            old, other, first = x, y, True
        elif D.mu[y] == p:
            old, other, first = y, x, False
        else:
            continue
        r = replacement[old]
        if r is TRUE:
            parts = []
            for sign in (True, False):
                lit = literal(sign)
                parts.append(add("A", (lit, other) if first else (other, lit), q))
            split[g] = tuple(parts)
        else:
            args[g] = (r, other) if first else (other, r)
    output = D.output
    if output in split:
        output = add("O", split[output], q)
    if split:
        for g in range(len(kind)):
            if kind[g] == "O" and mu[g] == q:
                new_in = []
                for h in args[g]:
                    new_in.extend(split.get(h, (h,)))
                args[g] = tuple(dict.fromkeys(new_in))
    return canonical(_rebuild(vtree, kind, args, mu, output))


def is_definable(spec: FunctionSpec, z: int) -> bool:
    return definability_conflict(spec, z) is None


def definability_conflict(spec: FunctionSpec, z: int):
    """Two onset rows that agree off z and differ on z, or None."""
    if z not in spec.vars:
        raise KeyError(f"x{z} is not a variable of the function")
    i = spec.vars.index(z)
    t = np.moveaxis(spec.table(), i, -1)
    both = t[..., 0] & t[..., 1]
    hit = np.argwhere(both)
    if hit.size == 0:
        return None
    rest = [v for v in spec.vars if v != z]
    base = {v: int(b) for v, b in zip(rest, hit[0])}
    return ({**base, z: 0}, {**base, z: 1})


def forget_preserving_determinism(D: Dnnf, z: int) -> Dnnf:
    """Forget z from a deterministic circuit in which z is definable.

    The circuit is reduced first; refuses with the two conflicting onset rows
    when z is not definable from the remaining variables."""
    D = reduce(D)
    chk = is_deterministic(D)
    if not chk:
        raise DnnfError(f"circuit is not deterministic at gate {chk.gate} under {chk.assignment}",
                        chk.gate)
    spec = dnnf_function(D)
    conflict = definability_conflict(spec, z)
    if conflict is not None:
        raise DefinabilityError(z, conflict)
    return replace(forget(D, z), deterministic=True)


# ---------------------------------------------------------------------------
# .sdnnf format


def write_sdnnf(D: Dnnf) -> str:
    out = io.StringIO()
    if isinstance(D, DnnfConstant):
        out.write(f"p sdnnf const {int(D.value)}\n")
        out.write("vars " + " ".join(map(str, D.vars)) + "\n")
        return out.getvalue()
    T = D.vtree
    out.write(f"p sdnnf {len(T.nodes)} {D.num_gates} {D.output + 1} {T.root}\n")
    if D.deterministic is not None:
        out.write(f"c deterministic {int(D.deterministic)}\n")
    for t in sorted(T.var):
        out.write(f"V {t} {T.var[t]}\n")
    for t in sorted(T.children):
        a, b = T.children[t]
        out.write(f"N {t} {a} {b}\n")
    for g in range(D.num_gates):
        k = D.kind[g]
        if k == "L":
            var, pos = D.args[g]
            out.write(f"L {var} {'+' if pos else '-'}\n")
        else:
            out.write(f"{k} " + " ".join(str(h + 1) for h in D.args[g]) + "\n")
    for g in range(D.num_gates):
        out.write(f"M {g + 1} {D.mu[g]}\n")
    return out.getvalue()


def read_sdnnf(text: str) -> Dnnf:
    header = None
    det = None
    children, var = {}, {}
    kind, args = [], []
    mu: dict[int, int] = {}
    const_vars = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks:
            continue
        tag = toks[0]
        try:
            if tag == "c":
                if len(toks) == 3 and toks[1] == "deterministic":
                    det = bool(int(toks[2]))
                continue
            if tag == "p":
                if len(toks) >= 2 and toks[1] != "sdnnf":
                    raise ValueError("expected 'p sdnnf'")
                header = toks[2:]
            elif tag == "vars":
                const_vars = tuple(int(x) for x in toks[1:])
            elif tag == "V":
                var[int(toks[1])] = int(toks[2])
            elif tag == "N":
                children[int(toks[1])] = (int(toks[2]), int(toks[3]))
            elif tag == "L":
                if toks[2] not in "+-" or len(toks) != 3:
                    raise ValueError("literal sign must be + or -")
                kind.append("L")
                args.append((int(toks[1]), toks[2] == "+"))
            elif tag in ("A", "O"):
                kind.append(tag)
                args.append(tuple(int(x) - 1 for x in toks[1:]))
            elif tag == "M":
                mu[int(toks[1]) - 1] = int(toks[2])
            else:
                raise ValueError(f"unknown line tag {tag!r}")
        except (ValueError, IndexError) as exc:
            raise DnnfError(f"line {lineno}: {exc}") from None
    if header is None:
        raise DnnfError("missing 'p sdnnf' header")
    if header[0] == "const":
        return DnnfConstant(bool(int(header[1])), const_vars or ())
    nnodes, ngates, output, root = (int(x) for x in header)
    if len(kind) != ngates:
        raise DnnfError(f"header declares {ngates} gates, found {len(kind)}")
    if len(children) + len(var) != nnodes:
        raise DnnfError(f"header declares {nnodes} v-tree nodes, found {len(children) + len(var)}")
    if set(mu) != set(range(ngates)):
        raise DnnfError("every gate needs exactly one M line")
    vt = VTree(children, var, root)
    return StructuredDnnf(vt, tuple(kind), tuple(args), tuple(mu[g] for g in range(ngates)),
                          output - 1, det)
