"""Exact nondeterministic communication complexity for small functions.

A cover of f under a partition (Y, Z) is a set of 1-rectangles of the
communication matrix whose union is the onset.  ``s_min`` is the smallest
cover size and cc = log2(s_min).  Inequalities are checked on ``s_min``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from widthforge.cnf import CapExceeded, FunctionSpec
from widthforge.dnnf import DnnfConstant, StructuredDnnf, dnnf_function, reduce

MAX_COVER_VARS = 16
MAX_BEST_VARS = 14


@dataclass(frozen=True)
class Partition:
    Y: tuple[int, ...]
    Z: tuple[int, ...]

    @classmethod
    def of(cls, Y: Iterable[int], Z: Iterable[int]) -> "Partition":
        Y, Z = tuple(sorted(Y)), tuple(sorted(Z))
        if set(Y) & set(Z):
            raise ValueError(f"sides overlap on {sorted(set(Y) & set(Z))}")
        return cls(Y, Z)

    @classmethod
    def split(cls, vars: Iterable[int], Y: Iterable[int]) -> "Partition":
        Y = set(Y)
        return cls.of(Y, [v for v in vars if v not in Y])

    @property
    def balanced(self) -> bool:
        n = len(self.Y) + len(self.Z)
        return 3 * min(len(self.Y), len(self.Z)) >= n


def comm_matrix(spec: FunctionSpec, part: Partition) -> np.ndarray:
    """Rows: assignments to Y; columns: assignments to Z (first variable most significant)."""
    if set(part.Y) | set(part.Z) != set(spec.vars) or len(part.Y) + len(part.Z) != spec.n:
        raise ValueError("partition does not split the function's variables")
    t = spec.table()
    pos = {v: i for i, v in enumerate(spec.vars)}
    order = [pos[v] for v in part.Y] + [pos[v] for v in part.Z]
    t = np.transpose(t, order) if spec.n else t
    return np.asarray(t, dtype=bool).reshape(1 << len(part.Y), 1 << len(part.Z))


@dataclass
class CoverResult:
    s_min: int | None
    rectangles: list[tuple[frozenset, frozenset]]
    partition: Partition | None = None

    @property
    def cc(self) -> float:
        if self.s_min is None:
            return math.inf
        return math.log2(self.s_min) if self.s_min else -math.inf


class _CoverSearch:
    def __init__(self, M: np.ndarray):
        rows, self.row_of = np.unique(M, axis=0, return_inverse=True)
        cols, self.col_of = np.unique(rows, axis=1, return_inverse=True)
        self.row_of = np.asarray(self.row_of).reshape(-1)
        self.col_of = np.asarray(self.col_of).reshape(-1)
        self.M = cols
        self.R, self.C = cols.shape
        self.support = [sum(1 << c for c in range(self.C) if cols[r, c]) for r in range(self.R)]
        self.cells = [(r, c) for r in range(self.R) for c in range(self.C) if cols[r, c]]
        self.cell_bit = {rc: i for i, rc in enumerate(self.cells)}
        self.rects = self._maximal_rectangles()
        self.masks = [self._cover_mask(rs, cs) for rs, cs in self.rects]
        self.by_cell = [[j for j, m in enumerate(self.masks) if m >> i & 1] for i in range(len(self.cells))]
        self.fail: set = set()

    def _maximal_rectangles(self):
        closed = set()
        frontier = {s for s in self.support if s}
        while frontier:
            closed |= frontier
            nxt = set()
            for s in frontier:
                for t in self.support:
                    u = s & t
                    if u and u not in closed:
                        nxt.add(u)
            frontier = nxt
        rects = []
        for cs in sorted(closed):
            rs = frozenset(r for r in range(self.R) if self.support[r] & cs == cs)
            rects.append((rs, cs))
        return rects

    def _cover_mask(self, rs, cs) -> int:
        m = 0
        for r in rs:
            for c in range(self.C):
                if cs >> c & 1:
                    m |= 1 << self.cell_bit[(r, c)]
        return m

    def fooling_lower(self, uncovered: int) -> int:
        chosen: list[tuple[int, int]] = []
        i = 0
        u = uncovered
        while u:
            if u & 1:
                r1, c1 = self.cells[i]
                if all(not self.M[r1, c2] or not self.M[r2, c1] for r2, c2 in chosen):
                    chosen.append((r1, c1))
            u >>= 1
            i += 1
        return len(chosen)

    def solve(self, uncovered: int, budget: int) -> list[int] | None:
        if not uncovered:
            return []
        if budget <= 0 or (uncovered, budget) in self.fail:
            return None
        if self.fooling_lower(uncovered) > budget:
            self.fail.add((uncovered, budget))
            return None
        best = None
        u, i = uncovered, 0
        while u:
            if u & 1 and (best is None or len(self.by_cell[i]) < len(best)):
                best = self.by_cell[i]
            u >>= 1
            i += 1
        options = sorted(best, key=lambda j: -bin(self.masks[j] & uncovered).count("1"))
        for j in options:
            rest = self.solve(uncovered & ~self.masks[j], budget - 1)
            if rest is not None:
                return [j] + rest
        self.fail.add((uncovered, budget))
        return None

    def expand(self, j: int) -> tuple[frozenset, frozenset]:
        rs, cs = self.rects[j]
        rows = frozenset(int(r) for r in np.flatnonzero(np.isin(self.row_of, list(rs))))
        dcols = [c for c in range(self.C) if cs >> c & 1]
        cols = frozenset(int(c) for c in np.flatnonzero(np.isin(self.col_of, dcols)))
        return rows, cols


def cover_matrix(M: np.ndarray, limit: int | None = None) -> CoverResult:
    """Minimum 1-rectangle cover of M; with ``limit``, s_min is None when it exceeds the limit."""
    if not M.any():
        return CoverResult(0, [])
    if M.all():
        return CoverResult(1, [(frozenset(range(M.shape[0])), frozenset(range(M.shape[1])))])
    S = _CoverSearch(M)
    full = (1 << len(S.cells)) - 1
    k = max(1, S.fooling_lower(full))
    top = len(S.rects) if limit is None else min(limit, len(S.rects))
    while k <= top:
        sol = S.solve(full, k)
        if sol is not None:
            return CoverResult(len(sol), [S.expand(j) for j in sol])
        k += 1
    return CoverResult(None, [])


def min_rectangle_cover(spec: FunctionSpec, part: Partition, limit: int | None = None) -> CoverResult:
    if spec.n > MAX_COVER_VARS:
        raise CapExceeded(f"{spec.n} variables exceed the cover cap {MAX_COVER_VARS}")
    res = cover_matrix(comm_matrix(spec, part), limit)
    res.partition = part
    return res


def check_cover(spec: FunctionSpec, part: Partition, rects) -> bool:
    """Every rectangle lies in the onset and together they cover it."""
    M = comm_matrix(spec, part)
    cov = np.zeros_like(M)
    for rs, cs in rects:
        sub = np.ix_(sorted(rs), sorted(cs))
        if not M[sub].all():
            return False
        cov[sub] = True
    return bool((cov == M).all())


def cc(spec: FunctionSpec, part: Partition) -> float:
    return min_rectangle_cover(spec, part).cc


def balanced_partitions(vars: Sequence[int]) -> list[Partition]:
    """All 1/3-balanced partitions, one per complementary pair (Y holds the first variable)."""
    vars = tuple(sorted(vars))
    n = len(vars)
    if n < 2:
        return [Partition(vars, ())] if n else [Partition((), ())]
    out = []
    first, rest = vars[0], vars[1:]
    for size in range(0, n):
        for extra in itertools.combinations(rest, size):
            p = Partition.split(vars, (first,) + extra)
            if p.balanced:
                out.append(p)
    out.sort(key=lambda p: p.Y)
    return out


def cc_best_third(spec: FunctionSpec) -> CoverResult:
    """Minimum cover size over balanced partitions; ties go to the lexicographically first Y."""
    if spec.n > MAX_BEST_VARS:
        raise CapExceeded(f"{spec.n} variables exceed the partition-sweep cap {MAX_BEST_VARS}")
    best: CoverResult | None = None
    for p in balanced_partitions(spec.vars):
        limit = None if best is None else best.s_min - 1
        if limit is not None and limit < 1:
            break
        res = min_rectangle_cover(spec, p, limit)
        if res.s_min is not None and (best is None or res.s_min < best.s_min):
            best = res
    return best


def width_lower_bound(spec: FunctionSpec) -> int:
    """ceil(cc_best) with constant 1, or 0 when the best cover has at most one rectangle."""
    s = cc_best_third(spec).s_min
    return math.ceil(math.log2(s)) if s and s > 1 else 0


# ---------------------------------------------------------------------------
# fooling sets


@dataclass
class FoolingResult:
    ok: bool
    bound: int
    failing: tuple[int, int] | None = None


def _restrict(a: Mapping[int, int], vs) -> dict[int, int]:
    return {v: a[v] for v in vs}


def fooling_set_bound(spec: FunctionSpec, part: Partition,
                      candidates: Sequence[Mapping[int, int]]) -> FoolingResult:
    """|candidates| bounds s_min from below if no rectangle can hold two of them."""
    for i, a in enumerate(candidates):
        if not spec(a):
            raise ValueError(f"candidate {i} is not a model")
    for i, j in itertools.combinations(range(len(candidates)), 2):
        a, b = candidates[i], candidates[j]
        cross1 = {**_restrict(b, part.Y), **_restrict(a, part.Z)}
        cross2 = {**_restrict(a, part.Y), **_restrict(b, part.Z)}
        if spec(cross1) and spec(cross2):
            return FoolingResult(False, 0, (i, j))
    return FoolingResult(True, len(candidates))


def cardinality_fooling_family(n: int, k: int, part: Partition) -> list[dict[int, int]]:
    """Models (a_i, b_i), i = 0..s with s = min(k, n // 3): i ones on Y and k - i ones on Z."""
    s = min(k, n // 3)
    if s > len(part.Y) or k > len(part.Z):
        raise ValueError("partition sides are too small for the family")
    out = []
    for i in range(s + 1):
        a = {v: int(idx < i) for idx, v in enumerate(part.Y)}
        a.update({v: int(idx < k - i) for idx, v in enumerate(part.Z)})
        out.append(a)
    return out


# ---------------------------------------------------------------------------
# cut audit


@dataclass
class CutRow:
    node: int
    Y: tuple[int, ...]
    ell: int
    s_min: int | None

    @property
    def ok(self) -> bool:
        return self.s_min is not None and self.s_min <= self.ell


@dataclass
class CutAudit:
    rows: list[CutRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def violation(self) -> CutRow | None:
        return next((r for r in self.rows if not r.ok), None)


def interface_gates(D: StructuredDnnf) -> dict[int, int]:
    """Gates per v-tree node that a cover at that cut is charged for.

    Or-gates at internal nodes, literal gates at leaves, and the output when it
    is not an or-gate."""
    D = reduce(D)
    ell = {t: 0 for t in D.vtree.nodes}
    for g, t in enumerate(D.mu):
        if D.kind[g] == "O" or (D.kind[g] == "L" and t in D.vtree.var):
            ell[t] += 1
    if D.kind[D.output] == "A":
        ell[D.mu[D.output]] += 1
    return ell


def cut_cc_audit(D: StructuredDnnf | DnnfConstant, spec: FunctionSpec | None = None) -> CutAudit:
    """Check gates-at-node >= s_min of (vars below node, rest) at every v-tree node."""
    if isinstance(D, DnnfConstant):
        spec = spec or D.function()
        part = Partition.of(spec.vars, ())
        s = min_rectangle_cover(spec, part).s_min
        return CutAudit([CutRow(-1, part.Y, 1, s)])
    spec = spec or dnnf_function(D)
    if set(spec.vars) != set(D.variables):
        raise ValueError(f"circuit variables {list(D.variables)} differ from function variables {list(spec.vars)}")
    if spec.n > MAX_COVER_VARS:
        raise CapExceeded(f"{spec.n} variables exceed the cover cap {MAX_COVER_VARS}")
    ell = interface_gates(D)
    below = D.vtree.vars_below()
    rows = []
    for t in D.vtree.postorder():
        part = Partition.split(spec.vars, below[t])
        s = min_rectangle_cover(spec, part, limit=max(ell[t], 1)).s_min
        if s is None:
            s = min_rectangle_cover(spec, part).s_min
        rows.append(CutRow(t, part.Y, ell[t], s))
    return CutAudit(rows)
