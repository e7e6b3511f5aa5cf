"""Concrete functions and their encodings, each with a decomposition witness."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from widthforge.cnf import MAX_ORACLE_VARS, CapExceeded, CnfFormula, FunctionSpec
from widthforge.treewidth import TreeDecomposition


@dataclass
class GadgetOutput:
    formula: CnfFormula
    spec: FunctionSpec | None
    td: TreeDecomposition


def _popcount_table(n: int) -> np.ndarray:
    rows = np.arange(1 << n, dtype=np.int64)
    cnt = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        cnt += (rows >> i) & 1
    return cnt


# ---------------------------------------------------------------------------
# functions


def amo_function(n: int) -> FunctionSpec:
    return FunctionSpec(tuple(range(1, n + 1)), _popcount_table(n) <= 1)


def cardinality_function(n: int, k: int) -> FunctionSpec:
    """C_n^k: at most k of x_1..x_n are true."""
    return FunctionSpec(tuple(range(1, n + 1)), _popcount_table(n) <= k)


def eq_function(n: int) -> FunctionSpec:
    """EQ_n over x_i = i and y_i = n + i."""
    if 2 * n > MAX_ORACLE_VARS:
        raise CapExceeded(f"EQ_{n} has {2 * n} variables, above the cap {MAX_ORACLE_VARS}")
    rows = np.arange(1 << (2 * n), dtype=np.int64)
    # x block is the high half of the row index, y block the low half
    onset = (rows >> n) == (rows & ((1 << n) - 1))
    return FunctionSpec(tuple(range(1, 2 * n + 1)), onset)


def edge_vars(n: int) -> dict[tuple[int, int], int]:
    """Variable id of edge {i, j} (1 <= i < j <= n), numbered lexicographically."""
    return {e: k for k, e in enumerate(itertools.combinations(range(1, n + 1), 2), 1)}


def triangle_free_function(n: int) -> FunctionSpec:
    ev = edge_vars(n)
    m = len(ev)
    if m > MAX_ORACLE_VARS:
        raise CapExceeded(f"{m} edge variables exceed the cap {MAX_ORACLE_VARS}")
    rows = np.arange(1 << m, dtype=np.int64)
    bad = np.zeros(1 << m, dtype=bool)
    for a, b, c in itertools.combinations(range(1, n + 1), 3):
        mask = 0
        for e in ((a, b), (a, c), (b, c)):
            mask |= 1 << (m - ev[e])
        bad |= (rows & mask) == mask
    return FunctionSpec(tuple(range(1, m + 1)), ~bad)


def perm_var(n: int, i: int, j: int) -> int:
    return (i - 1) * n + j


def perm_function(n: int) -> FunctionSpec:
    if n * n > MAX_ORACLE_VARS:
        raise CapExceeded(f"PERM_{n} has {n * n} variables, above the cap {MAX_ORACLE_VARS}")
    onset = np.zeros(1 << (n * n), dtype=bool)
    for p in itertools.permutations(range(1, n + 1)):
        row = 0
        for i, j in enumerate(p, 1):
            row |= 1 << (n * n - perm_var(n, i, j))
        onset[row] = True
    return FunctionSpec(tuple(range(1, n * n + 1)), onset)


def dnf_example_function() -> FunctionSpec:
    """(¬x∧¬y∧z) ∨ (x∧y∧z) ∨ (x∧¬y∧¬z) over x=1, y=2, z=3."""
    return FunctionSpec.from_predicate((1, 2, 3), lambda b: b in {(0, 0, 1), (1, 1, 1), (1, 0, 0)})


# ---------------------------------------------------------------------------
# formulas


def example_formula() -> CnfFormula:
    """(x1 ∨ ¬x2) ∧ (x2 ∨ x3 ∨ ¬x4 ∨ ¬x5) ∧ (¬x4 ∨ x5) ∧ (x4 ∨ x5)."""
    return CnfFormula.build([[1, -2], [2, 3, -4, -5], [-4, 5], [4, 5]])


def grid_formula(rows: int, cols: int) -> CnfFormula:
    """(x_ij ∨ x_(i+1)j) ∧ (x_ij ∨ x_i(j+1)) on a rows × cols grid, row-major ids."""
    vid = lambda i, j: (i - 1) * cols + j
    clauses = []
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            if i < rows:
                clauses.append([vid(i, j), vid(i + 1, j)])
            if j < cols:
                clauses.append([vid(i, j), vid(i, j + 1)])
    names = {vid(i, j): f"x{i}_{j}" for i in range(1, rows + 1) for j in range(1, cols + 1)}
    return CnfFormula.build(clauses, input_vars=names.keys(), names=names)


def amo_naive(n: int) -> GadgetOutput:
    if n < 1:
        raise ValueError("n must be at least 1")
    clauses = [[-i, -j] for i, j in itertools.combinations(range(1, n + 1), 2)]
    F = CnfFormula.build(clauses, input_vars=range(1, n + 1))
    spec = amo_function(n) if n <= MAX_ORACLE_VARS else None
    return GadgetOutput(F, spec, TreeDecomposition.single(range(1, n + 1)))


def amo_ladder(n: int) -> GadgetOutput:
    """Ladder encoding: y_i (ids n+1+i) is the prefix-or of x_1..x_i."""
    if n < 1:
        raise ValueError("n must be at least 1")
    y = lambda i: n + 1 + i
    clauses = [[-y(0)]]
    for i in range(1, n + 1):
        clauses += [[-y(i - 1), y(i)],
                    [-i, -y(i - 1)], [-i, y(i)], [i, y(i - 1), -y(i)]]
    names = {i: f"x{i}" for i in range(1, n + 1)}
    names.update({y(i): f"y{i}" for i in range(n + 1)})
    F = CnfFormula.build(clauses, input_vars=range(1, n + 1), aux_vars=[y(i) for i in range(n + 1)],
                         names=names)
    spec = amo_function(n) if n <= MAX_ORACLE_VARS else None
    td = TreeDecomposition.path([{y(i - 1), y(i), i} for i in range(1, n + 1)])
    return GadgetOutput(F, spec, td)


def _bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def _forbid(vars_, bits) -> list[int]:
    """Clause falsified exactly by vars_ = bits."""
    return [-v if b else v for v, b in zip(vars_, bits)]


def cardinality_binary(n: int, k: int) -> GadgetOutput:
    """Binary partial-sum encoding of C_n^k.

    Counts ones when k <= n/2 and zeros otherwise, clamping the running count
    at k'+1 where k' is the relevant threshold."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError("need n >= 1 and 0 <= k <= n")
    count_ones = 2 * k <= n
    kk = k if count_ones else n - k
    cap = kk + 1
    b = max(1, math.ceil(math.log2(kk + 2)))
    Y = lambda j: [n + j * b + i + 1 for i in range(b)]
    clauses: list[list[int]] = [[-v] for v in Y(0)]
    for j in range(1, n + 1):
        prev, cur = Y(j - 1), Y(j)
        for s in range(1 << b):
            for xv in (0, 1):
                inc = xv if count_ones else 1 - xv
                want = min(s + inc, cap) if s <= cap else None
                for s2 in range(1 << b):
                    if s2 == want:
                        continue
                    clauses.append(_forbid(prev, _bits(s, b)) + _forbid([j], [xv]) +
                                   _forbid(cur, _bits(s2, b)))
    last = Y(n)
    for s in range(1 << b):
        ok = s <= k if count_ones else (s >= kk and s <= cap)
        if not ok:
            clauses.append(_forbid(last, _bits(s, b)))
    aux = [v for j in range(n + 1) for v in Y(j)]
    names = {i: f"x{i}" for i in range(1, n + 1)}
    names.update({v: f"s{j}_{i}" for j in range(n + 1) for i, v in enumerate(Y(j))})
    F = CnfFormula.build(clauses, input_vars=range(1, n + 1), aux_vars=aux, names=names)
    spec = cardinality_function(n, k) if n <= MAX_ORACLE_VARS else None
    td = TreeDecomposition.path([set(Y(j - 1)) | set(Y(j)) | {j} for j in range(1, n + 1)])
    return GadgetOutput(F, spec, td)


def perm_encoding(n: int) -> GadgetOutput:
    """PERM_n: a ladder per row plus column memory bits carried row to row.

    The witness is a path over cells in row-major order; each bag holds the
    not-yet-visited column bits of the previous row, the visited ones of the
    current row, the cell and its two ladder bits, for width n + 3."""
    if n < 1:
        raise ValueError("n must be at least 1")
    x = lambda i, j: perm_var(n, i, j)
    base = n * n
    y = lambda i, j: base + (i - 1) * (n + 1) + j + 1          # j = 0..n
    cbase = base + n * (n + 1)
    c = lambda i, j: cbase + (i - 1) * n + j                    # column j seen in rows 1..i
    clauses: list[list[int]] = []
    for i in range(1, n + 1):
        clauses.append([-y(i, 0)])
        for j in range(1, n + 1):
            clauses += [[-y(i, j - 1), y(i, j)], [-x(i, j), -y(i, j - 1)],
                        [-x(i, j), y(i, j)], [x(i, j), y(i, j - 1), -y(i, j)]]
        clauses.append([y(i, n)])
        for j in range(1, n + 1):
            if i == 1:
                clauses += [[-x(1, j), c(1, j)], [x(1, j), -c(1, j)]]
            else:
                clauses += [[-c(i - 1, j), -x(i, j)], [-c(i - 1, j), c(i, j)],
                            [-x(i, j), c(i, j)], [c(i - 1, j), x(i, j), -c(i, j)]]
    clauses += [[c(n, j)] for j in range(1, n + 1)]
    aux = [y(i, j) for i in range(1, n + 1) for j in range(n + 1)]
    aux += [c(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    names = {x(i, j): f"x{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1)}
    names.update({y(i, j): f"y{i}_{j}" for i in range(1, n + 1) for j in range(n + 1)})
    names.update({c(i, j): f"c{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1)})
    F = CnfFormula.build(clauses, input_vars=range(1, n * n + 1), aux_vars=aux, names=names)
    bags = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            bag = {x(i, j), y(i, j - 1), y(i, j)}
            if i > 1:
                bag |= {c(i - 1, jj) for jj in range(j, n + 1)}
            bag |= {c(i, jj) for jj in range(1, j + 1)}
            bags.append(bag)
    spec = perm_function(n) if n * n <= MAX_ORACLE_VARS else None
    return GadgetOutput(F, spec, TreeDecomposition.path(bags))


PERM_WIDTH_FACTOR = 4  # perm_encoding witness width n + 3 <= 4n for all n >= 1
