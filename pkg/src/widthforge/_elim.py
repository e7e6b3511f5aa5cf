"""Variable elimination over clause tables.

Used by the semantic oracle when a formula has more than 24 variables in
total but at most 24 inputs: auxiliary variables are summed (or
existentially projected) out one at a time in min-fill order, so memory is
bounded by the largest intermediate scope rather than by ``2**num_vars``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from widthforge.cnf import MAX_FACTOR_VARS, CapExceeded, CnfFormula


class _Factor:
    __slots__ = ("scope", "table")

    def __init__(self, scope: tuple[int, ...], table: np.ndarray):
        self.scope = scope
        self.table = table


def _clause_factor(lits, dtype) -> _Factor:
    scope = tuple(sorted({abs(l) for l in lits}))
    pos = {v: i for i, v in enumerate(scope)}
    t = np.ones((2,) * len(scope), dtype=dtype)
    # the single falsifying row
    falsify = [0] * len(scope)
    for l in lits:
        falsify[pos[abs(l)]] = 0 if l > 0 else 1
    t[tuple(falsify)] = 0
    return _Factor(scope, t)


def _expand(f: _Factor, scope: tuple[int, ...]) -> np.ndarray:
    pos = {v: i for i, v in enumerate(scope)}
    order = sorted(range(len(f.scope)), key=lambda i: pos[f.scope[i]])
    t = np.transpose(f.table, order) if f.scope else f.table
    shape = [1] * len(scope)
    for v in f.scope:
        shape[pos[v]] = 2
    return t.reshape(shape)


def _multiply(factors: list[_Factor], scope: tuple[int, ...], dtype, cap=None) -> np.ndarray:
    out = np.ones((2,) * len(scope), dtype=dtype)
    for f in factors:
        if dtype == bool:
            out &= _expand(f, scope)
        else:
            out *= _expand(f, scope)
            if cap is not None:
                np.minimum(out, cap, out=out)
    return out


def _pick(aux: set[int], factors: list[_Factor]) -> int:
    """Variable whose elimination creates the smallest scope, lowest id first."""
    best = None
    for v in sorted(aux):
        nbr: set[int] = set()
        for f in factors:
            if v in f.scope:
                nbr.update(f.scope)
        nbr.discard(v)
        size = len(nbr)
        key = (size, v)
        if best is None or key < best[0]:
            best = (key, v)
    return best[1]


def eliminate(F: CnfFormula, keep: Sequence[int], mode: str = "exists",
              cap: int | None = None) -> np.ndarray:
    """Return a table over ``keep`` (in the given order) with, per row, whether
    (``exists``) or how often (``count``) the row extends to a model of F over
    all remaining variables.

    With ``cap`` set, counts saturate at cap, which is exact for the question
    "fewer than cap or not" and never overflows."""
    if mode not in ("exists", "count"):
        raise ValueError(f"unknown mode {mode!r}")
    keep = tuple(keep)
    if len(keep) > 24:
        raise CapExceeded(f"{len(keep)} kept variables exceed the cap 24")
    dtype = bool if mode == "exists" else np.int64
    if any(len(c.literals) == 0 for c in F.clauses):
        return np.zeros((2,) * len(keep), dtype=dtype)
    merged: dict[tuple[int, ...], _Factor] = {}
    for c in F.clauses:
        if c.tautological:
            continue
        f = _clause_factor(c.literals, dtype)
        if f.scope in merged:
            merged[f.scope].table = merged[f.scope].table * f.table
        else:
            merged[f.scope] = f
    factors = list(merged.values())
    others = set(F.variables) - set(keep)
    if mode == "count" and cap is None and len(others) > 62:
        raise CapExceeded("model counts would overflow 64-bit integers")
    mentioned = set().union(*(f.scope for f in factors)) if factors else set()
    scale = 1
    if mode == "count":
        free = len(others - mentioned)
        scale = 1 << free if cap is None else min(1 << min(free, 62), cap)
    pending = others & mentioned
    while pending:
        v = _pick(pending, factors)
        pending.discard(v)
        touching = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        scope = tuple(sorted(set().union(*(f.scope for f in touching))))
        if len(scope) > MAX_FACTOR_VARS:
            raise CapExceeded(f"intermediate scope of {len(scope)} variables exceeds {MAX_FACTOR_VARS}")
        prod = _multiply(touching, scope, dtype, cap)
        axis = scope.index(v)
        red = prod.any(axis=axis) if mode == "exists" else prod.sum(axis=axis, dtype=np.int64)
        if cap is not None and mode == "count":
            np.minimum(red, cap, out=red)
        factors.append(_Factor(tuple(u for u in scope if u != v), red))
    out = _multiply(factors, keep, dtype, cap)
    out = np.broadcast_to(out, (2,) * len(keep)).copy() if keep else out
    if mode == "count":
        out = out * scale
        if cap is not None:
            out = np.minimum(out, cap)
    return out
