"""Independent reference implementations used only by the tests.

Everything here is deliberately naive (itertools enumeration, plain sets) and
shares no code with the library beyond reading public dataclass fields.
"""
from __future__ import annotations

import itertools
from functools import lru_cache


def clause_sat(clause, a) -> bool:
    return any(a[abs(l)] == (l > 0) for l in clause)


def brute_models(clauses, vars_):
    """Set of satisfying assignments as tuples ordered like vars_."""
    vars_ = list(vars_)
    out = set()
    for bits in itertools.product((False, True), repeat=len(vars_)):
        a = dict(zip(vars_, bits))
        if all(clause_sat(c, a) for c in clauses):
            out.add(tuple(int(b) for b in bits))
    return out


def brute_projection(clauses, inputs, aux):
    """Input tuples (ordered like inputs) that extend to a model."""
    inputs, aux = list(inputs), list(aux)
    full = brute_models(clauses, inputs + aux)
    return {m[:len(inputs)] for m in full}


def brute_extension_counts(clauses, inputs, aux):
    inputs, aux = list(inputs), list(aux)
    counts = {}
    for m in brute_models(clauses, inputs + aux):
        counts[m[:len(inputs)]] = counts.get(m[:len(inputs)], 0) + 1
    return counts


def onset_tuples(spec):
    """Onset of a FunctionSpec as tuples ordered like spec.vars."""
    out = set()
    for row in range(1 << spec.n):
        if spec.onset[row]:
            out.add(tuple((row >> (spec.n - 1 - i)) & 1 for i in range(spec.n)))
    return out


# ---------------------------------------------------------------------------
# graphs


def brute_treewidth(vertices, edges) -> int:
    """Exact treewidth by dynamic programming over vertex subsets (elimination orderings)."""
    vertices = list(vertices)
    n = len(vertices)
    if n == 0:
        return -1
    idx = {v: i for i, v in enumerate(vertices)}
    adj = [0] * n
    for u, v in edges:
        adj[idx[u]] |= 1 << idx[v]
        adj[idx[v]] |= 1 << idx[u]

    def q(S: int, v: int) -> int:
        # vertices outside S+v reachable from v through S
        seen, stack, out = 1 << v, [v], 0
        while stack:
            x = stack.pop()
            nb = adj[x] & ~seen
            seen |= nb
            for y in range(n):
                if nb >> y & 1:
                    if S >> y & 1:
                        stack.append(y)
                    else:
                        out |= 1 << y
        return bin(out).count("1")

    @lru_cache(maxsize=None)
    def tw(S: int) -> int:
        if S == 0:
            return -1
        best = n
        for v in range(n):
            if S >> v & 1:
                R = S & ~(1 << v)
                best = min(best, max(tw(R), q(R, v)))
        return best

    return tw((1 << n) - 1)


def td_is_valid(vertices, edges, bags, parent) -> bool:
    """Plain tree-decomposition check: tree, coverage, edges, connectivity."""
    nodes = list(bags)
    roots = [t for t in nodes if parent[t] is None]
    if len(roots) != 1:
        return False
    for t in nodes:  # no cycles
        seen, x = set(), t
        while x is not None:
            if x in seen:
                return False
            seen.add(x)
            x = parent[x]
    covered = set().union(*bags.values()) if bags else set()
    if not set(vertices) <= covered or not covered <= set(vertices):
        return False
    for u, v in edges:
        if not any(u in b and v in b for b in bags.values()):
            return False
    for v in vertices:
        holding = {t for t in nodes if v in bags[t]}
        tops = [t for t in holding if parent[t] not in holding]
        if len(tops) != 1:
            return False
    return True


def incidence_edges(clauses):
    out = set()
    for i, c in enumerate(clauses, 1):
        for l in c:
            out.add((abs(l), ("C", i)))
    return out


def primal_edges(clauses):
    out = set()
    for c in clauses:
        vs = sorted({abs(l) for l in c})
        out |= set(itertools.combinations(vs, 2))
    return out


# ---------------------------------------------------------------------------
# circuits


def eval_circuit(kind, args, output, a) -> bool:
    memo = {}

    def val(g):
        if g in memo:
            return memo[g]
        if kind[g] == "L":
            x, pos = args[g]
            r = bool(a[x]) == bool(pos)
        elif kind[g] == "A":
            r = all(val(h) for h in args[g])
        else:
            r = any(val(h) for h in args[g])
        memo[g] = r
        return r

    return val(output)


def circuit_onset(D, vars_):
    out = set()
    for bits in itertools.product((0, 1), repeat=len(vars_)):
        if eval_circuit(D.kind, D.args, D.output, dict(zip(vars_, bits))):
            out.add(bits)
    return out


def circuit_deterministic(D, vars_) -> bool:
    for bits in itertools.product((0, 1), repeat=len(vars_)):
        a = dict(zip(vars_, bits))
        for g, k in enumerate(D.kind):
            if k == "O" and sum(eval_circuit(D.kind, D.args, h, a) for h in D.args[g]) > 1:
                return False
    return True


# ---------------------------------------------------------------------------
# communication matrices


def brute_min_cover(M) -> int:
    """Smallest number of all-ones rectangles covering the ones of a tiny 0/1 matrix."""
    R, C = len(M), len(M[0])
    ones = {(r, c) for r in range(R) for c in range(C) if M[r][c]}
    if not ones:
        return 0
    rects = []
    for rs in range(1, 1 << R):
        rows = [r for r in range(R) if rs >> r & 1]
        for cs in range(1, 1 << C):
            cols = [c for c in range(C) if cs >> c & 1]
            if all(M[r][c] for r in rows for c in cols):
                rects.append(frozenset((r, c) for r in rows for c in cols))
    # keep maximal ones only
    rects = [r for r in rects if not any(r < s for s in rects)]
    for k in range(1, len(ones) + 1):
        for combo in itertools.combinations(rects, k):
            if set().union(*combo) == ones:
                return k
    raise AssertionError("unreachable")
