"""Re-encoding constructions.

* :func:`dnnf_to_cnf` turns a complete structured DNNF into a clausal
  encoding whose auxiliary variables guess a proof tree, one or-gate index
  per internal v-tree node; the v-tree itself is a special decomposition.
* :func:`dnnf_to_scw` adds a signed k-expression built along that decomposition.
* :func:`cliquegood` regroups the variables of a bounded-treewidth encoding
  into groups of ceil(log2 n) so that every group is a module, giving
  modular treewidth and cliquewidth witnesses linear in the group count.
* :func:`pipeline_reverse` chains compilation, forgetting and :func:`dnnf_to_cnf`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from widthforge.cliquewidth import (CwExpression, create, join, rename, special_td_to_scw, union,
                                    validate_expression)
from widthforge.cnf import MAX_ORACLE_VARS, Clause, CnfFormula, has_dependent_aux
from widthforge.compiler import compile_cnf
from widthforge.dnnf import (DnnfConstant, StructuredDnnf, forget, forget_preserving_determinism,
                             is_deterministic, reduce, validate_dnnf)
from widthforge.graphs import (clause_vertex, incidence_graph, module_contraction, primal_graph,
                               signed_incidence_graph)
from widthforge.treewidth import TreeDecomposition, measure, validate_td

# bag-width slack in dnnf_to_cnf: width <= 3*ceil(log2 k) + 1 <= 9*ceil(log2 k) + 2
DNNF_TW_SLACK = 2
# cliquegood witnesses: modular width <= 6(k+1) <= 12k, labels <= 13(k+1) + 2 <= 28k
CLIQUEGOOD_MTW_FACTOR = 12
CLIQUEGOOD_CW_FACTOR = 28


class PreconditionError(ValueError):
    pass


@dataclass
class EncodingResult:
    formula: CnfFormula
    td_witness: TreeDecomposition
    special_witness: TreeDecomposition | None = None
    scw_witness: CwExpression | None = None
    dependent: bool = False
    extras: dict = field(default_factory=dict)


def clog2(k: int) -> int:
    return math.ceil(math.log2(k)) if k > 1 else 0


def _bits(value: int, width: int) -> list[int]:
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def _forbid(vars_, bits) -> list[int]:
    return [-v if b else v for v, b in zip(vars_, bits)]


# ---------------------------------------------------------------------------
# DNNF -> CNF


def _constant_encoding(D: DnnfConstant) -> EncodingResult:
    vars_ = tuple(sorted(D.vars))
    clauses = [] if D.value else [Clause(frozenset())]
    F = CnfFormula(tuple(clauses), frozenset(vars_), frozenset())
    td = TreeDecomposition.path([{v} for v in vars_] or [set()])
    return EncodingResult(F, td, td, None, True, {"k": 0, "n": len(vars_), "dnnf": D})


def dnnf_to_cnf(D: StructuredDnnf | DnnfConstant, check_determinism: bool = True) -> EncodingResult:
    """Clausal encoding of the function of D whose models are its satisfied proof trees."""
    if isinstance(D, DnnfConstant):
        return _constant_encoding(D)
    validate_dnnf(D)
    D = reduce(D)
    T = D.vtree
    inputs = T.variables
    if T.root in T.var:
        x, positive = D.args[D.output]
        F = CnfFormula.build([[x if positive else -x]], input_vars=inputs)
        td = TreeDecomposition.single([x])
        return EncodingResult(F, td, td, None, True, {"k": 0, "n": 1, "dnnf": D})
    next_id = max(inputs) + 1
    units: dict[int, list[int]] = {}
    for g, t in enumerate(D.mu):
        if D.kind[g] == "O" and t != T.root:
            units.setdefault(t, []).append(g)
    units[T.root] = [D.output]
    block: dict[int, list[int]] = {}
    names: dict[int, str] = {}
    for t in T.postorder():
        if t in T.var:
            continue
        b = clog2(len(units.get(t, [])))
        block[t] = list(range(next_id, next_id + b))
        for i, v in enumerate(block[t]):
            names[v] = f"g{t}_{i}"
        next_id += b

    clauses: list[list[int]] = []
    for t in T.postorder():
        if t in T.var:
            continue
        S = units.get(t, [])
        b = len(block[t])
        for code in range(len(S), 1 << b):
            clauses.append(_forbid(block[t], _bits(code, b)))
        # for each child, the selectable gates and the variables that select them
        sides = []
        for c in T.children[t]:
            if c in T.var:
                x = T.var[c]
                lits = {D.args[g][1]: g for g in range(D.num_gates)
                        if D.mu[g] == c and D.kind[g] == "L"}
                sides.append(([x], [(lits.get(True), [1]), (lits.get(False), [0])]))
            else:
                bc = len(block[c])
                sides.append((block[c], [(g, _bits(i, bc)) for i, g in enumerate(units.get(c, []))]))
        for i, g in enumerate(S):
            if D.kind[g] == "O":
                pairs = {tuple(D.args[a]) for a in D.args[g]}
            elif D.kind[g] == "A":
                pairs = {tuple(D.args[g])}
            else:
                pairs = set()
            for (g1, bits1), (g2, bits2) in itertools.product(sides[0][1], sides[1][1]):
                if g1 is not None and g2 is not None and ((g1, g2) in pairs or (g2, g1) in pairs):
                    continue
                clauses.append(_forbid(block[t], _bits(i, b)) + _forbid(sides[0][0], bits1)
                               + _forbid(sides[1][0], bits2))
    aux = [v for t in block for v in block[t]]
    F = CnfFormula.build(clauses, input_vars=inputs, aux_vars=aux, names=names)

    bags, parent = {}, T.parent()
    for t in T.postorder():
        if t in T.var:
            bags[t] = frozenset([T.var[t]])
        else:
            bag = set(block[t])
            for c in T.children[t]:
                bag |= set(block[c]) if c in block else {T.var[c]}
            bags[t] = frozenset(bag)
    td = TreeDecomposition(bags, dict(parent), True)
    if check_determinism and len(inputs) <= MAX_ORACLE_VARS:
        dependent = bool(is_deterministic(D))
    else:
        dependent = bool(D.deterministic)
    k = D.width
    return EncodingResult(F, td, td, None, dependent,
                          {"k": k, "n": len(inputs), "dnnf": D})


def dnnf_size_bounds(n: int, k: int) -> tuple[int, int, int]:
    """Variable, clause and bag-width budgets for an n-variable, width-k source."""
    L = clog2(max(k, 1))
    return n * (3 * L + 1), 3 * n * k ** 3 + 4 * n, 9 * L + DNNF_TW_SLACK


def dnnf_to_scw(D: StructuredDnnf | DnnfConstant) -> EncodingResult:
    res = dnnf_to_cnf(D)
    F = res.formula
    if not F.clauses and not F.variables:
        res.scw_witness = CwExpression(())
        return res
    e = special_td_to_scw(F, res.special_witness)
    res.extras["scw_labels"] = validate_expression(e, signed_incidence_graph(F))
    res.scw_witness = e
    return res


# ---------------------------------------------------------------------------
# treewidth -> modular treewidth / cliquewidth


def _binary_with_clause_slots(F: CnfFormula, T: TreeDecomposition):
    """Copy bags along chains so that every node has at most two children and
    carries at most one clause.  Returns (bags, parent, clause_at)."""
    order = T.preorder()
    host: dict[int, list[int]] = {t: [] for t in T.bags}
    for ci, c in enumerate(F.clauses):
        vs = c.variables
        t = next((t for t in order if vs <= T.bags[t]), None)
        if t is None:
            raise PreconditionError(f"clause {ci + 1} is not covered by any bag")
        host[t].append(ci)
    ch = T.children()
    bags, parent, clause_at = {}, {}, {}
    counter = itertools.count()
    first: dict[int, int] = {}
    for t in order:
        kids = ch[t]
        L = max(len(host[t]), len(kids) - 1, 1)
        chain = [next(counter) for _ in range(L)]
        for i, u in enumerate(chain):
            bags[u] = T.bags[t]
            parent[u] = chain[i - 1] if i else None
            if i < len(host[t]):
                clause_at[u] = host[t][i]
        first[t] = chain[0]
        slots = [chain[j] for j in range(L - 1)] + [chain[-1], chain[-1]]
        for c, slot in zip(kids, slots):
            parent[("pending", c)] = slot
    for t in order:
        key = ("pending", t)
        if key in parent:
            parent[first[t]] = parent.pop(key)
    return bags, parent, clause_at


def _rainbow_groups(bags, parent, order, colors: int, g: int) -> dict:
    """Top-down coloring with at most g variables of each color per bag."""
    mu = {}
    for t in order:
        count = [0] * (colors + 1)
        for v in bags[t]:
            if v in mu:
                count[mu[v]] += 1
        for v in sorted(bags[t]):
            if v in mu:
                continue
            c = min(range(1, colors + 1), key=lambda i: (count[i], i))
            if count[c] >= g:
                raise PreconditionError("bag too large for the requested grouping")
            mu[v] = c
            count[c] += 1
    return mu


def _tree_coloring(parent, order) -> dict:
    """4 colors: every node differs from its parent, grandparent and siblings."""
    eta = {}
    kids: dict = {}
    for t in order:
        p = parent[t]
        if p is not None:
            kids.setdefault(p, []).append(t)
    for t in order:
        p = parent[t]
        banned = set()
        if p is not None:
            banned.add(eta[p])
            if parent[p] is not None:
                banned.add(eta[parent[p]])
            banned |= {eta[s] for s in kids[p] if s in eta}
        eta[t] = min(c for c in range(4) if c not in banned)
    return eta


def _clausify(vars_, accept) -> list[list[int]]:
    """Full clausification: block every assignment to vars_ that accept() rejects."""
    out = []
    for bits in itertools.product((0, 1), repeat=len(vars_)):
        if not accept(dict(zip(vars_, bits))):
            out.append(_forbid(vars_, bits))
    return out


def cliquegood(F: CnfFormula, T: TreeDecomposition, k: int | None = None) -> EncodingResult:
    """Group-based re-encoding whose incidence graph has modular treewidth and
    cliquewidth linear in k, for a decomposition of width at most k*ceil(log2 n)."""
    n = len(F.variables)
    if n < 2:
        raise PreconditionError("the grouping construction needs at least two variables")
    G = primal_graph(F)
    w = validate_td(G, T)
    g = math.ceil(math.log2(n))
    if k is None:
        k = max(1, math.ceil(w / g))
    if w > k * g:
        raise PreconditionError(f"decomposition width {w} exceeds k*ceil(log2 n) = {k * g}")
    bags, parent, clause_at = _binary_with_clause_slots(F, T)
    order = TreeDecomposition(bags, parent).preorder()
    colors = k + 1
    mu = _rainbow_groups(bags, parent, order, colors, g)
    eta = _tree_coloring(parent, order)
    kids: dict = {t: [] for t in order}
    for t in order:
        if parent[t] is not None:
            kids[parent[t]].append(t)

    # copies: the topmost occurrence keeps the original id
    next_id = max(F.variables) + 1
    copy: dict[tuple[int, int], int] = {}
    names: dict[int, str] = {}
    for t in order:
        for x in sorted(bags[t]):
            if parent[t] is None or x not in bags[parent[t]]:
                copy[(x, t)] = x
            else:
                copy[(x, t)] = next_id
                names[next_id] = f"{F.name(x)}@{t}"
                next_id += 1

    def group(i, t):
        return [copy[(x, t)] for x in sorted(bags[t]) if mu[x] == i]

    clauses: list[list[int]] = []
    blocks: dict = {}

    def emit(key, cls):
        start = len(clauses)
        clauses.extend(cls)
        blocks[key] = [clause_vertex(j + 1) for j in range(start, len(clauses))]

    for t in order:
        p = parent[t]
        if p is None:
            continue
        for i in range(1, colors + 1):
            shared = [x for x in sorted(bags[t] & bags[p]) if mu[x] == i]
            vs = group(i, p) + group(i, t)
            if not shared:
                continue
            pairs = [(copy[(x, p)], copy[(x, t)]) for x in shared]
            emit(("eq", t, i), _clausify(vs, lambda a, pr=pairs: all(a[u] == a[v] for u, v in pr)))
    selectors: dict = {}
    for t in order:
        ci = clause_at.get(t)
        if ci is None:
            continue
        C = F.clauses[ci]
        ys = []
        for i in range(1, colors + 1):
            X = group(i, t)
            if not X:
                continue
            y = next_id
            next_id += 1
            names[y] = f"sel{ci + 1}_{i}"
            ys.append((i, y))
            lits = [(copy[(abs(l), t)], l > 0) for l in C.literals if mu[abs(l)] == i]

            def accept(a, y=y, lits=lits):
                sat = any(a[v] == (1 if pos else 0) for v, pos in lits)
                return a[y] == (1 if sat else 0)

            emit(("sel", t, i), _clausify(X + [y], accept))
        selectors[t] = ys
        emit(("cp", t), [[y for _, y in ys]])

    aux = set(F.aux_vars) | {v for (x, t), v in copy.items() if v != x}
    aux |= {y for ys in selectors.values() for _, y in ys}
    F2 = CnfFormula.build(clauses, input_vars=F.input_vars, aux_vars=aux,
                          names={**dict(F.names), **names})

    # modular treewidth witness on module representatives
    inc = incidence_graph(F2)
    contracted, rep = module_contraction(inc)
    mbags = {}
    for t in order:
        bag = set()
        for i in range(1, colors + 1):
            bag.update(group(i, t))
            bag.update(blocks.get(("eq", t, i), ()))
            for c in kids[t]:
                bag.update(blocks.get(("eq", c, i), ()))
            bag.update(blocks.get(("sel", t, i), ()))
        bag.update(y for _, y in selectors.get(t, ()))
        bag.update(blocks.get(("cp", t), ()))
        mbags[t] = frozenset(rep[v] for v in bag)
    covered = set().union(*mbags.values())
    leftover = set(contracted.roles) - covered
    if leftover:
        root = order[0]
        mbags[root] = mbags[root] | leftover
    mtd = TreeDecomposition(mbags, dict(parent))
    mtw = validate_td(contracted, mtd)

    # unsigned k-expression for the incidence graph of F2
    ops: list = []
    dummy = "d"
    pieces: dict = {}
    for t in reversed(order):
        e = eta[t]
        count = 0

        def push(op_list):
            nonlocal count
            ops.extend(op_list)
            count += 1
            if count == 2:
                ops.append(union())
                count = 1

        for c in kids[t]:
            if pieces[c]:
                count += 1
                if count == 2:
                    ops.append(union())
                    count = 1
        for i in range(1, colors + 1):
            for v in group(i, t):
                push([create(v, (i, e, 1))])
        ys = selectors.get(t, [])
        for i, y in ys:
            for cv in blocks[("sel", t, i)]:
                push([create(cv, (i, e, 0))])
            ops.append(join((i, e, 0), (i, e, 1)))
            push([create(y, ("y", i))])
            ops.append(join(("y", i), (i, e, 0)))
        if t in selectors:
            for cv in blocks[("cp", t)]:
                push([create(cv, "Cp")])
            for i, _ in ys:
                ops.append(join("Cp", ("y", i)))
                ops.append(rename(("y", i), dummy))
                ops.append(rename((i, e, 0), dummy))
            ops.append(rename("Cp", dummy))
        for c in kids[t]:
            ec = eta[c]
            for i in range(1, colors + 1):
                cvs = blocks.get(("eq", c, i), ())
                if not cvs:
                    continue
                for cv in cvs:
                    push([create(cv, (i, e, 2))])
                ops.append(join((i, ec, 1), (i, e, 2)))
                ops.append(join((i, e, 1), (i, e, 2)))
                ops.append(rename((i, e, 2), dummy))
            for i in range(1, colors + 1):
                ops.append(rename((i, ec, 1), dummy))
        pieces[t] = count
    expr = CwExpression(tuple(op for op in ops if not _noop_rename(op)))
    labels = validate_expression(expr, inc)

    dependent = False
    if len(F2.input_vars) <= MAX_ORACLE_VARS:
        try:
            dependent = bool(has_dependent_aux(F2))
        except ValueError:
            dependent = False
    td2 = measure(primal_graph(F2), budget=0).witness
    return EncodingResult(F2, td2, None, None, dependent,
                          {"k": k, "group": g, "mtw_witness": mtd, "mtw": mtw,
                           "modular_graph": contracted, "cw_witness": expr, "cw_labels": labels,
                           "eta": eta, "coloring": mu})


def _noop_rename(op) -> bool:
    return op[0] == "r" and op[1] == op[2]


# ---------------------------------------------------------------------------
# pipelines


def pipeline_reverse(F: CnfFormula, T: TreeDecomposition | None = None,
                     deterministic: bool | None = None) -> EncodingResult:
    """Compile F, forget its auxiliary variables and re-encode with dnnf_to_cnf.

    With ``deterministic`` unset, the determinism-preserving forget is used
    exactly when F has dependent auxiliary variables."""
    if T is None:
        T = measure(primal_graph(F)).witness
    D = reduce(compile_cnf(F, T))
    if deterministic is None:
        deterministic = bool(has_dependent_aux(F)) if F.aux_vars else True
    chain = [D]
    for z in sorted(F.aux_vars):
        D = forget_preserving_determinism(D, z) if deterministic else reduce(forget(D, z))
        chain.append(D)
    res = dnnf_to_cnf(D)
    res.extras["chain"] = chain
    res.extras["forgotten"] = D
    return res
