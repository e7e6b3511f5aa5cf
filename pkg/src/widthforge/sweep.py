"""Deterministic experiment suites.

Each check returns a :class:`Check` with a pass flag and report lines holding
the measured numbers.  ``run_suite`` renders a plain-text report; with the
same seed the bytes are identical across runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from widthforge.cliquewidth import special_td_to_scw, validate_expression
from widthforge.cnf import (MAX_ORACLE_VARS, CnfFormula, has_dependent_aux, is_clausal_encoding,
                            models, project_models)
from widthforge.comm import (Partition, cardinality_fooling_family, cc_best_third, cut_cc_audit,
                             fooling_set_bound, min_rectangle_cover)
from widthforge.compiler import compile_cnf
from widthforge.dnnf import DnnfConstant, StructuredDnnf, dnnf_function, is_deterministic, validate_dnnf
from widthforge.gadgets import (PERM_WIDTH_FACTOR, amo_ladder, amo_naive, cardinality_binary,
                                cardinality_function, dnf_example_function, eq_function,
                                example_formula, grid_formula, perm_encoding)
from widthforge.graphs import incidence_graph, module_contraction, primal_graph, signed_incidence_graph
from widthforge.reencode import (CLIQUEGOOD_CW_FACTOR, CLIQUEGOOD_MTW_FACTOR, cliquegood, dnnf_size_bounds,
                                 dnnf_to_cnf, dnnf_to_scw, pipeline_reverse)
from widthforge.treewidth import (exact_treewidth, make_special, measure, validate_td, width_report)

DEFAULT_SEED = 0
CORPUS_SIZE = 200
CORPUS_MAX_VARS = 12
CORPUS_MAX_WIDTH = 5


@dataclass
class Check:
    key: str
    title: str
    ok: bool = True
    lines: list[str] = field(default_factory=list)

    def row(self, ok: bool, text: str) -> None:
        self.ok &= bool(ok)
        self.lines.append(f"  [{'ok' if ok else 'FAIL'}] {text}")

    def render(self) -> str:
        head = f"{'PASS' if self.ok else 'FAIL'} {self.key}: {self.title}"
        return "\n".join([head] + self.lines)


# ---------------------------------------------------------------------------
# corpus


def random_formula(rng: np.random.Generator, n: int, band: int) -> CnfFormula:
    """Clauses of mostly 2-3 literals drawn from a sliding window of band+1 variables."""
    m = int(rng.integers(n, 2 * n + 1))
    clauses = []
    for _ in range(m):
        lo = int(rng.integers(1, max(2, n - band + 1)))
        window = np.arange(lo, min(n, lo + band) + 1)
        size = 1 if rng.random() < 0.05 else int(rng.integers(2, 4))
        size = min(size, len(window))
        vs = rng.choice(window, size=size, replace=False)
        clauses.append([int(v) if rng.random() < 0.5 else -int(v) for v in sorted(vs)])
    return CnfFormula.build(clauses, input_vars=range(1, n + 1))


def random_corpus(seed: int = DEFAULT_SEED, count: int = CORPUS_SIZE):
    """(name, formula, exact primal decomposition) triples with width <= 5."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(3, CORPUS_MAX_VARS + 1))
        band = int(rng.integers(1, CORPUS_MAX_WIDTH + 1))
        F = random_formula(rng, n, band)
        w, T = exact_treewidth(primal_graph(F))
        if w <= CORPUS_MAX_WIDTH:
            out.append((f"rand{len(out):03d}", F, T))
    return out


def gadget_corpus():
    """Gadget encodings with at most 12 variables, with their witnesses."""
    out = []
    for n in range(2, 6):
        out.append((f"amo_naive{n}", amo_naive(n).formula, amo_naive(n).td))
    for n in range(2, 6):
        g = amo_ladder(n)
        out.append((f"amo_ladder{n}", g.formula, g.td))
    for n, k in ((3, 1), (4, 1), (4, 2)):
        g = cardinality_binary(n, k)
        if g.formula.num_vars <= CORPUS_MAX_VARS:
            out.append((f"card{n}_{k}", g.formula, g.td))
    out.append(("example", example_formula(), measure(primal_graph(example_formula())).witness))
    G = grid_formula(3, 3)
    out.append(("grid3x3", G, measure(primal_graph(G)).witness))
    return out


# ---------------------------------------------------------------------------
# checks


def check_worked_example() -> Check:
    c = Check("C1", "worked example widths")
    rep = width_report(example_formula())
    want = {"tw_p": 3, "tw_i": 2, "mtw": 1}
    for name, m in rep.items():
        if name in want:
            valid = validate_td(m.graph, m.witness) == m.value
            c.row(m.tag == "exact" and m.value == want[name] and valid,
                  f"{name}={m.value} {m.tag}, witness width {m.witness.width}")
    return c


def check_amo() -> Check:
    c = Check("C2", "at-most-one encodings")
    for n in range(3, 8):
        w, T = exact_treewidth(primal_graph(amo_naive(n).formula))
        c.row(w == n - 1, f"naive n={n}: exact tw_p={w}")
        g = amo_ladder(n)
        wl = validate_td(primal_graph(g.formula), g.td)
        enc = bool(is_clausal_encoding(g.formula, g.spec))
        dep = bool(has_dependent_aux(g.formula))
        c.row(wl == 2 and enc and dep, f"ladder n={n}: witness width {wl}, encoding={enc}, dependent={dep}")
    return c


def check_cardinality() -> Check:
    c = Check("C3", "binary cardinality encodings")
    by_n: dict[int, list[tuple[int, int]]] = {}
    for n in range(1, 13):
        for k in range(0, n + 1):
            g = cardinality_binary(n, k)
            b = math.ceil(math.log2(min(k, n - k) + 2))
            enc = bool(is_clausal_encoding(g.formula, g.spec))
            wl = validate_td(primal_graph(g.formula), g.td)
            c.row(enc and wl <= 2 * b + 1, f"n={n} k={k}: encoding={enc}, witness width {wl} <= {2 * b + 1}")
            m = measure(primal_graph(g.formula), budget=200_000)
            by_n.setdefault(n, []).append((b, m.value))
            c.lines[-1] += f", tw_p {'=' if m.tag == 'exact' else '<='}{m.value}"
    for n, pts in sorted(by_n.items()):
        best: dict[int, int] = {}
        for b, w in pts:
            best[b] = max(best.get(b, -1), w)
        seq = [best[b] for b in sorted(best)]
        c.row(all(x <= y for x, y in zip(seq, seq[1:])), f"n={n}: max tw_p by bit count {seq}")
    return c


def compiled_corpus(seed: int):
    out = []
    for name, F, T in random_corpus(seed) + gadget_corpus():
        k = T.width
        D = compile_cnf(F, T)
        out.append((name, F, T, k, D))
    return out


def check_compiler(corpus) -> Check:
    c = Check("C4", "compiler laws")
    bad = 0
    for name, F, T, k, D in corpus:
        spec = models(F)
        if isinstance(D, DnnfConstant):
            ok = D.function() == spec
            wi = 0
        else:
            wi = validate_dnnf(D)
            ok = bool(is_deterministic(D)) and dnnf_function(D) == spec and wi <= 2 ** (k + 1)
        bad += not ok
        if not ok:
            c.row(False, f"{name}: k={k} wi={wi}")
    c.row(bad == 0, f"{len(corpus)} formulas compiled; valid, deterministic, equivalent, wi <= 2^(k+1)")
    return c


def check_dnnf_to_cnf(corpus) -> Check:
    c = Check("C5", "circuit to CNF size and width laws")
    bad, worst = 0, 0
    for name, F, T, k, D in corpus:
        if isinstance(D, DnnfConstant):
            continue
        res = dnnf_to_cnf(D)
        G = res.formula
        n, wi = res.extras["n"], res.extras["k"]
        vb, cb, wb = dnnf_size_bounds(n, wi)
        width = validate_td(primal_graph(G), res.td_witness)
        spec = dnnf_function(D)
        enc = bool(is_clausal_encoding(G, spec))
        dep = bool(has_dependent_aux(G))
        ok = enc and G.num_vars <= vb and len(G.clauses) <= cb and width <= wb and dep and res.dependent
        worst = max(worst, width - (wb - 2))
        bad += not ok
        if not ok:
            c.row(False, f"{name}: vars {G.num_vars}/{vb} clauses {len(G.clauses)}/{cb} "
                         f"width {width}/{wb} encoding={enc} dependent={dep}")
    c.row(bad == 0, f"all compiled circuits re-encoded within budgets (slack used: {worst} of 2)")
    return c


def dependent_corpus():
    """Encodings with auxiliary variables that are all dependent, within the brute-force cap."""
    out = []
    for n in range(1, 8):
        g = amo_ladder(n)
        out.append((f"amo_ladder{n}", g.formula, g.td))
    for n, k in ((3, 1), (4, 1), (4, 2), (5, 2), (6, 1), (6, 3)):
        g = cardinality_binary(n, k)
        if g.formula.num_vars <= MAX_ORACLE_VARS:
            out.append((f"card{n}_{k}", g.formula, g.td))
    g = perm_encoding(2)
    out.append(("perm2", g.formula, g.td))
    return [t for t in out if t[1].num_vars <= MAX_ORACLE_VARS and has_dependent_aux(t[1])]


def check_forget_chain() -> Check:
    c = Check("C6", "determinism-preserving forgetting")
    for name, F, T in dependent_corpus():
        res = pipeline_reverse(F, T)
        steps = [bool(is_deterministic(D)) for D in res.extras["chain"]]
        proj = project_models(F)
        enc = bool(is_clausal_encoding(res.formula, proj))
        c.row(all(steps) and enc and res.dependent,
              f"{name}: {len(steps) - 1} forgets, deterministic at every step={all(steps)}, "
              f"round trip encoding={enc}")
    return c


def check_scw(corpus) -> Check:
    c = Check("C7", "special decompositions to signed expressions")
    bad, gap = 0, 0
    for name, F, T, k, D in corpus:
        S = make_special(T)
        w = validate_td(primal_graph(F), S)
        e = special_td_to_scw(F, S)
        labels = validate_expression(e, signed_incidence_graph(F))
        ok = labels <= w + 3
        gap = max(gap, labels - (w + 1))
        if isinstance(D, StructuredDnnf):
            r = dnnf_to_scw(D)
            sw = r.special_witness.width
            ok &= r.extras["scw_labels"] <= sw + 3
        bad += not ok
        if not ok:
            c.row(False, f"{name}: labels {labels} special width {w}")
    c.row(bad == 0, f"all expressions evaluate exactly; labels <= special width + 3 (max gap over w+1: {gap})")
    return c


def cliquegood_instances():
    out = [("grid3x3", grid_formula(3, 3), None), ("grid2x3", grid_formula(2, 3), None),
           ("example", example_formula(), None)]
    for n in (4, 5):
        g = amo_ladder(n)
        out.append((f"amo_ladder{n}", g.formula, g.td, None))
    g = amo_ladder(8)
    out.append(("amo_ladder8", g.formula, g.td, 2))
    out.append(("amo_naive4", amo_naive(4).formula, amo_naive(4).td, None))
    g = cardinality_binary(4, 1)
    out.append(("card4_1", g.formula, g.td, None))
    g = perm_encoding(2)
    out.append(("perm2", g.formula, g.td, None))
    rng = np.random.default_rng(7)
    for i in range(3):
        out.append((f"rand{i}", random_formula(rng, 6, 3), None, None))
    fixed = []
    for item in out:
        if len(item) == 3:
            name, F, T = item
            T = measure(primal_graph(F)).witness
            fixed.append((name, F, T, None))
        else:
            name, F, T, k = item
            fixed.append((name, F, T or measure(primal_graph(F)).witness, k))
    return fixed


def check_cliquegood() -> Check:
    c = Check("C8", "grouped re-encoding")
    for name, F, T, k in cliquegood_instances():
        res = cliquegood(F, T, k)
        F2 = res.formula
        kk = res.extras["k"]
        enc = bool(is_clausal_encoding(F2, project_models(F)))
        dep_in = bool(has_dependent_aux(F))
        dep_ok = (not dep_in) or res.dependent
        contracted, _ = module_contraction(incidence_graph(F2))
        mtw = validate_td(contracted, res.extras["mtw_witness"])
        labels = validate_expression(res.extras["cw_witness"], incidence_graph(F2))
        ok = (enc and dep_ok and mtw <= CLIQUEGOOD_MTW_FACTOR * kk
              and labels <= CLIQUEGOOD_CW_FACTOR * kk)
        c.row(ok, f"{name}: k={kk} vars {F2.num_vars} clauses {len(F2.clauses)} encoding={enc} "
                  f"dependence kept={dep_ok} mtw witness {mtw} labels {labels}")
    return c


def check_cc() -> Check:
    c = Check("C9", "communication complexity")
    for n in (2, 3, 4):
        p = Partition.of(range(1, n + 1), range(n + 1, 2 * n + 1))
        r = min_rectangle_cover(eq_function(n), p)
        c.row(r.s_min == 2 ** n, f"EQ_{n} under blocks: s_min={r.s_min}, cc={r.cc:g}")
    for n in (2, 3):
        r = cc_best_third(eq_function(n))
        c.row(r.s_min == 1, f"EQ_{n} best balanced: s_min={r.s_min}, Y={list(r.partition.Y)}")
    r = min_rectangle_cover(dnf_example_function(), Partition.of([1, 2], [3]))
    c.row(r.s_min == 2, f"three-model DNF under ({{x,y}},{{z}}): s_min={r.s_min}")
    for n, k in ((9, 3), (12, 2)):
        f = cardinality_function(n, k)
        p = Partition.of(range(1, n // 3 + 1), range(n // 3 + 1, n + 1))
        fr = fooling_set_bound(f, p, cardinality_fooling_family(n, k, p))
        s = min_rectangle_cover(f, p).s_min
        want = min(k, n // 3) + 1
        c.row(fr.ok and fr.bound >= want and s >= fr.bound,
              f"C_{n}^{k}: fooling bound {fr.bound} (need {want}), exact s_min={s}")
    return c


def check_cut_audit(corpus) -> Check:
    c = Check("C10", "cut audit")
    cuts, bad = 0, 0
    for name, F, T, k, D in corpus:
        if F.num_vars > 14:
            continue
        a = cut_cc_audit(D, models(F))
        cuts += len(a.rows)
        if not a.ok:
            v = a.violation
            bad += 1
            c.row(False, f"{name}: node {v.node} gates {v.ell} < s_min {v.s_min}")
    c.row(bad == 0, f"{cuts} cuts audited, gates at node >= s_min everywhere")
    return c


def check_perm() -> Check:
    c = Check("C11", "permutation function")
    for n in (2, 3, 4):
        g = perm_encoding(n)
        cnt = project_models(g.formula).count
        w = validate_td(primal_graph(g.formula), g.td)
        c.row(cnt == math.factorial(n) and w <= PERM_WIDTH_FACTOR * n,
              f"n={n}: onset {cnt} (n!={math.factorial(n)}), witness width {w} <= {PERM_WIDTH_FACTOR * n}")
    from widthforge.gadgets import perm_function
    s2 = cc_best_third(perm_function(2)).s_min
    s3 = cc_best_third(perm_function(3)).s_min
    c.row(s2 < s3, f"best balanced s_min: PERM_2={s2}, PERM_3={s3}")
    return c


# ---------------------------------------------------------------------------
# suites

SUITES = {
    "worked": ("C1",),
    "amo": ("C2",),
    "card": ("C3",),
    "compiler": ("C4",),
    "pipeline": ("C5", "C6"),
    "scw": ("C7",),
    "cliquegood": ("C8",),
    "cc": ("C9", "C11"),
    "audit": ("C10",),
    "all": tuple(f"C{i}" for i in range(1, 12)),
}


def run_checks(keys, seed: int = DEFAULT_SEED) -> list[Check]:
    corpus = None
    out = []
    for key in keys:
        if key in ("C4", "C5", "C7", "C10") and corpus is None:
            corpus = compiled_corpus(seed)
        fn = {
            "C1": check_worked_example, "C2": check_amo, "C3": check_cardinality,
            "C4": lambda: check_compiler(corpus), "C5": lambda: check_dnnf_to_cnf(corpus),
            "C6": check_forget_chain, "C7": lambda: check_scw(corpus), "C8": check_cliquegood,
            "C9": check_cc, "C10": lambda: check_cut_audit(corpus), "C11": check_perm,
        }[key]
        out.append(fn())
    return out


def run_suite(name: str, seed: int = DEFAULT_SEED) -> tuple[str, bool]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    checks = run_checks(SUITES[name], seed)
    return render_report(name, seed, checks), all(ch.ok for ch in checks)


def render_report(name: str, seed: int, checks: list[Check]) -> str:
    lines = [f"suite {name} seed {seed}"] + [ch.render() for ch in checks]
    lines.append(f"{sum(ch.ok for ch in checks)}/{len(checks)} passed")
    return "\n".join(lines) + "\n"
