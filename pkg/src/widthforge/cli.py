"""Command-line entry point: ``widthforge <subcommand> ...``.

Every subcommand that produces a claim writes the witness next to its output
so the claim can be re-checked with ``widthforge verify``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from widthforge import gadgets
from widthforge.cliquewidth import (ExpressionError, LabelArityError, read_cwx, validate_expression,
                                    write_cwx)
from widthforge.cnf import (FunctionSpec, is_clausal_encoding, models,
                            parse_dimacs, project_models, write_dimacs)
from widthforge.comm import (Partition, cc_best_third, cut_cc_audit, min_rectangle_cover)
from widthforge.compiler import compile_widths
from widthforge.dnnf import DnnfError, dnnf_function, read_sdnnf, validate_dnnf, write_sdnnf
from widthforge.graphs import (dual_graph, incidence_graph, module_contraction, primal_graph,
                               signed_incidence_graph)
from widthforge.reencode import cliquegood, dnnf_to_cnf, dnnf_to_scw, pipeline_reverse
from widthforge.sweep import DEFAULT_SEED, SUITES, run_suite
from widthforge.treewidth import (TDError, is_special, measure, read_td, validate_td, width_report,
                                  write_td)


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Path, text: str, written: list[str]) -> None:
    path.write_text(text)
    written.append(str(path))


KNOWN_SUFFIXES = (".cnf", ".sdnnf", ".td", ".cwx", ".spec", ".gr", ".txt")


def _strip(path: str) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix in KNOWN_SUFFIXES else p


def _out(stem: Path, suffix: str) -> Path:
    return stem.parent / (stem.name + suffix)


def _stem(args, default: str) -> Path:
    """Output stem: --output if given, else the default, minus a known file suffix."""
    return _strip(getattr(args, "output", None) or default)


GRAPHS = {
    "primal": primal_graph,
    "dual": dual_graph,
    "incidence": incidence_graph,
    "modular": lambda F: module_contraction(incidence_graph(F))[0],
}


def td_graph_kind(text: str) -> str:
    for raw in text.splitlines():
        toks = raw.split()
        if len(toks) == 3 and toks[:2] == ["c", "graph"]:
            return toks[2]
    return "primal"


# ---------------------------------------------------------------------------
# subcommands


def cmd_analyze(args) -> int:
    F = parse_dimacs(_read(args.cnf))
    rep = width_report(F, budget=args.budget)
    stem = _stem(args, args.cnf)
    written: list[str] = []
    if args.format == "tsv":
        print("measure\tvalue\ttag")
        for name, m in rep.items():
            print(f"{name}\t{m.value}\t{m.tag}")
    else:
        print(rep.text())
    for name, m in rep.items():
        kind = {"tw_p": "primal", "tw_d": "dual", "tw_i": "incidence", "mtw": "modular"}[name]
        _write(_out(stem, f".{name}.td"), write_td(m.witness, kind), written)
    for w in written:
        print(f"wrote {w}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    F = parse_dimacs(_read(args.cnf))
    status = 0
    for path in args.td or []:
        text = _read(path)
        kind = td_graph_kind(text)
        T = read_td(text)
        try:
            w = validate_td(GRAPHS[kind](F), T)
            if T.special and not is_special(T):
                raise TDError("special", None, "decomposition is marked special but a vertex branches")
            print(f"ok {path}: {kind} decomposition of width {w}{' (special)' if T.special else ''}")
        except TDError as exc:
            print(f"FAIL {path}: {exc}")
            return 1
    for path in args.cwx or []:
        e = read_cwx(_read(path))
        G = signed_incidence_graph(F) if e.signed else incidence_graph(F)
        try:
            k = validate_expression(e, G)
            print(f"ok {path}: {'signed ' if e.signed else ''}expression with {k} labels")
        except LabelArityError as exc:
            print(f"FAIL {path}: {exc}")
            return 2
        except ExpressionError as exc:
            print(f"FAIL {path}: {exc}")
            return 1
    for path in args.spec or []:
        spec = FunctionSpec.from_text(_read(path))
        chk = is_clausal_encoding(F, spec)
        if not chk:
            print(f"FAIL {path}: {chk.reason} at {chk.counterexample}")
            return 1
        print(f"ok {path}: clausal encoding of the {spec.n}-variable function")
    for path in args.sdnnf or []:
        D = read_sdnnf(_read(path))
        try:
            validate_dnnf(D)
        except DnnfError as exc:
            print(f"FAIL {path}: {exc}")
            return 1
        f = dnnf_function(D)
        target = models(F) if set(f.vars) == set(F.variables) else project_models(F)
        if f != target:
            print(f"FAIL {path}: circuit function differs from the formula")
            return 1
        print(f"ok {path}: circuit over {f.n} variables matches the formula")
    return status


def cmd_compile(args) -> int:
    F = parse_dimacs(_read(args.cnf))
    k, wi, D, T = compile_widths(F, exact=args.exact_td)
    stem = _stem(args, args.cnf)
    written: list[str] = []
    _write(_out(stem, ".sdnnf"), write_sdnnf(D), written)
    _write(_out(stem, ".primal.td"), write_td(T, "primal"), written)
    print(f"tw_p witness width {k}, circuit width {wi}, bound 2^(k+1) = {2 ** (k + 1)}")
    for w in written:
        print(f"wrote {w}", file=sys.stderr)
    return 0


def cmd_reencode(args) -> int:
    src = args.input
    text = _read(src)
    stem = _stem(args, f"{_strip(src)}.{args.target}")
    written: list[str] = []
    if args.target in ("tw", "scw"):
        if src.endswith(".sdnnf"):
            D = read_sdnnf(text)
            res = dnnf_to_scw(D) if args.target == "scw" else dnnf_to_cnf(D)
        else:
            F = parse_dimacs(text)
            res = pipeline_reverse(F)
            if args.target == "scw":
                res = dnnf_to_scw(res.extras["forgotten"])
        _write(_out(stem, ".cnf"), write_dimacs(res.formula), written)
        _write(_out(stem, ".primal.td"), write_td(res.td_witness, "primal"), written)
        if res.scw_witness is not None:
            _write(_out(stem, ".cwx"), write_cwx(res.scw_witness), written)
        G = res.formula
        print(f"{G.num_vars} variables, {len(G.clauses)} clauses, primal witness width "
              f"{res.td_witness.width}, dependent={res.dependent}")
    else:
        F = parse_dimacs(text)
        T = read_td(_read(args.td)) if args.td else measure(primal_graph(F)).witness
        res = cliquegood(F, T, args.k)
        G = res.formula
        _write(_out(stem, ".cnf"), write_dimacs(G), written)
        _write(_out(stem, ".modular.td"), write_td(res.extras["mtw_witness"], "modular"),
               written)
        _write(_out(stem, ".cwx"), write_cwx(res.extras["cw_witness"]), written)
        print(f"{G.num_vars} variables, {len(G.clauses)} clauses, k={res.extras['k']}, "
              f"modular witness width {res.extras['mtw']}, labels {res.extras['cw_labels']}")
    for w in written:
        print(f"wrote {w}", file=sys.stderr)
    return 0


GADGETS = {
    "amo-naive": (1, lambda n: gadgets.amo_naive(n)),
    "amo-ladder": (1, lambda n: gadgets.amo_ladder(n)),
    "card": (2, lambda n, k: gadgets.cardinality_binary(n, k)),
    "perm": (1, lambda n: gadgets.perm_encoding(n)),
}

FUNCTIONS = {
    "amo": (1, gadgets.amo_function),
    "card": (2, gadgets.cardinality_function),
    "eq": (1, gadgets.eq_function),
    "perm": (1, gadgets.perm_function),
    "triangle-free": (1, gadgets.triangle_free_function),
    "dnf": (0, gadgets.dnf_example_function),
}


def cmd_gadget(args) -> int:
    written: list[str] = []
    stem = _stem(args, "-".join([args.name] + [str(p) for p in args.params]))
    if args.name in ("example", "grid"):
        F = gadgets.example_formula() if args.name == "example" else gadgets.grid_formula(*args.params)
        _write(_out(stem, ".cnf"), write_dimacs(F), written)
    elif args.name in GADGETS:
        arity, make = GADGETS[args.name]
        if len(args.params) != arity:
            raise UsageError(f"gadget {args.name} takes {arity} integer parameter(s)")
        g = make(*args.params)
        _write(_out(stem, ".cnf"), write_dimacs(g.formula), written)
        _write(_out(stem, ".td"), write_td(g.td, "primal"), written)
        if g.spec is not None:
            _write(_out(stem, ".spec"), g.spec.to_text(), written)
    elif args.name in FUNCTIONS:
        arity, make = FUNCTIONS[args.name]
        if len(args.params) != arity:
            raise UsageError(f"function {args.name} takes {arity} integer parameter(s)")
        _write(_out(stem, ".spec"), make(*args.params).to_text(), written)
    else:
        raise UsageError(f"unknown gadget {args.name!r}")
    for w in written:
        print(f"wrote {w}")
    return 0


def _load_spec(ref: str) -> FunctionSpec:
    """A spec file path, or name:param:... for a built-in function."""
    if Path(ref).exists():
        return FunctionSpec.from_text(_read(ref))
    name, *params = ref.split(":")
    if name not in FUNCTIONS:
        raise UsageError(f"{ref!r} is neither a file nor one of {', '.join(FUNCTIONS)}")
    arity, make = FUNCTIONS[name]
    if len(params) != arity:
        raise UsageError(f"function {name} takes {arity} parameter(s)")
    return make(*[int(p) for p in params])


def _parse_partition(text: str, spec: FunctionSpec) -> Partition:
    left, sep, right = text.partition("|")
    Y = [int(v) for v in left.replace(",", " ").split()]
    if sep and right.strip():
        return Partition.of(Y, [int(v) for v in right.replace(",", " ").split()])
    return Partition.split(spec.vars, Y)


def cmd_cc(args) -> int:
    spec = _load_spec(args.function)
    rows = []
    if args.partition:
        p = _parse_partition(args.partition, spec)
        r = min_rectangle_cover(spec, p)
        rows.append(("partition", " ".join(map(str, p.Y)), r.s_min, r.cc))
    if args.best or not (args.partition or args.audit):
        r = cc_best_third(spec)
        rows.append(("best", " ".join(map(str, r.partition.Y)), r.s_min, r.cc))
    for kind, Y, s, c in rows:
        print(f"{kind}\tY={Y}\ts_min={s}\tcc={c:.4f}")
    status = 0
    if args.audit:
        D = read_sdnnf(_read(args.audit))
        a = cut_cc_audit(D, spec)
        for row in a.rows:
            print(f"cut\tnode={row.node}\tY={' '.join(map(str, row.Y))}\tgates={row.ell}\t"
                  f"s_min={row.s_min}\t{'ok' if row.ok else 'VIOLATION'}")
        status = 0 if a.ok else 1
    return status


def cmd_sweep(args) -> int:
    report, ok = run_suite(args.suite, args.seed)
    if args.output:
        Path(args.output).write_text(report)
    sys.stdout.write(report)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="widthforge", description="Width measures of CNF encodings.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="primal, dual, incidence and modular treewidth of a CNF")
    a.add_argument("cnf")
    a.add_argument("-o", "--output", help="stem for witness files (default: next to the input)")
    a.add_argument("--budget", type=int, default=2_000_000, help="exact-search step budget per measure")
    a.add_argument("--format", choices=("text", "tsv"), default="text")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="check witnesses against a CNF")
    v.add_argument("cnf")
    v.add_argument("--td", action="append", help=".td decomposition (graph kind from its header)")
    v.add_argument("--cwx", action="append", help=".cwx k-expression")
    v.add_argument("--spec", action="append", help="function spec the CNF must encode")
    v.add_argument("--sdnnf", action="append", help="structured circuit equivalent to the CNF")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compile", help="compile a CNF into deterministic structured DNNF")
    c.add_argument("cnf")
    c.add_argument("-o", "--output")
    c.add_argument("--exact-td", action="store_true", help="use an exact primal decomposition")
    c.set_defaults(func=cmd_compile)

    r = sub.add_parser("reencode", help="re-encode a circuit or CNF")
    r.add_argument("input", help=".sdnnf circuit or .cnf formula")
    r.add_argument("--target", choices=("tw", "scw", "cw"), required=True)
    r.add_argument("--td", help="primal decomposition for --target cw")
    r.add_argument("--k", type=int, help="group count parameter for --target cw")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reencode)

    g = sub.add_parser("gadget", help="write a gadget encoding or a function spec")
    g.add_argument("name", help="amo-naive, amo-ladder, card, perm, example, grid, or a function: "
                                + ", ".join(FUNCTIONS))
    g.add_argument("params", nargs="*", type=int)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gadget)

    k = sub.add_parser("cc", help="rectangle covers and communication complexity")
    k.add_argument("function", help="spec file or name:params, e.g. eq:3 or card:9:3")
    k.add_argument("--partition", help="Y side as '1,2,3' or 'Y|Z'")
    k.add_argument("--best", action="store_true", help="minimum over 1/3-balanced partitions")
    k.add_argument("--audit", help=".sdnnf circuit whose v-tree cuts are audited")
    k.set_defaults(func=cmd_cc)

    s = sub.add_parser("sweep", help="run an experiment suite")
    s.add_argument("suite", choices=tuple(SUITES))
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
