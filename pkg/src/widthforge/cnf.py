"""CNF formulas, explicit Boolean functions and the brute-force semantic oracle.

Literals are signed integers in DIMACS style.  A :class:`FunctionSpec` stores
its onset as a boolean numpy array of length ``2**len(vars)``; the variable
with the smallest id is the most significant bit of the row index, so
``onset.reshape((2,) * n)`` has one axis per variable in id order.
"""
from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_ORACLE_VARS = 24
MAX_FACTOR_VARS = 26


class CapExceeded(ValueError):
    """A brute-force operation was asked to enumerate beyond its hard cap."""


class DimacsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Clause:
    literals: frozenset[int]

    @classmethod
    def of(cls, lits: Iterable[int]) -> "Clause":
        lits = frozenset(int(l) for l in lits)
        if 0 in lits:
            raise ValueError("literal 0 is not a valid literal")
        return cls(lits)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(abs(l) for l in self.literals)

    @property
    def tautological(self) -> bool:
        return any(-l in self.literals for l in self.literals)

    def sorted_literals(self) -> list[int]:
        return sorted(self.literals, key=lambda l: (abs(l), l < 0))

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.sorted_literals())

    def __repr__(self) -> str:
        return "Clause(" + " ".join(map(str, self.sorted_literals())) + ")"


@dataclass(frozen=True)
class CnfFormula:
    clauses: tuple[Clause, ...]
    input_vars: frozenset[int]
    aux_vars: frozenset[int] = frozenset()
    names: Mapping[int, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.input_vars & self.aux_vars:
            both = sorted(self.input_vars & self.aux_vars)
            raise ValueError(f"variables both input and auxiliary: {both}")
        allv = self.input_vars | self.aux_vars
        for c in self.clauses:
            stray = c.variables - allv
            if stray:
                raise ValueError(f"clause {c} uses undeclared variables {sorted(stray)}")
        if any(v <= 0 for v in allv):
            raise ValueError("variable ids must be positive")

    @classmethod
    def build(cls, clauses: Iterable[Iterable[int]], input_vars: Iterable[int] | None = None,
              aux_vars: Iterable[int] = (), names: Mapping[int, str] | None = None) -> "CnfFormula":
        """Convenience constructor; inputs default to every non-aux variable in a clause."""
        cl = tuple(c if isinstance(c, Clause) else Clause.of(c) for c in clauses)
        aux = frozenset(aux_vars)
        if input_vars is None:
            used = frozenset().union(*(c.variables for c in cl)) if cl else frozenset()
            inputs = used - aux
        else:
            inputs = frozenset(input_vars)
        return cls(cl, inputs, aux, dict(names or {}))

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(sorted(self.input_vars | self.aux_vars))

    @property
    def num_vars(self) -> int:
        return len(self.input_vars) + len(self.aux_vars)

    def tautological_clauses(self) -> list[int]:
        return [i for i, c in enumerate(self.clauses) if c.tautological]

    def with_clauses(self, clauses: Iterable[Clause]) -> "CnfFormula":
        return CnfFormula(tuple(clauses), self.input_vars, self.aux_vars, self.names)

    def name(self, v: int) -> str:
        return self.names.get(v, f"x{v}")


@dataclass(frozen=True)
class FunctionSpec:
    vars: tuple[int, ...]
    onset: np.ndarray = field(compare=False, repr=False)

    def __post_init__(self):
        if list(self.vars) != sorted(set(self.vars)):
            raise ValueError("FunctionSpec vars must be distinct and sorted by id")
        if len(self.vars) > MAX_ORACLE_VARS:
            raise CapExceeded(f"{len(self.vars)} variables exceed the explicit-table cap {MAX_ORACLE_VARS}")
        onset = np.asarray(self.onset, dtype=bool).reshape(-1)
        if onset.size != 1 << len(self.vars):
            raise ValueError(f"onset has {onset.size} rows, expected {1 << len(self.vars)}")
        onset.setflags(write=False)
        object.__setattr__(self, "onset", onset)

    def __eq__(self, other):
        if not isinstance(other, FunctionSpec):
            return NotImplemented
        return self.vars == other.vars and np.array_equal(self.onset, other.onset)

    def __hash__(self):
        return hash((self.vars, self.onset.tobytes()))

    @property
    def n(self) -> int:
        return len(self.vars)

    @property
    def count(self) -> int:
        return int(self.onset.sum())

    def table(self) -> np.ndarray:
        return self.onset.reshape((2,) * self.n) if self.n else self.onset.reshape(())

    def row_of(self, assignment: Mapping[int, int]) -> int:
        row = 0
        for v in self.vars:
            row = (row << 1) | (1 if assignment[v] else 0)
        return row

    def assignment(self, row: int) -> dict[int, int]:
        n = self.n
        return {v: (row >> (n - 1 - i)) & 1 for i, v in enumerate(self.vars)}

    def __call__(self, assignment: Mapping[int, int]) -> bool:
        return bool(self.onset[self.row_of(assignment)])

    def rows(self) -> np.ndarray:
        return np.flatnonzero(self.onset)

    @classmethod
    def from_predicate(cls, vars: Sequence[int], pred) -> "FunctionSpec":
        """Tabulate ``pred(bits)`` where ``bits`` is a tuple in ``vars`` order."""
        vars = tuple(vars)
        n = len(vars)
        if n > MAX_ORACLE_VARS:
            raise CapExceeded(f"{n} variables exceed the cap {MAX_ORACLE_VARS}")
        onset = np.zeros(1 << n, dtype=bool)
        for r in range(1 << n):
            onset[r] = bool(pred(tuple((r >> (n - 1 - i)) & 1 for i in range(n))))
        return cls(vars, onset)

    @classmethod
    def from_table(cls, vars: Sequence[int], table: np.ndarray) -> "FunctionSpec":
        return cls(tuple(vars), np.asarray(table, dtype=bool).reshape(-1))

    def rename(self, mapping: Mapping[int, int]) -> "FunctionSpec":
        """Rename variables; the table is permuted to keep rows in id order."""
        new = [mapping.get(v, v) for v in self.vars]
        order = sorted(range(self.n), key=lambda i: new[i])
        table = np.transpose(self.table(), order) if self.n else self.table()
        return FunctionSpec(tuple(new[i] for i in order), table.reshape(-1))

    def project(self, keep: Iterable[int]) -> "FunctionSpec":
        """Existential projection onto ``keep``."""
        keep = set(keep)
        axes = tuple(i for i, v in enumerate(self.vars) if v not in keep)
        t = self.table().any(axis=axes) if axes else self.table()
        return FunctionSpec(tuple(v for v in self.vars if v in keep), np.asarray(t).reshape(-1))

    def to_text(self) -> str:
        n = self.n
        value = 0
        for r in np.flatnonzero(self.onset)[::-1]:
            value |= 1 << int(r)
        digits = max(1, ((1 << n) + 3) // 4)
        return f"vars: {' '.join(f'x{v}' for v in self.vars)}\nonset: {value:0{digits}x}\n"

    @classmethod
    def from_text(cls, text: str) -> "FunctionSpec":
        vars_line = onset_line = None
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("vars:"):
                vars_line = line[5:].split()
            elif line.startswith("onset:"):
                onset_line = line[6:].strip()
        if vars_line is None or onset_line is None:
            raise ValueError("spec text needs a 'vars:' and an 'onset:' line")
        vars = tuple(int(tok.lstrip("x")) for tok in vars_line)
        n = len(vars)
        value = int(onset_line, 16)
        if value >> (1 << n):
            raise ValueError("onset bitset longer than 2^n rows")
        onset = np.array([(value >> r) & 1 for r in range(1 << n)], dtype=bool)
        return cls(vars, onset)


# ---------------------------------------------------------------------------
# DIMACS


def parse_dimacs(text: str | bytes) -> CnfFormula:
    """Parse DIMACS CNF.  ``c aux`` comment lines declare auxiliary variables,
    ``c inputs`` lines (optional) pin the input set explicitly."""
    if isinstance(text, bytes):
        text = text.decode()
    header = None
    clauses: list[Clause] = []
    aux: set[int] = set()
    inputs: set[int] | None = None
    names: dict[int, str] = {}
    pending: list[int] = []
    pending_line = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            toks = line.split()
            if len(toks) >= 2 and toks[0] == "c" and toks[1] == "aux":
                aux.update(_ints(toks[2:], lineno))
            elif len(toks) >= 2 and toks[0] == "c" and toks[1] == "inputs":
                inputs = (inputs or set()) | set(_ints(toks[2:], lineno))
            elif len(toks) == 4 and toks[0] == "c" and toks[1] == "var":
                names[_ints(toks[2:3], lineno)[0]] = toks[3]
            continue
        if line.startswith("p"):
            toks = line.split()
            if header is not None:
                raise DimacsError("duplicate header", lineno)
            if len(toks) != 4 or toks[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                header = (int(toks[2]), int(toks[3]))
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError("negative counts in header", lineno)
            continue
        if header is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for lit in _ints(line.split(), lineno):
            if lit == 0:
                clauses.append(Clause(frozenset(pending)))
                pending = []
                continue
            if abs(lit) > header[0]:
                raise DimacsError(f"variable {abs(lit)} exceeds declared count {header[0]}", lineno)
            if not pending:
                pending_line = lineno
            pending.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        raise DimacsError("clause not terminated by 0", pending_line)
    nvars, nclauses = header
    if len(clauses) != nclauses:
        raise DimacsError(f"header declares {nclauses} clauses, found {len(clauses)}")
    allv = set(range(1, nvars + 1))
    bad = (aux | (inputs or set())) - allv
    if bad:
        raise DimacsError(f"declared variables {sorted(bad)} exceed count {nvars}")
    if inputs is None:
        inputs = allv - aux
    else:
        inputs = inputs - aux
    used = set().union(*(c.variables for c in clauses)) if clauses else set()
    stray = used - inputs - aux
    if stray:
        raise DimacsError(f"variables {sorted(stray)} neither input nor auxiliary")
    return CnfFormula(tuple(clauses), frozenset(inputs), frozenset(aux), names)


def _ints(toks, lineno):
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise DimacsError(f"non-integer token in {' '.join(toks)!r}", lineno) from None


def write_dimacs(F: CnfFormula, comments: Sequence[str] = ()) -> str:
    out = io.StringIO()
    for c in comments:
        out.write(f"c {c}\n")
    nvars = max(F.variables, default=0)
    implied_inputs = set(range(1, nvars + 1)) - F.aux_vars
    if F.aux_vars:
        out.write("c aux " + " ".join(map(str, sorted(F.aux_vars))) + "\n")
    if implied_inputs != set(F.input_vars):
        out.write("c inputs " + " ".join(map(str, sorted(F.input_vars))) + "\n")
    for v in sorted(F.names):
        out.write(f"c var {v} {F.names[v]}\n")
    out.write(f"p cnf {nvars} {len(F.clauses)}\n")
    for c in F.clauses:
        out.write(" ".join(map(str, c.sorted_literals() + [0])) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# semantics


def eval_formula(F: CnfFormula, a: Mapping[int, int]) -> int:
    missing = [v for v in F.variables if v not in a]
    if missing:
        raise ValueError(f"assignment is not total; missing {missing[:5]}")
    for c in F.clauses:
        if not any((a[abs(l)] == 1) == (l > 0) for l in c.literals):
            return 0
    return 1


def _threads() -> int:
    try:
        n = int(os.environ.get("WIDTHFORGE_THREADS", "0"))
    except ValueError:
        n = 0
    cpus = os.cpu_count() or 1
    return max(1, min(n, cpus) if n > 0 else cpus)


def _clause_table(clause: Clause, pos: Mapping[int, int], n: int, lead: int):
    """Broadcastable boolean array for one clause over the trailing n-lead axes."""
    acc = None
    for lit in clause.literals:
        i = pos[abs(lit)]
        if i < lead:
            continue
        shape = [1] * (n - lead)
        shape[i - lead] = 2
        col = np.array([lit < 0, lit > 0]).reshape(shape)
        acc = col if acc is None else (acc | col)
    return acc


def _models_table(F: CnfFormula) -> np.ndarray:
    vars = F.variables
    n = len(vars)
    if n > MAX_ORACLE_VARS:
        raise CapExceeded(f"{n} variables exceed the brute-force cap {MAX_ORACLE_VARS}")
    pos = {v: i for i, v in enumerate(vars)}
    if any(len(c.literals) == 0 for c in F.clauses):
        return np.zeros((2,) * n, dtype=bool)
    clauses = [c for c in F.clauses if not c.tautological]

    # fix the leading variables per chunk so chunks can run concurrently
    lead = min(n, 4) if n >= 20 else 0
    workers = _threads() if lead else 1

    def chunk(prefix: int) -> np.ndarray:
        bits = {vars[i]: (prefix >> (lead - 1 - i)) & 1 for i in range(lead)}
        out = np.ones((2,) * (n - lead), dtype=bool)
        for c in clauses:
            if any(abs(l) in bits and (bits[abs(l)] == 1) == (l > 0) for l in c.literals):
                continue
            t = _clause_table(c, pos, n, lead)
            if t is None:
                out[...] = False
                break
            out &= t
        return out

    if lead == 0:
        return chunk(0)
    prefixes = range(1 << lead)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(chunk, prefixes))
    else:
        parts = [chunk(p) for p in prefixes]
    return np.stack(parts).reshape((2,) * n)


def models(F: CnfFormula) -> FunctionSpec:
    """All total models of F over ``F.variables`` as a bitset."""
    vars = F.variables
    return FunctionSpec(vars, _models_table(F).reshape(-1))


def count_models(F: CnfFormula) -> int:
    if F.num_vars <= MAX_ORACLE_VARS:
        return models(F).count
    from widthforge._elim import eliminate
    return int(eliminate(F, (), mode="count").sum())


def project_models(F: CnfFormula) -> FunctionSpec:
    """Onset over the input variables: inputs that have a satisfying extension.

    Brute force up to the 24-variable cap; larger formulas whose input set is
    within the cap are projected by eliminating auxiliary variables one at a
    time from clause tables."""
    inputs = tuple(sorted(F.input_vars))
    if len(inputs) > MAX_ORACLE_VARS:
        raise CapExceeded(f"{len(inputs)} input variables exceed the cap {MAX_ORACLE_VARS}")
    if F.num_vars <= MAX_ORACLE_VARS:
        return models(F).project(inputs)
    from widthforge._elim import eliminate
    return FunctionSpec(inputs, eliminate(F, inputs, mode="exists").reshape(-1))


def extension_counts(F: CnfFormula, cap: int | None = None) -> tuple[tuple[int, ...], np.ndarray]:
    """Number of satisfying aux extensions for every input row, saturating at cap if given."""
    inputs = tuple(sorted(F.input_vars))
    if len(inputs) > MAX_ORACLE_VARS:
        raise CapExceeded(f"{len(inputs)} input variables exceed the cap {MAX_ORACLE_VARS}")
    if F.num_vars <= MAX_ORACLE_VARS:
        vars = F.variables
        t = _models_table(F)
        axes = tuple(i for i, v in enumerate(vars) if v in F.aux_vars)
        counts = t.sum(axis=axes, dtype=np.int64) if axes else t.astype(np.int64)
        counts = np.asarray(counts).reshape(-1)
        return inputs, counts if cap is None else np.minimum(counts, cap)
    from widthforge._elim import eliminate
    return inputs, eliminate(F, inputs, mode="count", cap=cap).reshape(-1)


@dataclass(frozen=True)
class EncodingCheck:
    ok: bool
    counterexample: dict[int, int] | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_clausal_encoding(F: CnfFormula, spec: FunctionSpec) -> EncodingCheck:
    if set(F.input_vars) != set(spec.vars):
        raise ValueError(f"input variables {sorted(F.input_vars)} differ from spec vars {list(spec.vars)}")
    proj = project_models(F)
    diff = np.flatnonzero(proj.onset != spec.onset)
    if diff.size == 0:
        return EncodingCheck(True)
    row = int(diff[0])
    a = spec.assignment(row)
    if spec.onset[row]:
        return EncodingCheck(False, a, "onset input has no satisfying extension")
    return EncodingCheck(False, a, "offset input has a satisfying extension")


@dataclass(frozen=True)
class DependenceCheck:
    ok: bool
    witness: tuple[dict[int, int], dict[int, int]] | None = None

    def __bool__(self):
        return self.ok


def has_dependent_aux(F: CnfFormula) -> DependenceCheck:
    """Every satisfiable input row has exactly one satisfying aux extension."""
    if not F.aux_vars:
        return DependenceCheck(True)
    inputs, counts = extension_counts(F, cap=2)
    bad = np.flatnonzero(counts > 1)
    if bad.size == 0:
        return DependenceCheck(True)
    row = int(bad[0])
    n = len(inputs)
    fixed = {v: (row >> (n - 1 - i)) & 1 for i, v in enumerate(inputs)}
    pair = _two_extensions(F, fixed)
    return DependenceCheck(False, pair)


def _two_extensions(F: CnfFormula, fixed: dict[int, int]):
    aux = sorted(F.aux_vars)
    sub = condition(F, fixed)
    if len(aux) <= MAX_ORACLE_VARS:
        m = models(sub)
        rows = m.rows()[:2]
        return tuple({**fixed, **m.assignment(int(r))} for r in rows)
    # self-reduction: steer two models apart using extension counts
    from widthforge._elim import eliminate
    first: dict[int, int] | None = None
    split = None
    cur = dict(fixed)
    for v in aux:
        for val in (0, 1):
            trial = condition(F, {**cur, v: val})
            if eliminate(trial, (), mode="exists").any():
                cur[v] = val
                break
    first = cur
    for v in aux:
        trial = condition(F, {**fixed, **{u: first[u] for u in aux if u < v}, v: 1 - first[v]})
        if eliminate(trial, (), mode="exists").any():
            split = v
            break
    if split is None:
        return None
    cur = {**fixed, **{u: first[u] for u in aux if u < split}, split: 1 - first[split]}
    for v in aux:
        if v in cur:
            continue
        for val in (0, 1):
            trial = condition(F, {**cur, v: val})
            if eliminate(trial, (), mode="exists").any():
                cur[v] = val
                break
    return first, cur


def condition(F: CnfFormula, fixed: Mapping[int, int]) -> CnfFormula:
    """Substitute constants; fixed variables disappear from the result."""
    out = []
    for c in F.clauses:
        if any(abs(l) in fixed and (fixed[abs(l)] == 1) == (l > 0) for l in c.literals):
            continue
        out.append(Clause(frozenset(l for l in c.literals if abs(l) not in fixed)))
    return CnfFormula(tuple(out), F.input_vars - set(fixed), F.aux_vars - set(fixed), F.names)


def spec_of_formula(F: CnfFormula) -> FunctionSpec:
    """Alias kept for readability in pipelines: the function a formula encodes."""
    return project_models(F)
