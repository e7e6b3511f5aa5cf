import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import clause_lists, formulas_with_aux
from oracles import brute_extension_counts, brute_models, brute_projection, onset_tuples
from widthforge._elim import eliminate
from widthforge.cnf import (MAX_ORACLE_VARS, CapExceeded, Clause, CnfFormula, DimacsError, FunctionSpec,
                            condition, count_models, eval_formula, extension_counts, has_dependent_aux,
                            is_clausal_encoding, models, parse_dimacs, project_models, write_dimacs)
from widthforge.gadgets import amo_function, amo_ladder, example_formula


def test_clause_rejects_zero_and_spots_tautology():
    with pytest.raises(ValueError):
        Clause.of([1, 0])
    assert Clause.of([3, -3, 1]).tautological
    assert Clause.of([2, -1]).sorted_literals() == [-1, 2]


def test_formula_rejects_overlapping_roles():
    with pytest.raises(ValueError):
        CnfFormula.build([[1, 2]], input_vars=[1, 2], aux_vars=[2])
    with pytest.raises(ValueError):
        CnfFormula.build([[1, 3]], input_vars=[1], aux_vars=[2])


def test_example_formula_model_count():
    # [DERIVED] x5 is forced; (x1 or not x2) and (x2 or x3 or not x4) leave 16 - 4 - 2 = 10
    F = example_formula()
    assert count_models(F) == 10
    assert onset_tuples(models(F)) == brute_models([c.literals for c in F.clauses], F.variables)


def test_eval_formula_needs_total_assignment():
    F = example_formula()
    with pytest.raises(ValueError, match="not total"):
        eval_formula(F, {1: 1})
    assert eval_formula(F, {1: 1, 2: 1, 3: 0, 4: 0, 5: 1}) == 1
    assert eval_formula(F, {1: 0, 2: 1, 3: 0, 4: 0, 5: 1}) == 0


@given(clause_lists(max_vars=7, max_clauses=9))
def test_models_match_brute_force(data):
    n, clauses = data
    F = CnfFormula.build(clauses)
    assert onset_tuples(models(F)) == brute_models(clauses, F.variables)


@given(formulas_with_aux())
def test_projection_matches_brute_force(F):
    inputs, aux = sorted(F.input_vars), sorted(F.aux_vars)
    got = onset_tuples(project_models(F))
    assert got == brute_projection([c.literals for c in F.clauses], inputs, aux)


@given(formulas_with_aux())
def test_elimination_agrees_with_enumeration(F):
    inputs = tuple(sorted(F.input_vars))
    ex = eliminate(F, inputs, mode="exists").reshape(-1)
    assert np.array_equal(ex, models(F).project(inputs).onset)
    _, counts = extension_counts(F)
    want = brute_extension_counts([c.literals for c in F.clauses], inputs, sorted(F.aux_vars))
    spec = FunctionSpec(inputs, np.ones(1 << len(inputs), dtype=bool))
    for row in range(1 << len(inputs)):
        key = tuple(spec.assignment(row)[v] for v in inputs)
        assert counts[row] == want.get(key, 0)
    assert np.array_equal(eliminate(F, inputs, mode="count").reshape(-1), counts)


@given(formulas_with_aux())
def test_saturating_counts_are_min_with_cap(F):
    _, exact = extension_counts(F)
    _, capped = extension_counts(F, cap=2)
    assert np.array_equal(capped, np.minimum(exact, 2))


def test_elimination_route_above_cap():
    g = amo_ladder(30)
    assert g.formula.num_vars > MAX_ORACLE_VARS
    sub = CnfFormula.build([c.literals for c in g.formula.clauses], input_vars=range(1, 31),
                           aux_vars=g.formula.aux_vars)
    with pytest.raises(CapExceeded):
        project_models(sub)
    small = amo_ladder(20).formula
    assert small.num_vars > MAX_ORACLE_VARS
    proj = project_models(small)
    assert proj.count == 21
    assert has_dependent_aux(small)


def test_clausal_encoding_reports_counterexample():
    g = amo_ladder(4)
    assert is_clausal_encoding(g.formula, g.spec)
    # without (not x2 or not y1) both x1 and x2 can be true
    cut = Clause.of([-2, -6])
    assert cut in g.formula.clauses
    broken = g.formula.with_clauses(c for c in g.formula.clauses if c != cut)
    chk = is_clausal_encoding(broken, g.spec)
    assert not chk
    assert chk.counterexample is not None
    assert g.spec(chk.counterexample) is False
    with pytest.raises(ValueError, match="differ"):
        is_clausal_encoding(g.formula, amo_function(3))


def test_dependent_aux_witness_pair():
    # z is free whenever x is true
    F = CnfFormula.build([[1, 2], [-2, 1]], input_vars=[1], aux_vars=[2])
    chk = has_dependent_aux(F)
    assert not chk
    a, b = chk.witness
    assert a[1] == b[1] and a[2] != b[2]
    assert eval_formula(F, a) and eval_formula(F, b)
    assert has_dependent_aux(amo_ladder(5).formula)


def test_condition_drops_satisfied_clauses():
    F = example_formula()
    G = condition(F, {4: 1, 5: 1})
    assert 4 not in G.variables and 5 not in G.variables
    assert all(not (c.variables & {4, 5}) for c in G.clauses)


@given(clause_lists(max_vars=6), st.data())
def test_dimacs_round_trip(data, draw):
    n, clauses = data
    F = CnfFormula.build(clauses)
    vs = list(F.variables)
    k = draw.draw(st.integers(0, len(vs)))
    F = CnfFormula.build(clauses, input_vars=vs[k:], aux_vars=vs[:k], names={vs[0]: "first"})
    G = parse_dimacs(write_dimacs(F))
    assert G.clauses == F.clauses
    assert G.input_vars == F.input_vars and G.aux_vars == F.aux_vars
    assert G.names == F.names


@pytest.mark.parametrize("text, where", [
    ("", None),
    ("p cnf 2 1\n1 2\n", 2),
    ("1 2 0\np cnf 2 1\n", 1),
    ("p cnf 2 1\n1 3 0\n", 2),
    ("p cnf 2 2\n1 2 0\n", None),
    ("p cnf 2 1\n1 x 0\n", 2),
    ("p cnf 2 1\np cnf 2 1\n1 0\n", 2),
])
def test_dimacs_errors_carry_line_numbers(text, where):
    with pytest.raises(DimacsError) as info:
        parse_dimacs(text)
    assert info.value.line == where


def test_dimacs_declared_vars_without_clauses_are_inputs():
    F = parse_dimacs("c aux 3\np cnf 3 1\n1 -3 0\n")
    assert F.input_vars == {1, 2} and F.aux_vars == {3}


def test_function_spec_text_round_trip_and_orientation():
    f = FunctionSpec.from_predicate((2, 5, 7), lambda b: b == (1, 0, 1))
    assert list(f.rows()) == [0b101]
    assert f.assignment(5) == {2: 1, 5: 0, 7: 1}
    assert FunctionSpec.from_text(f.to_text()) == f
    with pytest.raises(ValueError):
        FunctionSpec((2, 1), np.zeros(4, dtype=bool))


@given(st.integers(1, 5), st.data())
def test_function_spec_rename_and_project(n, data):
    bits = data.draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n))
    f = FunctionSpec(tuple(range(1, n + 1)), np.array(bits))
    perm = data.draw(st.permutations(list(range(10, 10 + n))))
    mapping = dict(zip(range(1, n + 1), perm))
    g = f.rename(mapping)
    for row in range(1 << n):
        a = f.assignment(row)
        assert f(a) == g({mapping[v]: x for v, x in a.items()})
    keep = set(range(1, n + 1, 2))
    p = f.project(keep)
    for row in range(1 << p.n):
        a = p.assignment(row)
        want = any(f({**a, **{v: (r >> i) & 1 for i, v in enumerate(sorted(set(f.vars) - keep))}})
                   for r in range(1 << (n - len(keep))))
        assert p(a) == want
