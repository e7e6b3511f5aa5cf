import pytest
from hypothesis import given

from conftest import formulas
from oracles import brute_models, circuit_deterministic, circuit_onset
from widthforge.cnf import CnfFormula, models
from widthforge.compiler import compile_cnf, compile_widths, td_to_vtree
from widthforge.dnnf import DnnfConstant, StructuredDnnf, dnnf_function, is_deterministic, validate_dnnf
from widthforge.gadgets import amo_ladder, example_formula, grid_formula
from widthforge.graphs import primal_graph
from widthforge.treewidth import TDError, TreeDecomposition, exact_treewidth, make_special, minfill_td


@given(formulas(max_vars=7, max_clauses=9))
def test_compiled_circuit_is_equivalent_and_deterministic(F):
    k, wi, D, T = compile_widths(F, exact=True)
    vs = list(F.variables)
    want = brute_models([c.literals for c in F.clauses], vs)
    if isinstance(D, DnnfConstant):
        assert len(want) == (2 ** len(vs) if D.value else 0)
        return
    validate_dnnf(D)
    assert D.deterministic
    assert circuit_onset(D, vs) == want
    assert circuit_deterministic(D, vs)
    assert wi <= 2 ** (k + 1)


@given(formulas(max_vars=7, max_clauses=9))
def test_any_valid_decomposition_compiles(F):
    for T in (minfill_td(primal_graph(F)), make_special(minfill_td(primal_graph(F)))):
        D = compile_cnf(F, T)
        assert dnnf_function(D) == models(F)
        if isinstance(D, StructuredDnnf):
            assert D.width <= 2 ** (T.width + 1)


def test_vtree_follows_the_decomposition():
    F = amo_ladder(4).formula
    T = amo_ladder(4).td
    vt = td_to_vtree(F, T)
    assert sorted(vt.variables) == list(F.variables)


def test_worked_example_compiles_to_ten_models():
    F = example_formula()
    _, wi, D, T = compile_widths(F, exact=True)
    assert dnnf_function(D).count == 10
    assert is_deterministic(D)
    assert wi <= 2 ** (T.width + 1)


def test_grid_with_heuristic_decomposition():
    F = grid_formula(3, 4)
    k, wi, D, T = compile_widths(F)
    assert dnnf_function(D) == models(F)
    assert wi <= 2 ** (k + 1)


def test_invalid_decomposition_is_refused():
    F = CnfFormula.build([[1, 2], [2, 3]])
    T = TreeDecomposition.path([{1, 2}, {3}], special=False)
    with pytest.raises(TDError):
        compile_cnf(F, T)


def test_unsatisfiable_and_empty_formulas():
    F = CnfFormula.build([[1], [-1]])
    _, T = exact_treewidth(primal_graph(F))
    D = compile_cnf(F, T)
    assert isinstance(D, DnnfConstant) and not D.value and D.vars == (1,)
    G = CnfFormula.build([[1, -1]])
    D = compile_cnf(G, TreeDecomposition.single([1]))
    assert isinstance(D, DnnfConstant) and D.value
