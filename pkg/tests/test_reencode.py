import pytest
from hypothesis import assume, given, settings

from conftest import figure_dnnf, formulas
from oracles import brute_projection, onset_tuples
from widthforge.cliquewidth import validate_expression
from widthforge.cnf import CnfFormula, count_models, has_dependent_aux, is_clausal_encoding, project_models
from widthforge.compiler import compile_widths
from widthforge.dnnf import DefinabilityError, DnnfConstant, StructuredDnnf, dnnf_function, is_deterministic
from widthforge.gadgets import amo_function, amo_ladder, grid_formula
from widthforge.graphs import incidence_graph, module_contraction, primal_graph, signed_incidence_graph
from widthforge.reencode import (CLIQUEGOOD_CW_FACTOR, CLIQUEGOOD_MTW_FACTOR, DNNF_TW_SLACK,
                                 PreconditionError, clog2, cliquegood, dnnf_size_bounds, dnnf_to_cnf,
                                 dnnf_to_scw, pipeline_reverse)
from widthforge.treewidth import TreeDecomposition, is_special, measure, validate_td


def _within_bounds(res):
    F = res.formula
    n, k = res.extras["n"], max(res.extras["k"], 1)
    nv, nc, tw = dnnf_size_bounds(n, k)
    return F.num_vars <= nv and len(F.clauses) <= nc and res.td_witness.width <= tw


def test_figure_circuit_round_trip(fig_dnnf):
    res = dnnf_to_cnf(fig_dnnf)
    F = res.formula
    assert is_clausal_encoding(F, dnnf_function(fig_dnnf))
    got = brute_projection([c.literals for c in F.clauses], sorted(F.input_vars), sorted(F.aux_vars))
    assert got == onset_tuples(dnnf_function(fig_dnnf))
    assert res.dependent and has_dependent_aux(F)
    assert _within_bounds(res)
    validate_td(primal_graph(F), res.td_witness)
    assert is_special(res.special_witness)


def test_nondeterministic_source_is_flagged():
    D = figure_dnnf()
    args = list(D.args)
    args[7] = args[6]
    bad = StructuredDnnf(D.vtree, D.kind, tuple(args), D.mu, D.output)
    res = dnnf_to_cnf(bad)
    assert is_clausal_encoding(res.formula, dnnf_function(bad))
    assert not res.dependent


def test_ladder_compiles_and_reencodes():
    g = amo_ladder(4)
    res = pipeline_reverse(g.formula, g.td)
    assert is_clausal_encoding(res.formula, amo_function(4))
    assert res.dependent and has_dependent_aux(res.formula)
    assert all(is_deterministic(D) for D in res.extras["chain"])


@settings(max_examples=30)
@given(formulas(max_vars=7, max_clauses=9))
def test_dnnf_to_cnf_laws_on_compiled_circuits(F):
    _, _, D, _ = compile_widths(F)
    res = dnnf_to_cnf(D)
    assert is_clausal_encoding(res.formula, dnnf_function(D))
    assert res.dependent
    assert _within_bounds(res)
    if isinstance(D, StructuredDnnf):
        validate_td(primal_graph(res.formula), res.td_witness)
        assert count_models(res.formula) == dnnf_function(D).count


@settings(max_examples=20)
@given(formulas(max_vars=6, max_clauses=7))
def test_scw_witness_validates(F):
    _, _, D, _ = compile_widths(F)
    assume(isinstance(D, StructuredDnnf))
    res = dnnf_to_scw(D)
    assert validate_expression(res.scw_witness, signed_incidence_graph(res.formula)) == res.extras["scw_labels"]
    assert res.extras["scw_labels"] <= res.special_witness.width + 3


def test_constant_sources():
    res = dnnf_to_cnf(DnnfConstant(False, (1, 2)))
    assert project_models(res.formula).count == 0
    res = dnnf_to_cnf(DnnfConstant(True, (3,)))
    assert project_models(res.formula).count == 2


def test_size_bounds_formula():
    assert clog2(1) == 0 and clog2(2) == 1 and clog2(5) == 3
    assert dnnf_size_bounds(4, 2) == (16, 3 * 4 * 8 + 16, 9 + DNNF_TW_SLACK)


def test_cliquegood_on_the_grid():
    F = grid_formula(3, 3)
    T = measure(primal_graph(F)).witness
    res = cliquegood(F, T)
    F2 = res.formula
    assert is_clausal_encoding(F2, project_models(F))
    assert res.dependent
    k = res.extras["k"]
    contracted, _ = module_contraction(incidence_graph(F2))
    assert validate_td(contracted, res.extras["mtw_witness"]) <= CLIQUEGOOD_MTW_FACTOR * k
    assert validate_expression(res.extras["cw_witness"], incidence_graph(F2)) <= CLIQUEGOOD_CW_FACTOR * k


def test_cliquegood_tree_coloring_uses_four_colors():
    F = grid_formula(2, 3)
    res = cliquegood(F, measure(primal_graph(F)).witness)
    eta = res.extras["eta"]
    assert set(eta.values()) <= {0, 1, 2, 3}


def test_cliquegood_preconditions():
    with pytest.raises(PreconditionError):
        cliquegood(CnfFormula.build([[1]]), TreeDecomposition.single([1]))
    F = CnfFormula.build([[1, 2, 3, 4]])
    with pytest.raises(PreconditionError, match="exceeds"):
        cliquegood(F, TreeDecomposition.single([1, 2, 3, 4]), k=1)


def test_pipeline_refuses_free_aux_on_dependent_path():
    # x is forced and y is left free
    F = CnfFormula.build([[1, 2], [1, -2]], input_vars=[1], aux_vars=[2])
    with pytest.raises(DefinabilityError) as info:
        pipeline_reverse(F, deterministic=True)
    assert info.value.var == 2
    res = pipeline_reverse(F, deterministic=False)
    assert is_clausal_encoding(res.formula, project_models(F))
