import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import formulas
from oracles import brute_min_cover
from widthforge.cnf import CapExceeded, FunctionSpec
from widthforge.comm import (MAX_COVER_VARS, Partition, balanced_partitions, cardinality_fooling_family,
                             cc, cc_best_third, check_cover, comm_matrix, cover_matrix, cut_cc_audit,
                             fooling_set_bound, interface_gates, min_rectangle_cover, width_lower_bound)
from widthforge.compiler import compile_widths
from widthforge.dnnf import StructuredDnnf
from widthforge.gadgets import amo_function, cardinality_function, dnf_example_function, eq_function


@st.composite
def matrices(draw, max_side=4):
    r = draw(st.integers(1, max_side))
    c = draw(st.integers(1, max_side))
    cells = draw(st.lists(st.booleans(), min_size=r * c, max_size=r * c))
    return np.array(cells, dtype=bool).reshape(r, c)


@st.composite
def functions(draw, max_vars=5):
    n = draw(st.integers(2, max_vars))
    bits = draw(st.lists(st.booleans(), min_size=1 << n, max_size=1 << n))
    return FunctionSpec(tuple(range(1, n + 1)), np.array(bits))


@given(matrices())
def test_cover_matches_brute_force(M):
    res = cover_matrix(M)
    assert res.s_min == brute_min_cover(M.tolist())
    cov = np.zeros_like(M)
    for rs, cs in res.rectangles:
        sub = np.ix_(sorted(rs), sorted(cs))
        assert M[sub].all()
        cov[sub] = True
    assert (cov == M).all()


@given(matrices())
def test_limit_reports_none_when_exceeded(M):
    s = cover_matrix(M).s_min
    assume(s >= 2)
    assert cover_matrix(M, limit=s - 1).s_min is None
    assert cover_matrix(M, limit=s).s_min == s


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_equality_under_the_block_partition(n):
    # [PAPER] cc of EQ_n is n when the x block faces the y block
    p = Partition.of(range(1, n + 1), range(n + 1, 2 * n + 1))
    r = min_rectangle_cover(eq_function(n), p)
    assert r.s_min == 2 ** n
    assert r.cc == n
    assert check_cover(eq_function(n), p, r.rectangles)


def test_equality_has_a_cheap_balanced_partition():
    # [PAPER] the balanced best case for EQ_n is 0
    # pairing x_i with y_i on one side makes the function a product of a Y part and a Z part
    r = cc_best_third(eq_function(3))
    assert r.s_min == 1
    assert r.partition.balanced
    assert width_lower_bound(eq_function(3)) == 0


def test_three_model_dnf():
    r = min_rectangle_cover(dnf_example_function(), Partition.of([1, 2], [3]))
    assert r.s_min == 2
    assert check_cover(dnf_example_function(), r.partition, r.rectangles)


def test_amo_needs_two_rectangles():
    # [DERIVED] rows "nothing on Y" and "one on Y" need different column sets
    assert min_rectangle_cover(amo_function(4), Partition.of([1, 2], [3, 4])).s_min == 2


@given(functions(), st.data())
def test_renaming_variables_keeps_cover_size(f, data):
    vs = list(f.vars)
    Y = data.draw(st.lists(st.sampled_from(vs), unique=True))
    perm = data.draw(st.permutations(list(range(20, 20 + f.n))))
    mp = dict(zip(vs, perm))
    p = Partition.split(vs, Y)
    q = Partition.split(perm, [mp[v] for v in Y])
    assert min_rectangle_cover(f, p).s_min == min_rectangle_cover(f.rename(mp), q).s_min


@given(functions(), st.data())
def test_swapping_sides_keeps_cover_size(f, data):
    Y = data.draw(st.lists(st.sampled_from(list(f.vars)), unique=True))
    p = Partition.split(f.vars, Y)
    assert min_rectangle_cover(f, p).s_min == min_rectangle_cover(f, Partition(p.Z, p.Y)).s_min


@pytest.mark.parametrize("n, k", [(6, 1), (6, 2), (9, 3), (12, 2)])
def test_cardinality_fooling_family_bounds_cover(n, k):
    f = cardinality_function(n, k)
    p = Partition.of(range(1, n // 3 + 1), range(n // 3 + 1, n + 1))
    fam = cardinality_fooling_family(n, k, p)
    fr = fooling_set_bound(f, p, fam)
    assert fr.ok and fr.bound == min(k, n // 3) + 1
    assert fr.bound <= min_rectangle_cover(f, p).s_min


def test_fooling_check_names_failing_pair():
    f = FunctionSpec.from_predicate((1, 2), lambda b: True)
    p = Partition.of([1], [2])
    fr = fooling_set_bound(f, p, [{1: 0, 2: 0}, {1: 1, 2: 1}])
    assert not fr.ok and fr.failing == (0, 1)
    with pytest.raises(ValueError, match="not a model"):
        fooling_set_bound(amo_function(2), p, [{1: 1, 2: 1}])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7])
def test_balanced_partitions(n):
    ps = balanced_partitions(range(1, n + 1))
    assert all(p.balanced and 1 in p.Y for p in ps)
    sizes = [s for s in range(n + 1) if 3 * min(s, n - s) >= n]
    # each unordered split is listed once
    assert len(ps) == sum(math.comb(n, s) for s in sizes) // 2
    assert [p.Y for p in ps] == sorted(p.Y for p in ps)


def test_comm_matrix_orientation():
    f = FunctionSpec.from_predicate((1, 2, 3), lambda b: b == (1, 0, 1))
    M = comm_matrix(f, Partition.of([3], [1, 2]))
    assert M.shape == (2, 4)
    assert M[1, 0b10] and M.sum() == 1
    with pytest.raises(ValueError):
        comm_matrix(f, Partition.of([1], [2]))


def test_caps():
    big = FunctionSpec(tuple(range(1, MAX_COVER_VARS + 2)), np.zeros(1 << (MAX_COVER_VARS + 1), dtype=bool))
    with pytest.raises(CapExceeded):
        min_rectangle_cover(big, Partition.of([1], range(2, MAX_COVER_VARS + 2)))
    with pytest.raises(CapExceeded):
        cc_best_third(cardinality_function(15, 1))


def test_constant_functions():
    f = FunctionSpec.from_predicate((1, 2), lambda b: False)
    assert cc(f, Partition.of([1], [2])) == -math.inf
    g = FunctionSpec.from_predicate((1, 2), lambda b: True)
    assert cc(g, Partition.of([1], [2])) == 0


def test_cut_audit_on_the_figure(fig_dnnf):
    ell = interface_gates(fig_dnnf)
    assert ell[2] == 2 and ell[0] == 1 and ell[3] == 2
    audit = cut_cc_audit(fig_dnnf)
    assert audit.ok and audit.violation is None
    assert {r.node for r in audit.rows} == set(fig_dnnf.vtree.nodes)


def test_cut_audit_refuses_mismatched_function(fig_dnnf):
    with pytest.raises(ValueError, match="differ"):
        cut_cc_audit(fig_dnnf, amo_function(4))


@given(formulas(max_vars=6, max_clauses=7))
def test_cut_audit_holds_on_compiled_circuits(F):
    _, _, D, _ = compile_widths(F)
    assume(isinstance(D, StructuredDnnf))
    audit = cut_cc_audit(D)
    assert audit.ok, audit.violation
