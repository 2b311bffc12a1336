import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectex.geometry import GridPattern
from rectex.qfree import (
    SearchBudgetExceeded,
    budget,
    is_qfree,
    is_setwise_qfree,
    refine_grid_qfree,
    simplicial_refine,
)
from rectex.scalar import SymbolTable, scalar_sign

TABLE = SymbolTable.from_spec("sqrt2,sqrt3")

# needs the general cone construction: no subset of the inputs is a basis
CONE_INPUT = [
    {"1": "6", "sqrt2": "1/4", "sqrt3": "4"},
    {"1": "5/3", "sqrt2": "-5/4", "sqrt3": "3"},
    {"1": "7/2", "sqrt2": "-1/3", "sqrt3": "1"},
    {"1": "7/4", "sqrt2": "4", "sqrt3": "1"},
]


def grid(T, *axes):
    return GridPattern([[T.coerce(x) for x in cuts] for cuts in axes], T)


def test_setwise_qfree_examples(T):
    assert is_setwise_qfree(grid(T, [0, T.symbol("sqrt2", "1/2")], [0, T.symbol("sqrt3", "1/3")]))
    assert is_setwise_qfree(grid(T, [0, "1/2"], [0]))
    assert not is_setwise_qfree(grid(T, [0, "1/4"], [0]))


def test_refine_rationals(T):
    r = simplicial_refine([T.rational(3), T.rational(5)])
    assert r.basis == (T.rational(1),)
    assert r.expansion == ((3,), (5,))


def test_refine_contains_basis(T):
    one, s = T.rational(1), T.symbol("sqrt2")
    r = simplicial_refine([one, s, one + s])
    assert r.basis == (one, s)
    assert r.expansion == ((1, 0), (0, 1), (1, 1))


def test_refine_needs_new_basis(T):
    one, s = T.rational(1), T.symbol("sqrt2")
    S = [one, s - 1, 2 - s]
    r = simplicial_refine(S)
    assert r.verify(S) is None
    assert r.basis == (s - 1, 2 - s)
    assert r.expansion == ((1, 1), (1, 0), (0, 1))


def test_refine_rejects_nonpositive(T):
    with pytest.raises(ValueError):
        simplicial_refine([T.rational(1), T.zero()])


def test_refine_general_rank():
    S = [TABLE.coerce(x) for x in CONE_INPUT]
    r = simplicial_refine(S)
    assert r.verify(S) is None


def test_search_budget_is_enforced():
    S = [TABLE.coerce(x) for x in CONE_INPUT]
    with budget(1):
        with pytest.raises(SearchBudgetExceeded):
            simplicial_refine(S)


def test_refine_grid_identity_when_qfree(T):
    G = grid(T, [0, T.symbol("sqrt2", "1/2")], [0])
    assert refine_grid_qfree(G) == G


def test_refine_grid_rational_axis(T):
    R = refine_grid_qfree(grid(T, [0, "1/4"]))
    assert R.lengths(0) == [T.rational("1/4")] * 4


def test_refine_grid_sum_lengths(T):
    # lengths a, b, a + b with {a, b} Q-free
    a = T.symbol("sqrt2", "1/4")
    b = T.rational("1/2") - a
    G = grid(T, [0, a, a + b])
    assert {str(x) for x in G.lengths(0)} == {str(a), str(b), str(a + b)}
    R = refine_grid_qfree(G)
    assert set(R.lengths(0)) == {a, b}
    assert is_setwise_qfree(R)
    assert set(G.axes[0]) <= set(R.axes[0])


positive_rationals = st.fractions(min_value=Fraction(1, 30), max_value=10, max_denominator=30)


@given(st.lists(positive_rationals, min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_rational_inputs_match_gcd(qs):
    S = [TABLE.rational(q) for q in qs]
    r = simplicial_refine(S)
    assert r.verify(S) is None
    den = math.lcm(*(q.denominator for q in qs))
    g = Fraction(math.gcd(*(int(q * den) for q in qs)), den)
    assert r.basis == (TABLE.rational(g),)


small = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@given(st.lists(st.tuples(small, small), min_size=2, max_size=5))
@settings(max_examples=60, deadline=None)
def test_rank_two_inputs_refine(pairs):
    S = [TABLE.scalar({"1": p, "sqrt2": q}) for p, q in pairs]
    S = [s for s in S if scalar_sign(s) > 0]
    if not S:
        return
    r = simplicial_refine(S)
    assert r.verify(S) is None
    assert is_qfree(r.basis)
    assert all(scalar_sign(b) > 0 for b in r.basis)
