import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectex.decompose import (
    DecomposeStats,
    NotAnInvolution,
    analyze_partition,
    decompose_involution,
    decompose_shuffles,
    grid_to_grid_decompose,
    transposition_to_shuffles,
)
from rectex.geometry import GridPattern, Multirectangle, Rectangle
from rectex.invariants import saf
from rectex.qfree import refine_grid_qfree
from rectex.recmap import (
    Piece,
    RecMap,
    Transposition,
    compose_all,
    identity,
    is_restricted_shuffle,
    mk_iet_lift,
    mk_restricted_shuffle,
    mk_transposition,
    rec_compose,
    rec_equal,
)
from rectex.sampling import random_involution, random_recmap
from rectex.scalar import SymbolTable

TABLE = SymbolTable.from_spec("sqrt2,sqrt3")
seeds = st.integers(0, 10_000)


def recomposes(factors, f):
    if not factors:
        return rec_equal(identity(f.ambient, f.table), f)
    return rec_equal(compose_all(factors, f.ambient, f.table), f)


def all_shuffles(factors, ambient):
    return all(is_restricted_shuffle(s.to_recmap(ambient)) is not None for s in factors)


def test_grid_has_empty_sky(T):
    s = T.symbol("sqrt2", "1/2")
    G = GridPattern([[T.zero(), s], [T.zero(), T.symbol("sqrt3", "1/3")]], T)
    an = analyze_partition(G)
    assert an.sky == set() and an.complexity == []
    assert set(an.ground) <= an.city


def test_floating_cell_sets_complexity(T, box):
    # two ground cells of heights h and 1; the cell above the short one starts at h
    h = T.symbol("sqrt2", "1/2")
    s = T.symbol("sqrt3", "1/3")
    cells = [
        box([0, 0], [s, h]),
        box([s, 0], [1, 1]),
        box([0, h], [s / 2, 1]),
        box([s / 2, h], [s, 1]),
    ]
    an = analyze_partition(cells, check=False)
    assert an.complexity == [h]
    assert an.working_height == h
    assert set(an.ground) <= an.city
    assert an.sky == {2, 3}


def test_involution_of_transposition(T, box):
    P, Q = box([0, 0], ["1/4", "1/4"]), box(["1/2", 0], ["3/4", "1/4"])
    out = decompose_involution(mk_transposition(P, Q))
    assert out == [Transposition(P, Q)]


def test_involution_of_two_transpositions(T, box):
    t1 = mk_transposition(box([0, 0], ["1/4", "1/4"]), box(["1/2", 0], ["3/4", "1/4"]))
    t2 = mk_transposition(box([0, "1/2"], ["1/4", 1]), box(["1/2", "1/2"], ["3/4", 1]))
    f = rec_compose(t1, t2)
    out = decompose_involution(f)
    assert len(out) == 2
    assert recomposes(out, f)


def test_three_cycle_is_not_an_involution(T, box):
    third = T.rational("1/3")
    f = RecMap(Multirectangle([box([0], [1])]), [
        Piece(box([0], ["1/3"]), (third,)),
        Piece(box(["1/3"], ["2/3"]), (third,)),
        Piece(box(["2/3"], [1]), (-2 * third,)),
    ], T)
    with pytest.raises(NotAnInvolution):
        decompose_involution(f)


def test_one_dimensional_transposition(T, box):
    a = T.symbol("sqrt2", "1/2")
    b = T.rational("1/4")
    tau = mk_transposition(Rectangle([T.zero()], [b]), Rectangle([a], [a + b]))
    out = transposition_to_shuffles(tau)
    assert len(out) == 2
    assert recomposes(out, tau)


def test_aligned_transposition(T, box):
    tau = mk_transposition(box([0, "1/4"], ["1/4", "1/2"]), box(["1/2", "1/4"], ["3/4", "1/2"]))
    out = transposition_to_shuffles(tau)
    assert len(out) == 2
    assert recomposes(out, tau)
    assert all_shuffles(out, tau.ambient)


@pytest.mark.parametrize("d", [2, 3])
def test_general_transposition(T, box, d):
    P = box([0] * d, ["1/4"] * d)
    Q = box(["1/2"] * d, ["3/4"] * d)
    tau = mk_transposition(P, Q)
    out = transposition_to_shuffles(tau)
    assert len(out) <= 2 * (2 * d - 1)
    assert recomposes(out, tau)
    assert all_shuffles(out, tau.ambient)


def test_grid_to_grid_identity(T):
    Q = GridPattern([[T.zero(), T.symbol("sqrt2", "1/2")]] * 2, T)
    assert grid_to_grid_decompose(identity(2, T), Q) == []


def test_grid_to_grid_cell_permutation(T, box):
    s = T.symbol("sqrt2", "1/2")
    Q = GridPattern([[T.zero(), s], [T.zero(), T.rational("1/2")]], T)
    # swap the two cells of equal shape in the lower row with the upper row
    f = mk_transposition(box([0, 0], [s, "1/2"]), box([0, "1/2"], [s, 1]))
    out = grid_to_grid_decompose(f, Q)
    assert recomposes(out, f)
    assert all_shuffles(out, f.ambient)


def test_grid_to_grid_of_lift_uses_axis_shuffles(T):
    a, b = T.symbol("sqrt2", "1/2"), T.rational("1/3")
    zero = T.zero()
    rot = mk_restricted_shuffle(0, Rectangle([], []), zero, a, b)
    f = mk_iet_lift([rot, identity(1, T)])
    Q = refine_grid_qfree(GridPattern([[zero, a - b, a], [zero]], T))
    out = grid_to_grid_decompose(f, Q)
    assert recomposes(out, f)
    assert all(s.base.dim == 1 for s in out)
    assert all_shuffles(out, f.ambient)


def test_shuffle_and_identity(T, box):
    f = mk_restricted_shuffle(0, box(["1/4"], ["3/4"]), T.zero(), T.symbol("sqrt2", "1/2"), T.rational("1/5"))
    out = decompose_shuffles(f)
    assert out and recomposes(out, f)
    assert decompose_shuffles(identity(2, T)) == []


def test_needs_unit_cube(T, box):
    with pytest.raises(ValueError):
        decompose_shuffles(identity(Multirectangle([box([0], ["1/2"])]), T))


@given(seeds, st.integers(4, 6))
@settings(max_examples=15, deadline=None)
def test_random_maps_decompose(seed, pieces):
    f = random_recmap(2, pieces, seed, TABLE)
    stats = DecomposeStats()
    out = decompose_shuffles(f, stats)
    assert recomposes(out, f)
    assert all_shuffles(out, f.ambient)
    assert stats.traces_decrease()
    total = saf(identity(2, TABLE))
    for s in out:
        total = total + saf(s.to_recmap(f.ambient))
    assert total == saf(f)


@given(seeds)
@settings(max_examples=5, deadline=None)
def test_random_maps_decompose_in_dimension_one_and_three(seed):
    for d in (1, 3):
        f = random_recmap(d, 4, seed, TABLE)
        out = decompose_shuffles(f)
        assert recomposes(out, f)


@given(seeds, st.integers(1, 3))
@settings(max_examples=12, deadline=None)
def test_random_involutions(seed, d):
    f = random_involution(d, seed, TABLE)
    out = decompose_involution(f)
    assert recomposes(out, f)
    supports = [Multirectangle([t.P, t.Q]) for t in out]
    for i, a in enumerate(supports):
        for b in supports[i + 1:]:
            assert not a.meets(b)
