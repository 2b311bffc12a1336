from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectex.geometry import Multirectangle, Rectangle
from rectex.invariants import (
    Bijection,
    NotIsomorphic,
    TensorValue,
    extend_to_ambient,
    is_in_derived,
    is_in_gtg,
    rec_isomorphism,
    saf,
    tensor,
    vol_tensor,
    vol_tensor_i,
)
from rectex.recmap import (
    Piece,
    RecMap,
    identity,
    mk_iet_lift,
    mk_restricted_shuffle,
    mk_transposition,
    rec_compose,
    rec_equal,
    rec_inverse,
    rec_validate,
)
from rectex.sampling import random_commutator, random_recmap
from rectex.scalar import SymbolTable

TABLE = SymbolTable.from_spec("sqrt2,sqrt3,sqrt5")
seeds = st.integers(0, 10_000)


def shuffle_over(T, d, axis, c, a, b):
    """``+b`` modulo ``a`` along ``axis`` over the base box ``prod [0, c_j)``."""
    zero = T.zero()
    return mk_restricted_shuffle(axis, Rectangle([zero] * (d - 1), c), zero, a, b)


def test_vol_tensor_examples(T, box):
    assert vol_tensor(box([0, 0], ["1/2", "1/3"])).coeffs == {("1", "1"): Fraction(1, 6)}
    h = T.symbol("sqrt2", "1/2")
    assert vol_tensor(box([0, 0], [h, h])).coeffs == {("sqrt2", "sqrt2"): Fraction(1, 4)}


def test_vol_tensor_slot_swap(T, box):
    a, b = T.symbol("sqrt2", "1/2"), T.rational("1/3")
    R = box([0, 0], [a, b])
    assert vol_tensor_i(R, 1) == vol_tensor(R)
    assert vol_tensor_i(R, 0) == tensor(b, a)
    assert vol_tensor_i(R, 0).swap_slots(0, 1) == vol_tensor(R)


def test_tensor_arithmetic(T):
    a, b = T.symbol("sqrt2"), T.rational(2)
    assert tensor(a + b, b) == tensor(a, b) + tensor(b, b)
    assert (tensor(a, b) - tensor(a, b)).is_zero()
    assert tensor(a).otimes(b) == tensor(a, b)
    assert TensorValue.from_json(tensor(a, b).to_json(), T) == tensor(a, b)


def test_saf_of_rotation(T):
    a, b = T.symbol("sqrt2", "1/2"), T.rational("1/3")
    value = saf(shuffle_over(T, 1, 0, [], a, b))
    assert value.components[0].coeffs == {("sqrt2", "1"): Fraction(1, 6), ("1", "sqrt2"): Fraction(-1, 6)}
    assert value.components[0] == tensor(a, b) - tensor(b, a)


def test_saf_of_identity(T):
    assert saf(identity(3, T)).is_zero()


@pytest.mark.parametrize("axis", [0, 1])
def test_saf_of_slab_shuffle(T, axis):
    a, b, c = T.symbol("sqrt2", "1/2"), T.rational("1/3"), T.symbol("sqrt3", "1/2")
    value = saf(shuffle_over(T, 2, axis, [c], a, b))
    assert value.components[axis] == tensor(c, a, b) - tensor(c, b, a)
    assert value.components[1 - axis].is_zero()


def test_derived_membership(T, box):
    assert is_in_derived(random_commutator(2, 4, 42, T))
    assert is_in_derived(mk_transposition(box([0, 0], ["1/4", "1/4"]), box(["1/2", 0], ["3/4", "1/4"])))
    a, b, c = T.symbol("sqrt2", "1/2"), T.rational("1/3"), T.rational("1/2")
    f = shuffle_over(T, 2, 0, [c], a, b)
    assert not is_in_derived(f)
    assert ("1", "sqrt2", "1") in saf(f).components[0].coeffs


def test_gtg_membership(T, box):
    a, b = T.symbol("sqrt2", "1/2"), T.rational("1/3")
    rot = shuffle_over(T, 1, 0, [], a, b)
    assert is_in_gtg(mk_iet_lift([rot, identity(1, T)]))
    assert is_in_gtg(mk_transposition(box([0, 0], ["1/4", a]), box(["1/2", 0], ["3/4", a])))
    f = shuffle_over(T, 2, 0, [T.symbol("sqrt3", "1/2")], a, b)
    assert not is_in_gtg(f)
    assert ("sqrt3", "sqrt2", "1") in saf(f).components[0].coeffs


def test_isomorphism_found(T, box):
    M1 = Multirectangle([box([0, 0], ["1/2", 1])])
    M2 = Multirectangle([box([0, 0], [1, "1/2"])])
    phi = rec_isomorphism(M1, M2)
    assert isinstance(phi, Bijection)
    assert phi.validate() is None


def test_isomorphism_rejected_with_witness(T, box):
    h = T.symbol("sqrt2", "1/2")
    res = rec_isomorphism(Multirectangle([box([0, 0], [h, h])]), Multirectangle([box([0, 0], ["1/2", 1])]))
    assert isinstance(res, NotIsomorphic) and not res
    assert res.vol_source.coeffs == {("sqrt2", "sqrt2"): Fraction(1, 4)}
    assert res.vol_target.coeffs == {("1", "1"): Fraction(1, 2)}


def test_isomorphism_of_self_is_identity(T, box):
    M = Multirectangle([box([0, 0], ["1/2", "1/3"]), box(["1/2", 0], [1, "1/5"])])
    phi = rec_isomorphism(M, M)
    assert all(p.is_fixed() for p in phi.pieces)


def test_isomorphism_with_irrational_sides(T, box):
    s = T.symbol("sqrt2", "1/2")
    M1 = Multirectangle([box([0, 0], [s, "1/2"]), box([s, 0], [1, "1/2"])])
    M2 = Multirectangle([box([0, "1/2"], [1, 1])])
    phi = rec_isomorphism(M1, M2)
    assert phi.validate() is None


def test_extension_of_translation_is_transposition(T, box):
    P, Q = box([0, 0], ["1/4", "1/4"]), box(["1/2", "1/2"], ["3/4", "3/4"])
    v = tuple(q - p for p, q in zip(P.lo, Q.lo))
    phi = Bijection(Multirectangle([P]), Multirectangle([Q]), [Piece(P, v)], T)
    cube = Multirectangle([Rectangle([T.zero()] * 2, [T.rational(1)] * 2)])
    f = extend_to_ambient(phi, cube)
    assert rec_validate(f) is None
    assert rec_equal(f, mk_transposition(P, Q))


def test_extension_of_identity(T, box):
    P = box([0, 0], ["1/4", "1/4"])
    zero = (T.zero(), T.zero())
    phi = Bijection(Multirectangle([P]), Multirectangle([P]), [Piece(P, zero)], T)
    f = extend_to_ambient(phi, Multirectangle([box([0, 0], [1, 1])]))
    assert rec_validate(f) is None


def test_extension_requires_containment(T, box):
    P = box([0, 0], ["1/4", "1/4"])
    zero = (T.zero(), T.zero())
    phi = Bijection(Multirectangle([P]), Multirectangle([P]), [Piece(P, zero)], T)
    with pytest.raises(ValueError):
        extend_to_ambient(phi, Multirectangle([box(["1/2", 0], [1, 1])]))


@given(seeds, seeds, st.integers(1, 3))
@settings(max_examples=15, deadline=None)
def test_homomorphism(s1, s2, d):
    f, g = random_recmap(d, 6, s1, TABLE), random_recmap(d, 6, s2, TABLE)
    assert saf(rec_compose(f, g)) == saf(f) + saf(g)
    assert saf(rec_inverse(f)) == -saf(f)
    assert all(c.is_antisymmetric_last() for c in saf(f).components)


@given(seeds, seeds)
@settings(max_examples=10, deadline=None)
def test_kernel_closed_under_conjugation(s1, s2):
    f = random_commutator(2, 4, s1, TABLE)
    h = random_recmap(2, 5, s2, TABLE)
    assert is_in_derived(f)
    assert is_in_derived(rec_compose(rec_compose(h, f), rec_inverse(h)))


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_volume_is_invariant(seed):
    f = random_recmap(2, 6, seed, TABLE)
    M0 = Multirectangle([f.pieces[0].domain, *(p.domain for p in f.pieces[2:3])])
    image = Multirectangle([r for box in M0 for r in f.image_of(box)])
    assert vol_tensor(image) == vol_tensor(M0)


@given(seeds)
@settings(max_examples=10, deadline=None)
def test_random_isomorphisms_extend(seed):
    f = random_recmap(2, 5, seed, TABLE)
    M1 = Multirectangle([f.pieces[0].domain])
    M2 = Multirectangle(f.image_of(f.pieces[0].domain))
    phi = rec_isomorphism(M1, M2)
    assert phi.validate() is None
    g = extend_to_ambient(phi, f.ambient)
    assert rec_validate(g) is None
    assert Multirectangle([r for box in M1 for r in g.image_of(box)]).same_set(M2)
