from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectex.geometry import Multirectangle, Rectangle
from rectex.invariants import tensor, vol_tensor
from rectex.lattice import (
    Lattice,
    LatticeError,
    check_domain,
    default_r0,
    fundamental_domain,
    torus_vol,
)
from rectex.scalar import SymbolTable

TABLE = SymbolTable.from_spec("sqrt2,sqrt3")


def lattice(T, *columns):
    return Lattice([[T.coerce(x) for x in c] for c in columns], T)


def formula(L):
    """``a (x) d - c (x) b`` for columns (a, b) and (c, d), with the sign of the determinant."""
    (a, b), (c, d) = L.columns
    return (tensor(a, d) - tensor(c, b)) * L.det_sign()


def test_integer_lattice(T, box):
    L = lattice(T, [1, 0], [0, 1])
    M = fundamental_domain(L, box([0, 0], [1, 1]))
    assert M.same_set(Multirectangle([box([0, 0], [1, 1])]))
    assert torus_vol(L).coeffs == {("1", "1"): Fraction(1)}


def test_sheared_lattice(T):
    L = lattice(T, [1, 0], ["1/2", 1])
    M = fundamental_domain(L)
    assert check_domain(L, M)
    assert vol_tensor(M).coeffs == {("1", "1"): Fraction(1)}
    assert vol_tensor(M) == formula(L)


def test_scaled_lattice(T):
    s = T.symbol("sqrt2")
    L = lattice(T, [s, 0], [0, s])
    assert torus_vol(L).coeffs == {("sqrt2", "sqrt2"): Fraction(1)}


def test_domain_independent_of_start_box(T, box):
    L = lattice(T, [1, "1/3"], [T.symbol("sqrt2", "1/2"), 1])
    r0 = default_r0(L)
    bigger = Rectangle([x - 1 for x in r0.lo], [x + 1 for x in r0.hi])
    assert torus_vol(L) == torus_vol(L, bigger)
    assert check_domain(L, fundamental_domain(L, bigger))


def test_singular_basis_rejected(T):
    with pytest.raises(LatticeError):
        lattice(T, [1, 2], [2, 4])


def test_non_covering_start_box_rejected(T, box):
    L = lattice(T, [1, 0], [0, 1])
    with pytest.raises(LatticeError):
        fundamental_domain(L, box([0, 0], ["1/2", 1]))


def test_check_domain_detects_overlap(T, box):
    L = lattice(T, [1, 0], [0, 1])
    bad = Multirectangle([box([0, 0], ["3/2", 1])])
    res = check_domain(L, bad)
    assert not res.disjoint and not res


entries = st.sampled_from(["0", "1/2", "1/3", "-1/2", "1", "2/3", "-1/3"])
irrational = st.sampled_from([
    {"sqrt2": "1"}, {"sqrt2": "1/2"}, {"sqrt3": "1/2"}, {"1": "1", "sqrt2": "-1/2"}, {"sqrt3": "1/3"},
])


@given(irrational, irrational, entries, entries)
@settings(max_examples=25, deadline=None)
def test_torus_volume_formula(a, d, b, c):
    T = TABLE
    try:
        L = lattice(T, [T.coerce(a), T.coerce(b)], [T.coerce(c), T.coerce(d)])
    except LatticeError:
        return
    M = fundamental_domain(L)
    assert check_domain(L, M)
    assert vol_tensor(M) == formula(L)
