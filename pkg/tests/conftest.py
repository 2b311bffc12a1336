import pytest

from rectex.geometry import Multirectangle, Rectangle, unit_cube
from rectex.scalar import SymbolTable


@pytest.fixture(scope="session")
def T():
    return SymbolTable.from_spec("sqrt2,sqrt3,sqrt5")


@pytest.fixture
def box(T):
    """``box([lo...], [hi...])`` with entries coerced through the table."""

    def make(lo, hi):
        return Rectangle([T.coerce(x) for x in lo], [T.coerce(x) for x in hi])

    return make


@pytest.fixture
def cube(T):
    def make(d):
        return Multirectangle([unit_cube(T, d)], d)

    return make
