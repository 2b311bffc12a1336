from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rectex.geometry import (
    DimensionError,
    GridPattern,
    Multirectangle,
    RectPartition,
    Rectangle,
    coalesce_boxes,
    common_refinement,
    grid_refine,
    mrect_subtract,
    rect_intersect,
    unit_cube,
)
from rectex.invariants import vol_tensor
from rectex.scalar import SymbolTable

TABLE = SymbolTable.from_spec("sqrt2")


def test_intersection(box):
    assert rect_intersect(box([0, 0], [1, 1]), box(["1/2", "1/2"], ["3/2", "3/2"])) == box(["1/2", "1/2"], [1, 1])
    assert rect_intersect(box([0], ["1/2"]), box(["1/2"], [1])) is None
    A = box([0, 0], ["1/2", 1])
    assert rect_intersect(A, A) == A


def test_intersection_dimension_mismatch(box):
    with pytest.raises(DimensionError):
        rect_intersect(box([0], [1]), box([0, 0], [1, 1]))


def test_degenerate_rectangle_rejected(box):
    with pytest.raises(ValueError):
        box([0, 0], [0, 1])


def test_subtraction(box, cube):
    C = cube(2)
    assert mrect_subtract(C, C).is_empty()
    rest = mrect_subtract(C, Multirectangle([box([0, 0], ["1/2", "1/2"])]))
    # guillotine cuts along axis 0 first: one full-height slab plus one box
    assert len(rest) == 2
    assert rest.overlap_report() is None
    assert vol_tensor(rest).coeffs == {("1", "1"): Fraction(3, 4)}
    assert vol_tensor(rest) == vol_tensor(C) - vol_tensor(box([0, 0], ["1/2", "1/2"]))
    assert mrect_subtract(C, Multirectangle([], 2)).same_set(C)


def test_common_refinement(box, cube, T):
    C = cube(2)
    vert = RectPartition(C, [box([0, 0], ["1/2", 1]), box(["1/2", 0], [1, 1])])
    horiz = RectPartition(C, [box([0, 0], [1, "1/2"]), box([0, "1/2"], [1, 1])])
    assert common_refinement(vert, vert).refines(vert)
    R = common_refinement(vert, horiz)
    assert len(R.cells) == 4
    assert R.report() is None
    assert R.refines(vert) and R.refines(horiz)


def test_common_refinement_target_mismatch(box, cube):
    p = RectPartition(cube(1), [box([0], [1])])
    q = RectPartition(Multirectangle([box([0], ["1/2"])]), [box([0], ["1/2"])])
    with pytest.raises(ValueError):
        common_refinement(p, q)


def test_grid_refine(box, cube, T):
    L = RectPartition(cube(2), [
        box([0, 0], ["1/2", 1]),
        box(["1/2", 0], [1, "1/2"]),
        box(["1/2", "1/2"], [1, 1]),
    ])
    G = grid_refine(L)
    half = T.rational("1/2")
    assert G.axes == ((T.zero(), half), (T.zero(), half))
    assert G.partition().refines(L)
    assert grid_refine(G.partition()) == G
    assert grid_refine(RectPartition(cube(2), [unit_cube(T, 2)])).axes == ((T.zero(),), (T.zero(),))


def test_grid_refine_needs_unit_cube(box):
    M = Multirectangle([box([0], ["1/2"])])
    with pytest.raises(ValueError):
        grid_refine(RectPartition(M, [box([0], ["1/2"])]))


def test_grid_validation(T):
    with pytest.raises(ValueError):
        GridPattern([[T.rational("1/2")]], T)
    with pytest.raises(ValueError):
        GridPattern([[T.zero(), T.rational(1)]], T)


def test_partition_reports(box, cube):
    with pytest.raises(ValueError, match="overlap"):
        RectPartition(cube(1), [box([0], ["2/3"]), box(["1/2"], [1])])
    with pytest.raises(ValueError, match="cover"):
        RectPartition(cube(1), [box([0], ["1/2"])])


def test_coalesce_boxes(box):
    merged = coalesce_boxes([box([0, 0], ["1/2", 1]), box(["1/2", 0], [1, 1])])
    assert merged == [box([0, 0], [1, 1])]


cut = st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20)


@st.composite
def guillotine(draw, depth=3):
    """Random guillotine split of the unit square into boxes."""
    boxes = [unit_cube(TABLE, 2)]
    for _ in range(draw(st.integers(0, depth))):
        i = draw(st.integers(0, len(boxes) - 1))
        r = boxes.pop(i)
        axis = draw(st.integers(0, 1))
        t = draw(cut)
        x = r.lo[axis] + r.side(axis) * t
        boxes += [r.with_side(axis, r.lo[axis], x), r.with_side(axis, x, r.hi[axis])]
    return boxes


@given(guillotine())
@settings(max_examples=40, deadline=None)
def test_splits_partition_and_keep_volume(boxes):
    C = Multirectangle([unit_cube(TABLE, 2)])
    assert RectPartition(C, boxes).report() is None
    assert vol_tensor(Multirectangle(boxes)) == vol_tensor(C)
    G = grid_refine(boxes)
    assert G.partition().refines(RectPartition(C, boxes))


@given(guillotine(), guillotine())
@settings(max_examples=25, deadline=None)
def test_subtraction_is_exact(a, b):
    A = Multirectangle(a[: len(a) // 2 + 1])
    B = Multirectangle(b[: len(b) // 2 + 1])
    diff = A.subtract(B)
    assert diff.overlap_report() is None
    assert not diff.meets(B)
    assert diff.union(A.intersect(B)).same_set(A)
