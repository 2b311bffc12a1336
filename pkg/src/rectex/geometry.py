"""Half-open axis-aligned boxes, finite disjoint unions of them, and partitions.

A :class:`Rectangle` denotes ``prod_i [lo_i, hi_i)``.  Set differences are
computed by axis-ordered guillotine cuts (axis 0 first) so that outputs are
deterministic.  Nothing here merges adjacent boxes implicitly; see
:func:`coalesce_boxes` for the separate best-effort pass.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator, Sequence

from .scalar import Scalar, SymbolTable, compare, smax, smin

__all__ = [
    "DimensionError",
    "Rectangle",
    "Multirectangle",
    "RectPartition",
    "GridPattern",
    "rect_intersect",
    "mrect_subtract",
    "common_refinement",
    "grid_refine",
    "unit_cube",
    "coalesce_boxes",
    "lex_key",
]


_EPS = 1e-9


class DimensionError(ValueError):
    pass


class Rectangle:
    __slots__ = ("lo", "hi", "_hash", "_fbox")

    def __init__(self, lo: Sequence[Scalar], hi: Sequence[Scalar], check: bool = True):
        self.lo = tuple(lo)
        self.hi = tuple(hi)
        if len(self.lo) != len(self.hi):
            raise DimensionError("lo and hi differ in length")
        if check:
            for i, (a, b) in enumerate(zip(self.lo, self.hi)):
                if compare(a, b) >= 0:
                    raise ValueError(f"degenerate side on axis {i}: [{a}, {b})")
        self._hash = None
        self._fbox = None

    def fbox(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Float approximation of the corners, used only to prune exact tests."""
        if self._fbox is None:
            self._fbox = (tuple(map(float, self.lo)), tuple(map(float, self.hi)))
        return self._fbox

    def far_from(self, other: "Rectangle") -> bool:
        """True when the boxes are certainly disjoint (separated by a float margin)."""
        alo, ahi = self.fbox()
        blo, bhi = other.fbox()
        for a0, a1, b0, b1 in zip(alo, ahi, blo, bhi):
            if a1 < b0 - _EPS or b1 < a0 - _EPS:
                return True
        return False

    @property
    def dim(self) -> int:
        return len(self.lo)

    def __eq__(self, other):
        return isinstance(other, Rectangle) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.lo, self.hi))
        return h

    def __repr__(self):
        sides = " x ".join(f"[{a}, {b})" for a, b in zip(self.lo, self.hi))
        return f"Rectangle({sides})"

    def sides(self) -> tuple[Scalar, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def side(self, axis: int) -> Scalar:
        return self.hi[axis] - self.lo[axis]

    def intersect(self, other: "Rectangle") -> "Rectangle | None":
        if self.dim != other.dim:
            raise DimensionError(f"dimension {self.dim} vs {other.dim}")
        if self.far_from(other):
            return None
        lo, hi = [], []
        for a0, a1, b0, b1 in zip(self.lo, self.hi, other.lo, other.hi):
            l = smax(a0, b0)
            h = smin(a1, b1)
            if compare(l, h) >= 0:
                return None
            lo.append(l)
            hi.append(h)
        return Rectangle(lo, hi, check=False)

    def meets(self, other: "Rectangle") -> bool:
        if self.far_from(other):
            return False
        for a0, a1, b0, b1 in zip(self.lo, self.hi, other.lo, other.hi):
            if compare(a0, b1) >= 0 or compare(b0, a1) >= 0:
                return False
        return True

    def contains(self, other: "Rectangle") -> bool:
        return all(
            compare(a0, b0) <= 0 and compare(b1, a1) <= 0
            for a0, a1, b0, b1 in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def contains_point(self, x: Sequence[Scalar]) -> bool:
        return all(compare(a, t) <= 0 and compare(t, b) < 0 for a, b, t in zip(self.lo, self.hi, x))

    def translate(self, v: Sequence[Scalar]) -> "Rectangle":
        return Rectangle(
            [a + t for a, t in zip(self.lo, v)], [b + t for b, t in zip(self.hi, v)], check=False
        )

    def subtract(self, other: "Rectangle") -> list["Rectangle"]:
        """``self \\ other`` as at most ``2*dim`` disjoint boxes (axis 0 cut first)."""
        if not self.meets(other):
            return [self]
        out = []
        lo, hi = list(self.lo), list(self.hi)
        for k in range(self.dim):
            if compare(lo[k], other.lo[k]) < 0:
                h = list(hi)
                h[k] = other.lo[k]
                out.append(Rectangle(lo, h, check=False))
                lo[k] = other.lo[k]
            if compare(other.hi[k], hi[k]) < 0:
                l = list(lo)
                l[k] = other.hi[k]
                out.append(Rectangle(l, hi, check=False))
                hi[k] = other.hi[k]
        return out

    def drop_axis(self, axis: int) -> "Rectangle":
        """Orthogonal projection onto the coordinates other than ``axis``."""
        return Rectangle(
            self.lo[:axis] + self.lo[axis + 1:], self.hi[:axis] + self.hi[axis + 1:], check=False
        )

    def insert_axis(self, axis: int, lo: Scalar, hi: Scalar) -> "Rectangle":
        """Inverse of :meth:`drop_axis`: product with ``[lo, hi)`` placed at ``axis``."""
        return Rectangle(
            self.lo[:axis] + (lo,) + self.lo[axis:], self.hi[:axis] + (hi,) + self.hi[axis:]
        )

    def with_side(self, axis: int, lo: Scalar, hi: Scalar) -> "Rectangle":
        l, h = list(self.lo), list(self.hi)
        l[axis], h[axis] = lo, hi
        return Rectangle(l, h)

    def to_json(self) -> dict:
        return {"lo": [s.to_json() for s in self.lo], "hi": [s.to_json() for s in self.hi]}

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "Rectangle":
        return cls([table.coerce(x) for x in data["lo"]], [table.coerce(x) for x in data["hi"]])


def lex_key(values: Sequence[Scalar]):
    """Sort key ordering scalar tuples lexicographically by embedded value."""
    return _LexKey(tuple(values))


class _LexKey:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def _cmp(self, other) -> int:
        for a, b in zip(self.v, other.v):
            c = compare(a, b)
            if c:
                return c
        return (len(self.v) > len(other.v)) - (len(self.v) < len(other.v))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __eq__(self, other):
        return self._cmp(other) == 0


def unit_cube(table: SymbolTable, dim: int) -> Rectangle:
    return Rectangle([table.zero()] * dim, [table.rational(1)] * dim)


def rect_intersect(a: Rectangle, b: Rectangle) -> Rectangle | None:
    return a.intersect(b)


class Multirectangle:
    """A finite union of pairwise disjoint boxes (possibly empty)."""

    __slots__ = ("pieces", "dim")

    def __init__(self, pieces: Iterable[Rectangle] = (), dim: int | None = None, check: bool = False):
        self.pieces = tuple(pieces)
        if dim is None:
            if not self.pieces:
                raise DimensionError("empty multirectangle needs an explicit dimension")
            dim = self.pieces[0].dim
        self.dim = dim
        for p in self.pieces:
            if p.dim != dim:
                raise DimensionError("mixed dimensions in multirectangle")
        if check:
            msg = self.overlap_report()
            if msg:
                raise ValueError(msg)

    def overlap_report(self) -> str | None:
        for i, a in enumerate(self.pieces):
            for j in range(i + 1, len(self.pieces)):
                if a.meets(self.pieces[j]):
                    return f"pieces {i} and {j} overlap"
        return None

    def __iter__(self) -> Iterator[Rectangle]:
        return iter(self.pieces)

    def __len__(self):
        return len(self.pieces)

    def __repr__(self):
        return f"Multirectangle({list(self.pieces)!r})"

    def is_empty(self) -> bool:
        return not self.pieces

    def subtract(self, other: "Multirectangle | Rectangle") -> "Multirectangle":
        cutters = [other] if isinstance(other, Rectangle) else list(other.pieces)
        cur = list(self.pieces)
        for c in cutters:
            nxt = []
            for p in cur:
                nxt.extend(p.subtract(c))
            cur = nxt
        return Multirectangle(cur, dim=self.dim)

    def intersect(self, other: "Multirectangle | Rectangle") -> "Multirectangle":
        others = [other] if isinstance(other, Rectangle) else list(other.pieces)
        out = []
        for p in self.pieces:
            for q in others:
                r = p.intersect(q)
                if r is not None:
                    out.append(r)
        return Multirectangle(out, dim=self.dim)

    def union(self, other: "Multirectangle") -> "Multirectangle":
        """Disjoint union; overlapping parts of ``other`` are dropped."""
        return Multirectangle(self.pieces + other.subtract(self).pieces, dim=self.dim)

    def translate(self, v) -> "Multirectangle":
        return Multirectangle([p.translate(v) for p in self.pieces], dim=self.dim)

    def contains(self, other: "Multirectangle | Rectangle") -> bool:
        if isinstance(other, Rectangle):
            other = Multirectangle([other])
        return other.subtract(self).is_empty()

    def same_set(self, other: "Multirectangle") -> bool:
        return self.contains(other) and other.contains(self)

    def meets(self, other: "Multirectangle | Rectangle") -> bool:
        others = [other] if isinstance(other, Rectangle) else other.pieces
        return any(p.meets(q) for p in self.pieces for q in others)

    def bounding_box(self) -> Rectangle:
        if not self.pieces:
            raise ValueError("empty multirectangle has no bounding box")
        lo = list(self.pieces[0].lo)
        hi = list(self.pieces[0].hi)
        for p in self.pieces[1:]:
            lo = [smin(a, b) for a, b in zip(lo, p.lo)]
            hi = [smax(a, b) for a, b in zip(hi, p.hi)]
        return Rectangle(lo, hi, check=False)

    def is_box(self) -> bool:
        return bool(self.pieces) and Multirectangle([self.bounding_box()]).subtract(self).is_empty()

    def to_json(self) -> list:
        return [p.to_json() for p in self.pieces]

    @classmethod
    def from_json(cls, data, table: SymbolTable, dim: int | None = None) -> "Multirectangle":
        return cls([Rectangle.from_json(r, table) for r in data], dim=dim, check=True)


def mrect_subtract(m: Multirectangle, n: Multirectangle) -> Multirectangle:
    return m.subtract(n)


class RectPartition:
    """Boxes ``cells`` partitioning the multirectangle ``target``."""

    __slots__ = ("target", "cells")

    def __init__(self, target: Multirectangle, cells: Iterable[Rectangle], check: bool = True):
        self.target = target
        self.cells = tuple(cells)
        if check:
            msg = self.report()
            if msg:
                raise ValueError(msg)

    @property
    def dim(self) -> int:
        return self.target.dim

    def report(self) -> str | None:
        m = Multirectangle(self.cells, dim=self.target.dim)
        msg = m.overlap_report()
        if msg:
            return "cells overlap: " + msg
        if not m.subtract(self.target).is_empty():
            return "cells leave the target"
        if not self.target.subtract(m).is_empty():
            return "cells do not cover the target"
        return None

    def refines(self, other: "RectPartition") -> bool:
        return all(any(c.contains(k) for c in other.cells) for k in self.cells)


def common_refinement(p: RectPartition, q: RectPartition) -> RectPartition:
    if not p.target.same_set(q.target):
        raise ValueError("partitions of different targets")
    cells = []
    for a in p.cells:
        for b in q.cells:
            r = a.intersect(b)
            if r is not None:
                cells.append(r)
    return RectPartition(p.target, cells, check=False)


class GridPattern:
    """Product partition of ``[0,1)^d``: per axis, strictly increasing cuts from 0."""

    __slots__ = ("axes", "table")

    def __init__(self, axes: Sequence[Sequence[Scalar]], table: SymbolTable, check: bool = True):
        self.axes = tuple(tuple(a) for a in axes)
        self.table = table
        if check:
            zero, one = table.zero(), table.rational(1)
            for i, cuts in enumerate(self.axes):
                if not cuts or cuts[0] != zero:
                    raise ValueError(f"axis {i} must start at 0")
                for a, b in zip(cuts, cuts[1:]):
                    if compare(a, b) >= 0:
                        raise ValueError(f"axis {i} cuts are not strictly increasing")
                if compare(cuts[-1], one) >= 0:
                    raise ValueError(f"axis {i} cuts must end below 1")

    @property
    def dim(self) -> int:
        return len(self.axes)

    def intervals(self, axis: int) -> list[tuple[Scalar, Scalar]]:
        cuts = self.axes[axis]
        ends = cuts[1:] + (self.table.rational(1),)
        return list(zip(cuts, ends))

    def lengths(self, axis: int) -> list[Scalar]:
        return [b - a for a, b in self.intervals(axis)]

    def cells(self) -> list[Rectangle]:
        per_axis = [self.intervals(i) for i in range(self.dim)]
        return [
            Rectangle([a for a, _ in combo], [b for _, b in combo], check=False)
            for combo in product(*per_axis)
        ]

    def partition(self) -> RectPartition:
        return RectPartition(Multirectangle([unit_cube(self.table, self.dim)]), self.cells(), check=False)

    def __eq__(self, other):
        return isinstance(other, GridPattern) and self.axes == other.axes

    def __hash__(self):
        return hash(self.axes)

    def __repr__(self):
        return f"GridPattern({[list(a) for a in self.axes]!r})"

    def to_json(self) -> list:
        return [[s.to_json() for s in cuts] for cuts in self.axes]

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "GridPattern":
        return cls([[table.coerce(x) for x in cuts] for cuts in data], table)


def sorted_unique(values: Iterable[Scalar]) -> list[Scalar]:
    out = sorted(set(values), key=lambda s: _LexKey((s,)))
    return out


def grid_refine(p: RectPartition | Sequence[Rectangle], table: SymbolTable | None = None) -> GridPattern:
    """Coarsest grid-pattern refining a partition of the unit cube."""
    cells = p.cells if isinstance(p, RectPartition) else tuple(p)
    if not cells:
        raise ValueError("empty partition")
    table = table or cells[0].lo[0].table
    dim = cells[0].dim
    cube = unit_cube(table, dim)
    if isinstance(p, RectPartition) and not p.target.same_set(Multirectangle([cube])):
        raise ValueError("grid_refine needs a partition of the unit cube")
    one = table.rational(1)
    axes = []
    for i in range(dim):
        pts = {c.lo[i] for c in cells} | {c.hi[i] for c in cells}
        pts.discard(one)
        axes.append(sorted_unique(pts))
    return GridPattern(axes, table)


def _mergeable(a: Rectangle, b: Rectangle) -> int | None:
    """Axis along which ``a`` and ``b`` abut with identical other sides."""
    axis = None
    for k in range(a.dim):
        if a.lo[k] == b.lo[k] and a.hi[k] == b.hi[k]:
            continue
        if axis is not None:
            return None
        if a.hi[k] == b.lo[k] or b.hi[k] == a.lo[k]:
            axis = k
        else:
            return None
    return axis


def coalesce_boxes(boxes: Iterable[Rectangle]) -> list[Rectangle]:
    """Greedily merge pairs of boxes sharing a full facet until none remain."""
    boxes = list(boxes)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(boxes):
            j = i + 1
            while j < len(boxes):
                k = _mergeable(boxes[i], boxes[j])
                if k is not None:
                    a, b = boxes[i], boxes[j]
                    if a.hi[k] != b.lo[k]:
                        a, b = b, a
                    boxes[i] = a.with_side(k, a.lo[k], b.hi[k])
                    del boxes[j]
                    changed = True
                else:
                    j += 1
            i += 1
    return boxes
