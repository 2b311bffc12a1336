"""Rectangle exchange transformations and their flip-group relatives.

A :class:`RecMap` is stored as its ambient multirectangle plus a list of
pieces, each a half-open box translated by a fixed vector.  Composition
``compose(f, g)`` is ``f`` after ``g``.  Products of factor lists follow the
same convention: ``[L0, L1, L2]`` denotes ``L0 o L1 o L2``, so the last
factor acts first.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .geometry import (
    Multirectangle,
    Rectangle,
    coalesce_boxes,
    lex_key,
    unit_cube,
)
from .scalar import Scalar, SymbolTable, compare

__all__ = [
    "AmbientMismatch",
    "Piece",
    "RecMap",
    "Shuffle",
    "Transposition",
    "identity",
    "rec_validate",
    "rec_compose",
    "rec_inverse",
    "rec_equal",
    "mk_restricted_shuffle",
    "is_restricted_shuffle",
    "mk_transposition",
    "is_transposition",
    "mk_iet_lift",
    "support",
    "extend_ambient",
    "coalesce",
    "compose_all",
    "apply_left",
    "factor_to_recmap",
    "FlipPiece",
    "FlipMap",
    "flip_identity",
    "flip_reflection",
    "flip_from_recmap",
    "flip_validate",
    "flip_compose",
    "flip_inverse",
    "flip_equal",
    "flip_embed",
    "flip_unembed",
]


class AmbientMismatch(ValueError):
    pass


def _vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _vneg(u):
    return tuple(-a for a in u)


def _is_zero_vec(v) -> bool:
    return all(x.is_zero() for x in v)


@dataclass(frozen=True)
class Piece:
    domain: Rectangle
    shift: tuple

    @property
    def image(self) -> Rectangle:
        return self.domain.translate(self.shift)

    def is_fixed(self) -> bool:
        return _is_zero_vec(self.shift)


class RecMap:
    """Piecewise translation of a multirectangle onto itself."""

    __slots__ = ("ambient", "pieces", "table")

    def __init__(self, ambient: Multirectangle, pieces: Iterable[Piece], table: SymbolTable | None = None):
        self.ambient = ambient
        self.pieces = tuple(pieces)
        if table is None:
            src = self.pieces[0].domain if self.pieces else ambient.pieces[0]
            table = src.lo[0].table if src.dim else None
        self.table = table

    @property
    def dim(self) -> int:
        return self.ambient.dim

    def __repr__(self):
        return f"RecMap(dim={self.dim}, pieces={len(self.pieces)})"

    def __call__(self, x: Sequence[Scalar]) -> tuple:
        for p in self.pieces:
            if p.domain.contains_point(x):
                return _vadd(x, p.shift)
        raise ValueError("point outside the ambient multirectangle")

    def image_of(self, box: Rectangle) -> list[Rectangle]:
        """Image of a box, as the list of translated sub-boxes."""
        out = []
        for p in self.pieces:
            c = p.domain.intersect(box)
            if c is not None:
                out.append(c.translate(p.shift))
        return out

    def moved(self) -> list[Piece]:
        return [p for p in self.pieces if not p.is_fixed()]

    def validate(self) -> None:
        msg = rec_validate(self)
        if msg:
            raise ValueError(msg)
        return None

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "ambient": self.ambient.to_json(),
            "pieces": [
                {"rect": p.domain.to_json(), "shift": [s.to_json() for s in p.shift]}
                for p in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "RecMap":
        dim = int(data["dim"])
        ambient = Multirectangle.from_json(data["ambient"], table, dim=dim)
        pieces = [
            Piece(Rectangle.from_json(p["rect"], table), tuple(table.coerce(x) for x in p["shift"]))
            for p in data["pieces"]
        ]
        for p in pieces:
            if p.domain.dim != dim or len(p.shift) != dim:
                raise ValueError("piece dimension does not match the document")
        return cls(ambient, pieces, table)


def identity(ambient: Multirectangle | Rectangle | int, table: SymbolTable | None = None) -> RecMap:
    """Identity map; an integer argument means the unit cube of that dimension."""
    if isinstance(ambient, int):
        ambient = Multirectangle([unit_cube(table, ambient)])
    elif isinstance(ambient, Rectangle):
        ambient = Multirectangle([ambient])
    table = table or ambient.pieces[0].lo[0].table
    zero = table.zero()
    return RecMap(ambient, [Piece(r, (zero,) * ambient.dim) for r in ambient.pieces], table)


def _partition_report(boxes: Sequence[Rectangle], ambient: Multirectangle, what: str) -> str | None:
    from .invariants import vol_tensor

    for i, a in enumerate(boxes):
        for j in range(i + 1, len(boxes)):
            if a.meets(boxes[j]):
                return f"{what} of pieces {i} and {j} overlap"
    for i, a in enumerate(boxes):
        if not Multirectangle([a]).subtract(ambient).is_empty():
            return f"{what} of piece {i} leaves the ambient"
    # Disjoint boxes inside the ambient cover it iff the tensor volumes agree,
    # because a nonempty multirectangle has nonzero tensor volume.
    if vol_tensor(Multirectangle(boxes, dim=ambient.dim)) != vol_tensor(ambient):
        return f"{what} do not cover the ambient"
    return None


def rec_validate(f: RecMap) -> str | None:
    """None when ``f`` is a valid rectangle exchange, else a report of the first failure."""
    msg = f.ambient.overlap_report()
    if msg:
        return "ambient " + msg
    for i, p in enumerate(f.pieces):
        if p.domain.dim != f.dim or len(p.shift) != f.dim:
            return f"piece {i} has the wrong dimension"
    msg = _partition_report([p.domain for p in f.pieces], f.ambient, "domains")
    if msg:
        return msg
    return _partition_report([p.image for p in f.pieces], f.ambient, "images")


def _check_same_ambient(f, g):
    if f.ambient is g.ambient or f.ambient.pieces == g.ambient.pieces:
        return
    if not f.ambient.same_set(g.ambient):
        raise AmbientMismatch("maps act on different ambient multirectangles")


def rec_compose(f: RecMap, g: RecMap) -> RecMap:
    """``f o g``: first ``g``, then ``f``."""
    _check_same_ambient(f, g)
    out = []
    for q in g.pieces:
        img = q.image
        for p in f.pieces:
            c = img.intersect(p.domain)
            if c is None:
                continue
            out.append(Piece(c.translate(_vneg(q.shift)), _vadd(q.shift, p.shift)))
    return RecMap(g.ambient, out, g.table)


def rec_inverse(f: RecMap) -> RecMap:
    return RecMap(f.ambient, [Piece(p.image, _vneg(p.shift)) for p in f.pieces], f.table)


def rec_equal(f: RecMap, g: RecMap) -> bool:
    """Pointwise equality, independent of how the pieces are cut."""
    _check_same_ambient(f, g)
    for p in f.pieces:
        for q in g.pieces:
            if p.shift != q.shift and p.domain.meets(q.domain):
                return False
    return True


def support(f: RecMap) -> Multirectangle:
    return Multirectangle([p.domain for p in f.moved()], dim=f.dim)


def extend_ambient(f: RecMap, ambient: Multirectangle) -> RecMap:
    """Extend ``f`` by the identity to a larger ambient multirectangle."""
    if not ambient.contains(f.ambient):
        raise AmbientMismatch("new ambient does not contain the old one")
    zero = f.table.zero()
    extra = ambient.subtract(f.ambient)
    return RecMap(ambient, list(f.pieces) + [Piece(r, (zero,) * f.dim) for r in extra], f.table)


def coalesce(f: RecMap) -> RecMap:
    """Best-effort merge of equal-shift pieces sharing a facet."""
    groups: dict[tuple, list[Rectangle]] = {}
    for p in f.pieces:
        groups.setdefault(p.shift, []).append(p.domain)
    out = []
    for shift, boxes in groups.items():
        out.extend(Piece(b, shift) for b in coalesce_boxes(boxes))
    return RecMap(f.ambient, out, f.table)


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class Shuffle:
    """Restricted shuffle: on ``base x [p, p+a)`` (base spans the axes other
    than ``axis``, in order) translate by ``+b`` modulo ``a`` along ``axis``."""

    axis: int
    base: Rectangle
    p: Scalar
    a: Scalar
    b: Scalar

    def __post_init__(self):
        if compare(self.a.table.zero(), self.b) >= 0 or compare(self.b, self.a) >= 0:
            raise ValueError("shuffle offset must satisfy 0 < b < a")

    @property
    def dim(self) -> int:
        return self.base.dim + 1

    def box(self) -> Rectangle:
        return self.base.insert_axis(self.axis, self.p, self.p + self.a)

    def parts(self) -> tuple[tuple[Rectangle, tuple], tuple[Rectangle, tuple]]:
        """The two moved boxes with their shifts."""
        zero = self.a.table.zero()
        cut = self.p + self.a - self.b
        lower = self.base.insert_axis(self.axis, self.p, cut)
        upper = self.base.insert_axis(self.axis, cut, self.p + self.a)
        up = [zero] * self.dim
        down = [zero] * self.dim
        up[self.axis] = self.b
        down[self.axis] = self.b - self.a
        return (lower, tuple(up)), (upper, tuple(down))

    def inverse(self) -> "Shuffle":
        return Shuffle(self.axis, self.base, self.p, self.a, self.a - self.b)

    def to_recmap(self, ambient: Multirectangle | None = None) -> RecMap:
        return mk_restricted_shuffle(self.axis, self.base, self.p, self.a, self.b, ambient)

    def to_json(self) -> dict:
        return {
            "kind": "shuffle",
            "axis": self.axis,
            "base": self.base.to_json(),
            "interval": [self.p.to_json(), (self.p + self.a).to_json()],
            "offset": self.b.to_json(),
        }

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "Shuffle":
        lo, hi = (table.coerce(x) for x in data["interval"])
        base = Rectangle.from_json(data["base"], table)
        return cls(int(data["axis"]), base, lo, hi - lo, table.coerce(data["offset"]))


@dataclass(frozen=True)
class Transposition:
    """Swap of two disjoint translate boxes ``P`` and ``Q``."""

    P: Rectangle
    Q: Rectangle

    def __post_init__(self):
        if self.P.sides() != self.Q.sides():
            raise ValueError("transposed boxes must be translates of each other")
        if self.P.meets(self.Q):
            raise ValueError("transposed boxes must be disjoint")

    @property
    def dim(self) -> int:
        return self.P.dim

    def inverse(self) -> "Transposition":
        return self

    def to_recmap(self, ambient: Multirectangle | None = None) -> RecMap:
        return mk_transposition(self.P, self.Q, ambient)

    def to_json(self) -> dict:
        return {"kind": "transposition", "P": self.P.to_json(), "Q": self.Q.to_json()}

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "Transposition":
        return cls(Rectangle.from_json(data["P"], table), Rectangle.from_json(data["Q"], table))


def _cube_for(r: Rectangle) -> Multirectangle:
    return Multirectangle([unit_cube(r.lo[0].table, r.dim)])


def _with_complement(moved: list[tuple[Rectangle, tuple]], ambient: Multirectangle, table) -> RecMap:
    zero = (table.zero(),) * ambient.dim
    rest = ambient.subtract(Multirectangle([m for m, _ in moved], dim=ambient.dim))
    pieces = [Piece(r, s) for r, s in moved] + [Piece(r, zero) for r in rest]
    return RecMap(ambient, pieces, table)


def mk_restricted_shuffle(
    axis: int,
    base: Rectangle,
    p: Scalar,
    a: Scalar,
    b: Scalar,
    ambient: Multirectangle | None = None,
) -> RecMap:
    """Restricted shuffle in direction ``axis`` (0-based), identity off the box."""
    table = a.table
    if not 0 <= axis <= base.dim:
        raise ValueError(f"axis {axis} out of range")
    if compare(a, table.zero()) <= 0:
        raise ValueError("degenerate shuffle interval")
    sh = Shuffle(axis, base, p, a, b)
    box = sh.box()
    if ambient is None:
        ambient = _cube_for(box)
    if not ambient.contains(box):
        raise ValueError("shuffle box is not inside the ambient")
    return _with_complement(list(sh.parts()), ambient, table)


def is_restricted_shuffle(f: RecMap) -> Shuffle | None:
    """Recover the shuffle parameters of ``f``, or None if it is not a shuffle."""
    moved = f.moved()
    if not moved:
        return None
    shifts = {p.shift for p in moved}
    if len(shifts) != 2:
        return None
    axis = None
    for s in shifts:
        nz = [k for k, x in enumerate(s) if not x.is_zero()]
        if len(nz) != 1:
            return None
        if axis is None:
            axis = nz[0]
        elif axis != nz[0]:
            return None
    s1, s2 = sorted(shifts, key=lambda s: -s[axis].sign())
    b, neg = s1[axis], s2[axis]
    if b.sign() <= 0 or neg.sign() >= 0:
        return None
    a = b - neg
    up = Multirectangle([p.domain for p in moved if p.shift == s1], dim=f.dim)
    down = Multirectangle([p.domain for p in moved if p.shift == s2], dim=f.dim)
    box = Multirectangle(up.pieces + down.pieces, dim=f.dim).bounding_box()
    if compare(box.side(axis), a) != 0:
        return None
    base = box.drop_axis(axis)
    p0 = box.lo[axis]
    sh = Shuffle(axis, base, p0, a, b)
    (lo_box, _), (hi_box, _) = sh.parts()
    if not (up.same_set(Multirectangle([lo_box])) and down.same_set(Multirectangle([hi_box]))):
        return None
    return sh


def mk_transposition(P: Rectangle, Q: Rectangle, ambient: Multirectangle | None = None) -> RecMap:
    """Rectangle transposition swapping ``P`` and ``Q``."""
    Transposition(P, Q)
    ambient = ambient or _cube_for(P)
    if not (ambient.contains(P) and ambient.contains(Q)):
        raise ValueError("transposed boxes are not inside the ambient")
    v = tuple(b - a for a, b in zip(P.lo, Q.lo))
    return _with_complement([(P, v), (Q, _vneg(v))], ambient, P.lo[0].table)


def is_transposition(f: RecMap) -> Transposition | None:
    moved = f.moved()
    if not moved:
        return None
    shifts = {p.shift for p in moved}
    if len(shifts) != 2:
        return None
    v, w = shifts
    if _vadd(v, w) != tuple(x * 0 for x in v):
        return None
    m1 = Multirectangle([p.domain for p in moved if p.shift == v], dim=f.dim)
    m2 = Multirectangle([p.domain for p in moved if p.shift == w], dim=f.dim)
    if not (m1.is_box() and m2.is_box()):
        return None
    P, Q = m1.bounding_box(), m2.bounding_box()
    if lex_key(Q.lo) < lex_key(P.lo):
        P, Q = Q, P
    try:
        return Transposition(P, Q)
    except ValueError:
        return None


def mk_iet_lift(factors: Sequence[RecMap]) -> RecMap:
    """Coordinate-wise product of 1-dimensional maps of ``[0, 1)``."""
    if not factors:
        raise ValueError("need at least one factor")
    table = factors[0].table
    for k, g in enumerate(factors):
        if g.dim != 1:
            raise ValueError(f"factor {k} is not 1-dimensional")
        msg = rec_validate(g)
        if msg:
            raise ValueError(f"factor {k}: {msg}")
        if not g.ambient.same_set(Multirectangle([unit_cube(table, 1)])):
            raise ValueError(f"factor {k} does not act on [0, 1)")
    pieces = []
    for combo in product(*(g.pieces for g in factors)):
        dom = Rectangle([p.domain.lo[0] for p in combo], [p.domain.hi[0] for p in combo], check=False)
        pieces.append(Piece(dom, tuple(p.shift[0] for p in combo)))
    return RecMap(Multirectangle([unit_cube(table, len(factors))]), pieces, table)


def factor_to_recmap(factor, ambient: Multirectangle | None = None) -> RecMap:
    if isinstance(factor, RecMap):
        return factor
    return factor.to_recmap(ambient)


def _apply_moves_left(moves, g: RecMap) -> RecMap:
    """``h o g`` where ``h`` translates each box in ``moves`` and fixes the rest."""
    out = []
    for q in g.pieces:
        img = q.image
        hit = False
        for box, v in moves:
            if img.meets(box):
                hit = True
                break
        if not hit:
            out.append(q)
            continue
        rest = [img]
        for box, v in moves:
            c = img.intersect(box)
            if c is None:
                continue
            out.append(Piece(c.translate(_vneg(q.shift)), _vadd(q.shift, v)))
            rest = [r for x in rest for r in x.subtract(box)]
        out.extend(Piece(r.translate(_vneg(q.shift)), q.shift) for r in rest)
    return RecMap(g.ambient, out, g.table)


def compose_all(factors: Sequence, ambient: Multirectangle | None = None, table: SymbolTable | None = None) -> RecMap:
    """Product ``L0 o L1 o ... o Ln`` of shuffles, transpositions or RecMaps."""
    if ambient is None:
        if not factors:
            raise ValueError("empty product needs an ambient")
        first = factors[0]
        if isinstance(first, RecMap):
            ambient = first.ambient
        elif isinstance(first, Shuffle):
            ambient = _cube_for(first.box())
        else:
            ambient = _cube_for(first.P)
    table = table or ambient.pieces[0].lo[0].table
    acc = identity(ambient, table)
    for fac in reversed(factors):
        acc = apply_left(fac, acc)
        if len(acc.pieces) > 8:
            acc = coalesce(acc)
    return acc


def apply_left(factor, g: RecMap) -> RecMap:
    """``factor o g`` for a shuffle, transposition or RecMap ``factor``."""
    if isinstance(factor, Shuffle):
        return _apply_moves_left(factor.parts(), g)
    if isinstance(factor, Transposition):
        v = tuple(b - a for a, b in zip(factor.P.lo, factor.Q.lo))
        return _apply_moves_left([(factor.P, v), (factor.Q, _vneg(v))], g)
    if factor.ambient == g.ambient:
        return _apply_moves_left([(p.domain, p.shift) for p in factor.pieces if any(p.shift)], g)
    return rec_compose(factor, g)


# ---------------------------------------------------------------- flip maps


@dataclass(frozen=True)
class FlipPiece:
    domain: Rectangle
    signs: tuple
    shift: tuple

    @property
    def image(self) -> Rectangle:
        return _flip_box(self.domain, self.signs, self.shift)


def _flip_box(box: Rectangle, signs, shift) -> Rectangle:
    lo, hi = [], []
    for a, b, s, v in zip(box.lo, box.hi, signs, shift):
        if s > 0:
            lo.append(a + v)
            hi.append(b + v)
        else:
            lo.append(v - b)
            hi.append(v - a)
    return Rectangle(lo, hi, check=False)


class FlipMap:
    """Piecewise map ``x -> signs * x + shift``, defined up to hyperplanes.

    Every piece is kept as a left-closed half-open box, and images are
    normalised to left-closed boxes as well.
    """

    __slots__ = ("ambient", "pieces", "table")

    def __init__(self, ambient: Multirectangle, pieces: Iterable[FlipPiece], table: SymbolTable | None = None):
        self.ambient = ambient
        self.pieces = tuple(pieces)
        self.table = table or ambient.pieces[0].lo[0].table

    @property
    def dim(self) -> int:
        return self.ambient.dim

    def __repr__(self):
        return f"FlipMap(dim={self.dim}, pieces={len(self.pieces)})"

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "ambient": self.ambient.to_json(),
            "pieces": [
                {
                    "rect": p.domain.to_json(),
                    "signs": list(p.signs),
                    "shift": [s.to_json() for s in p.shift],
                }
                for p in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "FlipMap":
        dim = int(data["dim"])
        ambient = Multirectangle.from_json(data["ambient"], table, dim=dim)
        pieces = []
        for p in data["pieces"]:
            signs = tuple(int(s) for s in p["signs"])
            if any(s not in (1, -1) for s in signs) or len(signs) != dim:
                raise ValueError("signs must be a vector of +1/-1")
            pieces.append(
                FlipPiece(Rectangle.from_json(p["rect"], table), signs, tuple(table.coerce(x) for x in p["shift"]))
            )
        return cls(ambient, pieces, table)


def flip_identity(ambient: Multirectangle | int, table: SymbolTable | None = None) -> FlipMap:
    return flip_from_recmap(identity(ambient, table))


def flip_from_recmap(f: RecMap) -> FlipMap:
    ones = (1,) * f.dim
    return FlipMap(f.ambient, [FlipPiece(p.domain, ones, p.shift) for p in f.pieces], f.table)


def flip_reflection(box: Rectangle, axis: int, ambient: Multirectangle | None = None) -> FlipMap:
    """Reflect ``box`` onto itself along ``axis``; identity elsewhere."""
    table = box.lo[0].table
    ambient = ambient or _cube_for(box)
    zero = table.zero()
    signs = tuple(-1 if k == axis else 1 for k in range(box.dim))
    shift = tuple(box.lo[k] + box.hi[k] if k == axis else zero for k in range(box.dim))
    rest = ambient.subtract(box)
    pieces = [FlipPiece(box, signs, shift)] + [FlipPiece(r, (1,) * box.dim, (zero,) * box.dim) for r in rest]
    return FlipMap(ambient, pieces, table)


def flip_validate(F: FlipMap) -> str | None:
    msg = F.ambient.overlap_report()
    if msg:
        return "ambient " + msg
    for i, p in enumerate(F.pieces):
        if len(p.signs) != F.dim or any(s not in (1, -1) for s in p.signs):
            return f"piece {i} has an invalid sign vector"
    msg = _partition_report([p.domain for p in F.pieces], F.ambient, "domains")
    if msg:
        return msg
    return _partition_report([p.image for p in F.pieces], F.ambient, "images")


def _flip_preimage(p: FlipPiece, c: Rectangle) -> Rectangle:
    lo, hi = [], []
    for a, b, s, v in zip(c.lo, c.hi, p.signs, p.shift):
        if s > 0:
            lo.append(a - v)
            hi.append(b - v)
        else:
            lo.append(v - b)
            hi.append(v - a)
    return Rectangle(lo, hi, check=False)


def flip_compose(F: FlipMap, G: FlipMap) -> FlipMap:
    """``F o G`` on left-closed representatives."""
    _check_same_ambient(F, G)
    out = []
    for q in G.pieces:
        img = q.image
        for p in F.pieces:
            c = img.intersect(p.domain)
            if c is None:
                continue
            signs = tuple(s * t for s, t in zip(p.signs, q.signs))
            shift = tuple((v if s > 0 else -v) + w for s, v, w in zip(p.signs, q.shift, p.shift))
            out.append(FlipPiece(_flip_preimage(q, c), signs, shift))
    return FlipMap(G.ambient, out, G.table)


def flip_inverse(F: FlipMap) -> FlipMap:
    out = []
    for p in F.pieces:
        shift = tuple(-v if s > 0 else v for s, v in zip(p.signs, p.shift))
        out.append(FlipPiece(p.image, p.signs, shift))
    return FlipMap(F.ambient, out, F.table)


def flip_equal(F: FlipMap, G: FlipMap) -> bool:
    _check_same_ambient(F, G)
    for p in F.pieces:
        for q in G.pieces:
            if (p.signs != q.signs or p.shift != q.shift) and p.domain.meets(q.domain):
                return False
    return True


def _orthants(dim: int):
    return list(product((1, -1), repeat=dim))


def _signed_box(box: Rectangle, t) -> Rectangle:
    zero = box.lo[0].table.zero()
    return _flip_box(box, t, (zero,) * box.dim)


def flip_embed(F: FlipMap) -> RecMap:
    """Embed a flip map of ``[0,1)^d`` as a sign-equivariant RecMap of ``[-1,1)^d``."""
    table = F.table
    cube = unit_cube(table, F.dim)
    if not F.ambient.same_set(Multirectangle([cube])):
        raise ValueError("flip_embed expects a flip map of the unit cube")
    big = Rectangle([table.rational(-1)] * F.dim, [table.rational(1)] * F.dim)
    pieces = []
    for t in _orthants(F.dim):
        for p in F.pieces:
            shift = tuple(v if s * u > 0 else -v for s, u, v in zip(p.signs, t, p.shift))
            pieces.append(Piece(_signed_box(p.domain, t), shift))
    return RecMap(Multirectangle([big]), pieces, table)


def _orthant_split(box: Rectangle) -> list[tuple[Rectangle, tuple]]:
    """Split a box of ``[-1,1)^d`` by coordinate sign; returns (part, sign vector)."""
    zero = box.lo[0].table.zero()
    parts = [(box, ())]
    for k in range(box.dim):
        nxt = []
        for r, t in parts:
            if compare(r.lo[k], zero) >= 0:
                nxt.append((r, t + (1,)))
            elif compare(r.hi[k], zero) <= 0:
                nxt.append((r, t + (-1,)))
            else:
                nxt.append((r.with_side(k, r.lo[k], zero), t + (-1,)))
                nxt.append((r.with_side(k, zero, r.hi[k]), t + (1,)))
        parts = nxt
    return parts


def _centralizes_signs(g: RecMap) -> bool:
    for t in _orthants(g.dim):
        refl = RecMap(
            g.ambient,
            [Piece(_signed_box(p.domain, t), tuple(v if u > 0 else -v for u, v in zip(t, p.shift))) for p in g.pieces],
            g.table,
        )
        if not rec_equal(refl, g):
            return False
    return True


def flip_unembed(g: RecMap) -> FlipMap:
    """Inverse of :func:`flip_embed` on RecMaps commuting with all sign changes."""
    table = g.table
    big = Rectangle([table.rational(-1)] * g.dim, [table.rational(1)] * g.dim)
    if not g.ambient.same_set(Multirectangle([big])):
        raise ValueError("flip_unembed expects a map of [-1, 1)^d")
    if not _centralizes_signs(g):
        raise ValueError("map does not commute with the coordinate sign changes")
    cube = unit_cube(table, g.dim)
    pieces = []
    for p in g.pieces:
        d = p.domain.intersect(cube)
        if d is None:
            continue
        for part, t in _orthant_split(d.translate(p.shift)):
            dom = part.translate(_vneg(p.shift))
            pieces.append(FlipPiece(dom, t, tuple(v if u > 0 else -v for u, v in zip(t, p.shift))))
    return FlipMap(Multirectangle([cube]), pieces, table)
