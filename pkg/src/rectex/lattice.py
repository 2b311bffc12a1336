"""Fundamental multirectangle domains of lattices and the torus tensor volume.

A lattice is given by ``d`` Q-independent column vectors.  Lattice vectors
are ordered lexicographically by their real coordinates; the fundamental
domain inside a covering box ``R0`` keeps, from every orbit, the points with
no smaller representative in ``R0``.  All geometric checks are exact; floats
only bound the finite enumeration of candidate lattice vectors, which is then
filtered exactly.
"""

from __future__ import annotations

import itertools
import math
from itertools import permutations
from typing import Iterator, Sequence

from .geometry import Multirectangle, Rectangle
from .invariants import TensorValue, vol_tensor
from .scalar import Scalar, SymbolTable, compare, scalar_sign, sign_of_products

__all__ = [
    "Lattice",
    "LatticeError",
    "DomainCheck",
    "default_r0",
    "fundamental_domain",
    "check_domain",
    "torus_vol",
    "lattice_vectors_meeting",
]


class LatticeError(ValueError):
    """Singular basis, or a starting box that does not cover modulo the lattice."""


def _perm_parity(p: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class Lattice:
    """Lattice spanned by the columns of a ``d x d`` scalar matrix."""

    __slots__ = ("columns", "table")

    def __init__(self, columns: Sequence[Sequence[Scalar]], table: SymbolTable | None = None, check: bool = True):
        self.columns = tuple(tuple(c) for c in columns)
        if not self.columns:
            raise LatticeError("a lattice needs at least one generator")
        self.table = table if table is not None else self.columns[0][0].table
        if any(len(c) != len(self.columns) for c in self.columns):
            raise LatticeError("basis must be square")
        if check and self.det_sign() == 0:
            raise LatticeError("basis columns are linearly dependent")

    @property
    def dim(self) -> int:
        return len(self.columns)

    def entry(self, row: int, col: int) -> Scalar:
        return self.columns[col][row]

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.columns == other.columns

    def __hash__(self):
        return hash(self.columns)

    def __repr__(self):
        return f"Lattice({[list(map(str, c)) for c in self.columns]})"

    def det_sign(self) -> int:
        d = self.dim
        terms = []
        for p in permutations(range(d)):
            terms.append((_perm_parity(p), [self.entry(i, p[i]) for i in range(d)]))
        return sign_of_products(terms)

    def vector(self, n: Sequence[int]) -> tuple[Scalar, ...]:
        d = self.dim
        out = []
        for k in range(d):
            acc = self.table.zero()
            for j in range(d):
                if n[j]:
                    acc = acc + self.entry(k, j) * n[j]
            out.append(acc)
        return tuple(out)

    def _float_inverse(self) -> list[list[float]]:
        d = self.dim
        a = [[float(self.entry(i, j)) for j in range(d)] + [1.0 if i == k else 0.0 for k in range(d)] for i in range(d)]
        for c in range(d):
            p = max(range(c, d), key=lambda r: abs(a[r][c]))
            a[c], a[p] = a[p], a[c]
            piv = a[c][c]
            a[c] = [x / piv for x in a[c]]
            for r in range(d):
                if r != c and a[r][c]:
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        return [row[d:] for row in a]

    def to_json(self) -> dict:
        return {"dim": self.dim, "basis": [[s.to_json() for s in c] for c in self.columns]}

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "Lattice":
        cols = [[table.coerce(x) for x in c] for c in data["basis"]]
        if "dim" in data and data["dim"] != len(cols):
            raise LatticeError("dim does not match basis size")
        return cls(cols, table)


def _is_lex_positive(v: Sequence[Scalar]) -> bool:
    for x in v:
        s = scalar_sign(x)
        if s:
            return s > 0
    return False


def lattice_vectors_meeting(L: Lattice, A: Rectangle, B: Rectangle) -> Iterator[tuple[Scalar, ...]]:
    """Every lattice vector ``w`` with ``(A + w)`` meeting ``B``, exactly filtered."""
    d = L.dim
    # w lies in the open box (B.lo - A.hi, B.hi - A.lo); bound its integer coordinates
    wlo = [float(B.lo[k]) - float(A.hi[k]) for k in range(d)]
    whi = [float(B.hi[k]) - float(A.lo[k]) for k in range(d)]
    inv = L._float_inverse()
    ranges = []
    for j in range(d):
        lo = hi = 0.0
        for k in range(d):
            c = inv[j][k]
            a, b = c * wlo[k], c * whi[k]
            lo += min(a, b)
            hi += max(a, b)
        ranges.append(range(math.floor(lo) - 1, math.ceil(hi) + 2))
    for n in itertools.product(*ranges):
        w = L.vector(n)
        if A.translate(w).meets(B):
            yield w


def default_r0(L: Lattice) -> Rectangle:
    """Bounding box of the half-open fundamental parallelepiped, computed exactly.

    Row ``k`` spans ``[sum of negative entries, sum of positive entries)``;
    a row without positive entries gets the upper end ``-lo`` instead so the
    parallelepiped's boundary value 0 stays inside.
    """
    d = L.dim
    zero = L.table.zero()
    lo, hi = [], []
    for k in range(d):
        neg, pos = zero, zero
        for j in range(d):
            x = L.entry(k, j)
            if scalar_sign(x) < 0:
                neg = neg + x
            else:
                pos = pos + x
        if scalar_sign(pos) == 0:
            pos = -neg
        lo.append(neg)
        hi.append(pos)
    return Rectangle(lo, hi)


def _covers(L: Lattice, pieces: Sequence[Rectangle], target: Rectangle) -> bool:
    rest = Multirectangle([target], target.dim)
    for p in pieces:
        for w in lattice_vectors_meeting(L, p, target):
            rest = rest.subtract(p.translate(w))
            if rest.is_empty():
                return True
    return rest.is_empty()


def fundamental_domain(L: Lattice, r0: Rectangle | None = None) -> Multirectangle:
    """``M = R0 minus the union of (R0 + w)`` over lex-positive lattice vectors ``w``."""
    if L.det_sign() == 0:
        raise LatticeError("basis columns are linearly dependent")
    if r0 is None:
        r0 = default_r0(L)
    elif not _covers(L, [r0], default_r0(L)):
        raise LatticeError("starting box does not cover modulo the lattice")
    M = Multirectangle([r0], r0.dim)
    for w in lattice_vectors_meeting(L, r0, r0):
        if _is_lex_positive(w):
            M = M.subtract(r0.translate(w))
    return M


class DomainCheck:
    """Outcome of the exact disjointness and tiling witness checks."""

    __slots__ = ("disjoint", "tiles", "witnesses", "detail")

    def __init__(self, disjoint: bool, tiles: bool, witnesses: int, detail: str = ""):
        self.disjoint, self.tiles, self.witnesses, self.detail = disjoint, tiles, witnesses, detail

    def __bool__(self):
        return self.disjoint and self.tiles

    def __repr__(self):
        return f"DomainCheck(disjoint={self.disjoint}, tiles={self.tiles}, witnesses={self.witnesses})"


def check_domain(L: Lattice, M: Multirectangle, period_box: Rectangle | None = None) -> DomainCheck:
    """Verify that the translates of ``M`` are pairwise disjoint and tile a period box.

    Disjointness is tested against every nonzero lattice vector moving the
    bounding box of ``M`` onto itself partially; tiling asks that the
    translates meeting the period box cover it.
    """
    bb = M.bounding_box()
    count, detail = 0, ""
    disjoint = True
    for w in lattice_vectors_meeting(L, bb, bb):
        if all(scalar_sign(x) == 0 for x in w):
            continue
        count += 1
        if M.meets(M.translate(w)):
            disjoint, detail = False, f"M meets M + {[str(x) for x in w]}"
            break
    box = period_box if period_box is not None else default_r0(L)
    tiles = _covers(L, list(M), box)
    if not tiles and not detail:
        detail = "translates of M leave part of the period box uncovered"
    return DomainCheck(disjoint, tiles, count, detail)


def torus_vol(L: Lattice, r0: Rectangle | None = None) -> TensorValue:
    return vol_tensor(fundamental_domain(L, r0))
