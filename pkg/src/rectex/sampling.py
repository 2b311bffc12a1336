"""Seeded random elements for tests, experiments and the ``random`` command.

Everything is built on a random setwise Q-free grid of the unit cube whose
per-axis interval lengths are ``x/m`` and ``(1-x)/n`` for an irrational
``x``.  Random products of cut-aligned shuffles, transpositions of equal grid
cells and grid-permuting interval exchanges are accumulated while the
coalesced piece count stays within the requested bound.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .geometry import GridPattern, Multirectangle, Rectangle, unit_cube
from .recmap import (
    FlipMap,
    Piece,
    RecMap,
    Shuffle,
    Transposition,
    apply_left,
    coalesce,
    flip_compose,
    flip_from_recmap,
    flip_reflection,
    identity,
    mk_iet_lift,
    mk_transposition,
    rec_compose,
    rec_inverse,
)
from .scalar import SQRT, SymbolTable

__all__ = [
    "random_qfree_grid",
    "random_generator",
    "random_recmap",
    "random_commutator",
    "random_involution",
    "random_flipmap",
]

_MULTIPLIERS = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1), Fraction(3, 4), Fraction(2, 5)]


def _irrational_fraction(rng: random.Random, table: SymbolTable):
    """A scalar strictly between 0 and 1 with nonzero irrational part, if possible."""
    roots = [s.name for s in table.symbols if s.kind == SQRT]
    if not roots:
        return None
    name = rng.choice(roots)
    q = rng.choice(_MULTIPLIERS)
    x = table.symbol(name, q)
    return x - x.floor()


def random_qfree_grid(rng: random.Random, table: SymbolTable, dim: int) -> GridPattern:
    axes = []
    for _ in range(dim):
        x = _irrational_fraction(rng, table)
        if x is None:
            n = rng.choice([1, 2, 3])
            lengths = [table.rational(Fraction(1, n))] * n
        else:
            m, n = rng.choice([1, 2]), rng.choice([1, 2])
            lengths = [x / m] * m + [(1 - x) / n] * n
            rng.shuffle(lengths)
        cuts = [table.zero()]
        for ell in lengths[:-1]:
            cuts.append(cuts[-1] + ell)
        axes.append(cuts)
    return GridPattern(axes, table)


def _points(grid: GridPattern, axis: int) -> list:
    return list(grid.axes[axis]) + [grid.table.rational(1)]


def _random_box(rng: random.Random, grid: GridPattern, axes: Sequence[int]) -> Rectangle:
    lo, hi = [], []
    for i in axes:
        pts = _points(grid, i)
        a, b = sorted(rng.sample(range(len(pts)), 2))
        lo.append(pts[a])
        hi.append(pts[b])
    return Rectangle(lo, hi)


def _iet_on_grid(rng: random.Random, grid: GridPattern, axis: int) -> RecMap:
    table = grid.table
    ivs = grid.intervals(axis)
    order = list(range(len(ivs)))
    rng.shuffle(order)
    pieces, pos = [], table.zero()
    for j in order:
        a, b = ivs[j]
        pieces.append(Piece(Rectangle([a], [b]), (pos - a,)))
        pos = pos + (b - a)
    return RecMap(Multirectangle([unit_cube(table, 1)]), pieces, table)


def random_generator(rng: random.Random, grid: GridPattern) -> Shuffle | Transposition | RecMap | None:
    """One random shuffle, transposition or grid interval exchange (None if unavailable)."""
    d = grid.dim
    table = grid.table
    kind = rng.choice(["shuffle", "shuffle", "transposition", "iet"])
    if kind == "shuffle":
        axis = rng.randrange(d)
        pts = _points(grid, axis)
        if len(pts) < 3:
            return None
        i0, j, i1 = sorted(rng.sample(range(len(pts)), 3))
        others = [k for k in range(d) if k != axis]
        base = _random_box(rng, grid, others) if others else Rectangle((), ())
        return Shuffle(axis, base, pts[i0], pts[i1] - pts[i0], pts[i1] - pts[j])
    if kind == "transposition":
        cells = grid.cells()
        rng.shuffle(cells)
        for P in cells:
            for Q in cells:
                if Q is not P and Q.sides() == P.sides():
                    return Transposition(P, Q)
        return None
    factors = [
        _iet_on_grid(rng, grid, i) if rng.random() < 0.6 else identity(1, table) for i in range(d)
    ]
    return mk_iet_lift(factors)


def random_recmap(dim: int, pieces: int, seed: int, symbols: str | SymbolTable = "sqrt2", steps: int | None = None) -> RecMap:
    """Deterministic random element of the unit cube with at most ``pieces`` pieces."""
    if pieces < 1:
        raise ValueError("pieces must be at least 1")
    table = symbols if isinstance(symbols, SymbolTable) else SymbolTable.from_spec(symbols)
    rng = random.Random(seed)
    grid = random_qfree_grid(rng, table, dim)
    acc = identity(dim, table)
    steps = steps if steps is not None else pieces + 4
    for _ in range(steps):
        g = random_generator(rng, grid)
        if g is None:
            continue
        cand = coalesce(apply_left(g, acc))
        if len(cand.pieces) <= pieces:
            acc = cand
    return acc


def random_commutator(dim: int, pieces: int, seed: int, symbols: str | SymbolTable = "sqrt2") -> RecMap:
    """``[g, h] = g h g^-1 h^-1`` for two random elements."""
    g = random_recmap(dim, pieces, seed, symbols)
    h = random_recmap(dim, pieces, seed + 7919, g.table)
    return coalesce(rec_compose(rec_compose(g, h), rec_compose(rec_inverse(g), rec_inverse(h))))


def random_involution(dim: int, seed: int, symbols: str | SymbolTable = "sqrt2", swaps: int = 3) -> RecMap:
    """Product of transpositions of disjoint equal-shape grid cells, conjugated by a random element."""
    table = symbols if isinstance(symbols, SymbolTable) else SymbolTable.from_spec(symbols)
    rng = random.Random(seed)
    grid = random_qfree_grid(rng, table, dim)
    cells = grid.cells()
    rng.shuffle(cells)
    used: set = set()
    acc = identity(dim, table)
    for P in cells:
        if len(used) >= 2 * swaps:
            break
        if P in used:
            continue
        for Q in cells:
            if Q is not P and Q not in used and Q.sides() == P.sides():
                acc = rec_compose(mk_transposition(P, Q), acc)
                used.update((P, Q))
                break
    h = random_recmap(dim, 4, seed + 1, table)
    return coalesce(rec_compose(rec_compose(h, acc), rec_inverse(h)))


def random_flipmap(dim: int, seed: int, symbols: str | SymbolTable = "sqrt2", pieces: int = 4) -> FlipMap:
    """A random RecMap composed with reflections of random grid boxes."""
    table = symbols if isinstance(symbols, SymbolTable) else SymbolTable.from_spec(symbols)
    rng = random.Random(seed)
    f = flip_from_recmap(random_recmap(dim, pieces, seed, table))
    grid = random_qfree_grid(rng, table, dim)
    for _ in range(rng.randint(1, 2)):
        box = _random_box(rng, grid, range(dim))
        f = flip_compose(flip_reflection(box, rng.randrange(dim)), f)
    return f
