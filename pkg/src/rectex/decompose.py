"""Constructive factorizations into restricted shuffles and transpositions.

Every returned factor list is in composition order: ``[L0, L1, ..., Ln]``
stands for ``L0 o L1 o ... o Ln``, so ``Ln`` acts first.

The main entry point :func:`decompose_shuffles` works on the unit cube.  It
cuts the cube into a setwise Q-free grid adapted to the map, looks at the
image partition, and then repeatedly moves whole towers horizontally (below
the current working height) until every cell sits in a tower standing on the
floor.  Towers are then sorted vertically, their bases are straightened
recursively one dimension down, and what is left maps a grid onto a grid,
which is factored axis by axis and then as a permutation of equal cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .geometry import GridPattern, Multirectangle, Rectangle, RectPartition, grid_refine, lex_key, unit_cube
from .qfree import is_setwise_qfree, refine_grid_qfree
from .recmap import (
    Piece,
    RecMap,
    Shuffle,
    Transposition,
    identity,
    is_transposition,
    rec_compose,
    rec_equal,
)
from .scalar import Scalar, SymbolTable, compare

__all__ = [
    "CityAnalysis",
    "DecomposeStats",
    "NotAnInvolution",
    "analyze_partition",
    "decompose_involution",
    "transposition_to_shuffles",
    "grid_to_grid_decompose",
    "decompose_shuffles",
    "reduce_to_grid",
    "iet_shuffles",
]


class NotAnInvolution(ValueError):
    pass


@dataclass
class DecomposeStats:
    """Bookkeeping gathered while decomposing; useful for audits and tests."""

    complexity_traces: list = field(default_factory=list)
    collisions: int = 0
    deltas: int = 0
    factors: int = 0

    def traces_decrease(self) -> bool:
        return all(all(a > b for a, b in zip(t, t[1:])) for t in self.complexity_traces)


# ------------------------------------------------------------ analysis


def _base(cell: Rectangle) -> Rectangle:
    return cell.drop_axis(cell.dim - 1)


@dataclass
class CityAnalysis:
    cells: list
    ground: list
    towers: dict  # ground cell index -> cell indices bottom to top
    city: set
    sky: set
    complexity: list  # sorted distinct bottoms of sky cells
    working_height: Scalar | None
    work_minus: list
    work_plus: list
    site: Multirectangle | None

    def tops(self) -> dict:
        return {g: t[-1] for g, t in self.towers.items()}


def analyze_partition(P, check: bool = True) -> CityAnalysis:
    """Ground, highest towers, city, sky, complexity and work sites of a partition."""
    if isinstance(P, GridPattern):
        cells = P.cells()
    elif isinstance(P, RectPartition):
        cells = list(P.cells)
    else:
        cells = list(P)
    if check and not is_setwise_qfree(cells):
        raise ValueError("partition is not setwise Q-free")
    d = cells[0].dim
    top = d - 1
    zero = cells[0].lo[0].table.zero()
    at = {}
    for k, c in enumerate(cells):
        at[(_base(c), c.lo[top])] = k
    ground = [k for k, c in enumerate(cells) if c.lo[top] == zero]
    towers = {}
    city = set()
    for g in ground:
        b = _base(cells[g])
        tower = [g]
        while True:
            nxt = at.get((b, cells[tower[-1]].hi[top]))
            if nxt is None:
                break
            tower.append(nxt)
        towers[g] = tower
        city.update(tower)
    sky = set(range(len(cells))) - city
    heights = {cells[k].lo[top] for k in sky}
    complexity = sorted(heights, key=lambda s: lex_key((s,)))
    whei = complexity[0] if complexity else None
    work_minus, work_plus, site = [], [], None
    if whei is not None:
        work_minus = [t[-1] for t in towers.values() if cells[t[-1]].hi[top] == whei]
        work_plus = sorted(k for k in sky if cells[k].lo[top] == whei)
        if d > 1:
            site = Multirectangle([_base(cells[k]) for k in work_minus], dim=d - 1)
    return CityAnalysis(cells, ground, towers, city, sky, complexity, whei, work_minus, work_plus, site)


# ------------------------------------------------------------ one-dimensional


def iet_shuffles(order: Sequence, lengths: dict, target: Sequence, start: Scalar, axis: int, base: Rectangle) -> list[Shuffle]:
    """Rotations rearranging consecutive intervals; returned in application order.

    ``order`` and ``target`` list the labels of consecutive intervals
    beginning at ``start``; ``lengths`` gives each label's length.  Each step
    rotates a block so that the next target label moves to the front, which
    is a single restricted rotation.
    """
    cur = list(order)
    applied = []
    pos = start
    for t, lab in enumerate(target):
        j = cur.index(lab, t)
        if j > t:
            span = lengths[cur[t]]
            for k in range(t + 1, j + 1):
                span = span + lengths[cur[k]]
            applied.append(Shuffle(axis, base, pos, span, lengths[lab]))
            cur.insert(t, cur.pop(j))
        pos = pos + lengths[lab]
    return applied


def _decompose_iet(f: RecMap) -> list[Shuffle]:
    pieces = sorted(f.pieces, key=lambda p: lex_key(p.domain.lo))
    labels = list(range(len(pieces)))
    lengths = {i: p.domain.side(0) for i, p in enumerate(pieces)}
    target = sorted(labels, key=lambda i: lex_key(pieces[i].image.lo))
    zero = f.table.zero()
    applied = iet_shuffles(labels, lengths, target, zero, 0, Rectangle((), (), check=False))
    return list(reversed(applied))


# ------------------------------------------------------------ transpositions


def _aligned_pair(P: Rectangle, Q: Rectangle, axis: int) -> list[Shuffle]:
    """Shuffles whose product swaps boxes differing only along ``axis``."""
    if compare(Q.lo[axis], P.lo[axis]) < 0:
        P, Q = Q, P
    a, b = P.lo[axis], P.hi[axis]
    a2, b2 = Q.lo[axis], Q.hi[axis]
    base = P.drop_axis(axis)
    r1 = Shuffle(axis, base, a, b2 - a, b2 - b)
    if a2 == b:
        return [r1]
    r2 = Shuffle(axis, base, a, a2 - a, a2 - b)
    return [r2.inverse(), r1]


def _split_half(P: Rectangle, Q: Rectangle, axis: int):
    mid_p = P.lo[axis] + P.side(axis) / 2
    mid_q = Q.lo[axis] + Q.side(axis) / 2
    return (
        (P.with_side(axis, P.lo[axis], mid_p), Q.with_side(axis, Q.lo[axis], mid_q)),
        (P.with_side(axis, mid_p, P.hi[axis]), Q.with_side(axis, mid_q, Q.hi[axis])),
    )


def transposition_to_shuffles(tau, stats: DecomposeStats | None = None) -> list[Shuffle]:
    """Restricted shuffles whose product is the transposition ``tau``.

    Accepts a :class:`Transposition` or a RecMap recognised as one.  Boxes are
    moved one coordinate at a time through intermediate boxes; if some
    coordinate projections overlap without being equal, the pair is first
    halved along that coordinate until the projections separate.
    """
    if isinstance(tau, RecMap):
        t = is_transposition(tau)
        if t is None:
            raise ValueError("map is not a rectangle transposition")
        tau = t
    P, Q = tau.P, tau.Q
    d = P.dim
    collide = [
        k for k in range(d)
        if P.lo[k] != Q.lo[k] and compare(P.lo[k], Q.hi[k]) < 0 and compare(Q.lo[k], P.hi[k]) < 0
    ]
    if collide:
        if stats is not None:
            stats.collisions += 1
        k = collide[0]
        (p1, q1), (p2, q2) = _split_half(P, Q, k)
        return transposition_to_shuffles(Transposition(p1, q1), stats) + transposition_to_shuffles(
            Transposition(p2, q2), stats
        )
    active = [k for k in range(d) if P.lo[k] != Q.lo[k]]
    chain = [P]
    cur = P
    for k in active:
        cur = cur.with_side(k, Q.lo[k], Q.hi[k])
        chain.append(cur)
    steps = [_aligned_pair(chain[j], chain[j + 1], k) for j, k in enumerate(active)]
    out = []
    for s in steps:
        out.extend(s)
    for s in reversed(steps[:-1]):
        out.extend(s)
    return out


def decompose_involution(f: RecMap) -> list[Transposition]:
    """Transpositions with pairwise disjoint supports whose product is ``f``."""
    if not rec_equal(rec_compose(f, f), identity(f.ambient, f.table)):
        raise NotAnInvolution("map is not an involution")
    out = []
    for p in f.moved():
        first = next(x for x in p.shift if not x.is_zero())
        if first.sign() > 0:
            out.append(Transposition(p.domain, p.image))
    return out


# ------------------------------------------------------------ grid to grid


def _cell_index(grid_cuts: list[dict], cell: Rectangle) -> tuple:
    return tuple(grid_cuts[i][cell.lo[i]] for i in range(cell.dim))


def _shift_lookup(f: RecMap):
    """Function giving the translation applied to a box lying inside one piece."""
    exact = {p.domain: p.shift for p in f.pieces}

    def shift_of(cell: Rectangle) -> tuple:
        v = exact.get(cell)
        if v is not None:
            return v
        for p in f.pieces:
            if not p.domain.far_from(cell) and p.domain.contains(cell):
                return p.shift
        raise ValueError("cell is not inside a single piece of the map")

    return shift_of


def grid_to_grid_decompose(f: RecMap, Q: GridPattern, stats: DecomposeStats | None = None) -> list[Shuffle]:
    """Factor a map sending the setwise Q-free grid ``Q`` onto a grid."""
    if not is_setwise_qfree(Q):
        raise ValueError("grid is not setwise Q-free")
    d = Q.dim
    table = Q.table
    cells = Q.cells()
    shift_of = _shift_lookup(f)
    images = [c.translate(shift_of(c)) for c in cells]
    Qp = grid_refine(images, table)
    if len(Qp.cells()) != len(cells):
        raise ValueError("image of the grid is not a grid")
    cube = unit_cube(table, d)
    factors: list[Shuffle] = []
    to_q: list[dict] = []  # per axis: index in Q' -> index in Q
    for i in range(d):
        src = Q.intervals(i)
        dst = Qp.intervals(i)
        pools: dict[Scalar, list[int]] = {}
        for j, (a, b) in enumerate(src):
            pools.setdefault(b - a, []).append(j)
        match = {}
        for j, (a, b) in enumerate(dst):
            pool = pools.get(b - a)
            if not pool:
                raise ValueError(f"axis {i}: interval lengths of the grids differ")
            match[j] = pool.pop(0)
        to_q.append(match)
        # g^-1 on this axis sends Q-interval match[j] onto Q'-interval j.
        labels = list(range(len(src)))
        lengths = {j: b - a for j, (a, b) in enumerate(src)}
        inv = {v: k for k, v in match.items()}
        target = sorted(labels, key=lambda j: inv[j])
        base = cube.drop_axis(i)
        applied = iet_shuffles(labels, lengths, target, table.zero(), i, base)
        factors.extend(reversed(applied))
    q_cuts = [{a: j for j, (a, _) in enumerate(Q.intervals(i))} for i in range(d)]
    qp_cuts = [{a: j for j, (a, _) in enumerate(Qp.intervals(i))} for i in range(d)]
    by_index = {_cell_index(q_cuts, c): c for c in cells}
    perm = {}
    for c, im in zip(cells, images):
        jp = _cell_index(qp_cuts, im)
        perm[_cell_index(q_cuts, c)] = tuple(to_q[i][jp[i]] for i in range(d))
    seen = set()
    for start in sorted(perm):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cycle = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            cycle.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        for a, b in zip(cycle, cycle[1:]):
            factors.extend(transposition_to_shuffles(Transposition(by_index[a], by_index[b]), stats))
    return factors


# ------------------------------------------------------------ towers and cities


def _lift(sh: Shuffle, lo: Scalar, hi: Scalar) -> Shuffle:
    base = Rectangle(sh.base.lo + (lo,), sh.base.hi + (hi,), check=False)
    return Shuffle(sh.axis, base, sh.p, sh.a, sh.b)


def _build_delta(an: CityAnalysis, table: SymbolTable, d: int) -> RecMap:
    """Horizontal map sending the bases of worksite tops onto the upper worksite."""
    cells = an.cells
    zero = (table.zero(),) * (d - 1)
    minus = [_base(cells[k]) for k in an.work_minus]
    plus = [_base(cells[k]) for k in an.work_plus]
    plus_set, minus_set = set(plus), set(minus)
    only_minus = [b for b in minus if b not in plus_set]
    only_plus = [b for b in plus if b not in minus_set]
    groups_m: dict[tuple, list[Rectangle]] = {}
    groups_p: dict[tuple, list[Rectangle]] = {}
    for b in only_minus:
        groups_m.setdefault(b.sides(), []).append(b)
    for b in only_plus:
        groups_p.setdefault(b.sides(), []).append(b)
    shift_of = {}
    for shape, lm in groups_m.items():
        lp = groups_p.get(shape, [])
        if len(lp) != len(lm):
            raise AssertionError("worksite bases do not match shape for shape")
        lm = sorted(lm, key=lambda r: lex_key(r.lo))
        lp = sorted(lp, key=lambda r: lex_key(r.lo))
        for x, y in zip(lm, lp):
            shift_of[x] = tuple(b - a for a, b in zip(x.lo, y.lo))
    if sum(len(v) for v in groups_p.values()) != len(shift_of):
        raise AssertionError("worksite bases do not match shape for shape")
    pieces = []
    for g in an.ground:
        b = _base(cells[g])
        pieces.append(Piece(b, shift_of.get(b, zero)))
    return RecMap(Multirectangle([unit_cube(table, d - 1)]), pieces, table)


def _vertical_pattern(cells, an: CityAnalysis, top: int) -> list:
    """Most common vertical length sequence among the towers (ties: first seen)."""
    counts: dict[tuple, int] = {}
    for tower in an.towers.values():
        seq = tuple(cells[k].side(top) for k in tower)
        counts[seq] = counts.get(seq, 0) + 1
    return list(max(counts, key=lambda s: counts[s]))


def _straighten(cells: list[Rectangle], table: SymbolTable, stats: DecomposeStats) -> tuple[list[Shuffle], list[Rectangle]]:
    """Shuffles (in application order) moving each cell rigidly so the result is a grid."""
    d = cells[0].dim
    if d == 1:
        return [], list(cells)
    cells = list(cells)
    top = d - 1
    zero = table.zero()
    applied: list[Shuffle] = []
    trace = []
    while True:
        an = analyze_partition(cells, check=False)
        trace.append(len(an.complexity))
        if len(trace) > 1 and trace[-1] >= trace[-2]:
            stats.complexity_traces.append(trace)
            raise AssertionError(f"complexity did not decrease: {trace}")
        if not an.complexity:
            break
        delta = _build_delta(an, table, d)
        stats.deltas += 1
        facs = decompose_shuffles(delta, stats)
        whei = an.working_height
        applied.extend(_lift(s, zero, whei) for s in reversed(facs))
        moves = {p.domain: p.shift for p in delta.pieces if not p.is_fixed()}
        for g, tower in an.towers.items():
            v = moves.get(_base(cells[g]))
            if v is None:
                continue
            full = v + (zero,)
            for k in tower:
                cells[k] = cells[k].translate(full)
    stats.complexity_traces.append(trace)
    an = analyze_partition(cells, check=False)
    # Rearrange every tower to follow one common vertical pattern.
    pattern = _vertical_pattern(cells, an, top)
    for g, tower in an.towers.items():
        lengths = {k: cells[k].side(top) for k in tower}
        pools: dict[Scalar, list[int]] = {}
        for k in tower:
            pools.setdefault(lengths[k], []).append(k)
        target = [pools[ell].pop(0) for ell in pattern]
        base = _base(cells[g])
        moves = iet_shuffles(tower, lengths, target, zero, top, base)
        applied.extend(moves)
        pos = zero
        for k in target:
            c = cells[k]
            cells[k] = c.with_side(top, pos, pos + lengths[k])
            pos = pos + lengths[k]
    # Straighten the floor plan one dimension down.
    if d > 2:
        grounds = list(an.towers)
        bases = [_base(cells[g]) for g in grounds]
        sub_applied, sub_final = _straighten(bases, table, stats)
        one = table.rational(1)
        applied.extend(_lift(s, zero, one) for s in sub_applied)
        for g, old, new in zip(grounds, bases, sub_final):
            v = tuple(b - a for a, b in zip(old.lo, new.lo)) + (zero,)
            if all(x.is_zero() for x in v):
                continue
            for k in an.towers[g]:
                cells[k] = cells[k].translate(v)
    return applied, cells


def reduce_to_grid(cells: Sequence[Rectangle], stats: DecomposeStats | None = None) -> tuple[list[Shuffle], list[Rectangle]]:
    """Shuffles (application order) carrying a setwise Q-free partition of the cube onto a grid.

    Returns the shuffles and the final position of every cell; each cell is
    moved by a single translation.
    """
    cells = list(cells)
    if not is_setwise_qfree(cells):
        raise ValueError("partition is not setwise Q-free")
    stats = stats or DecomposeStats()
    return _straighten(cells, cells[0].lo[0].table, stats)


def decompose_shuffles(f: RecMap, stats: DecomposeStats | None = None) -> list[Shuffle]:
    """Restricted shuffles whose product (in list order) equals ``f``."""
    stats = stats if stats is not None else DecomposeStats()
    table = f.table
    d = f.dim
    cube = unit_cube(table, d)
    if not f.ambient.same_set(Multirectangle([cube])):
        raise ValueError("decompose_shuffles works on the unit cube only")
    if not f.moved():
        return []
    if d == 1:
        out = _decompose_iet(f)
        stats.factors += len(out)
        return out
    Q = refine_grid_qfree(grid_refine([p.domain for p in f.pieces], table))
    cells = Q.cells()
    shift_of = _shift_lookup(f)
    images = [c.translate(shift_of(c)) for c in cells]
    applied, final = _straighten(images, table, stats)
    h_f = RecMap(
        Multirectangle([cube]),
        [Piece(c, tuple(b - a for a, b in zip(c.lo, e.lo))) for c, e in zip(cells, final)],
        table,
    )
    out = [s.inverse() for s in applied] + grid_to_grid_decompose(h_f, Q, stats)
    stats.factors += len(out)
    return out
