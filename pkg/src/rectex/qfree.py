"""Q-freeness tests and simplicial refinement of finite sets of positive scalars.

Given positive scalars ``s_1, ..., s_n`` the refinement produces positive,
Q-independent ``b_1, ..., b_r`` with every ``s_i`` a nonnegative integer
combination of them.  Cheap cases are handled directly (already independent,
rank one).  Otherwise up to three exact constructions compete and the one
cutting the inputs into the fewest basis pieces wins: a subset of the inputs,
a Brun-style subtractive reduction, and a cone construction that always
succeeds.  The cone construction works in the dual
of the lattice spanned by the inputs.  Let ``theta`` be the vector of values
of a lattice basis.  A unimodular integer cone containing ``theta`` whose
generators are nonnegative on all inputs gives the answer: the basis is the
dual basis of the generators and the expansion coefficients are the
generator values.  Such a cone is found by approximating ``theta`` with a
small simplicial cone and then subdividing stellarly until the determinant
is one.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .geometry import GridPattern, Rectangle, RectPartition
from .scalar import PrecisionExhausted, Scalar, compare, max_precision_bits, scalar_sign

__all__ = [
    "SearchBudgetExceeded",
    "SimplicialRefinement",
    "RefineStats",
    "stats",
    "search_budget",
    "set_search_budget",
    "budget",
    "rank",
    "is_qfree",
    "is_setwise_qfree",
    "simplicial_refine",
    "refine_grid_qfree",
]


class SearchBudgetExceeded(RuntimeError):
    pass


_budget = 200_000


def search_budget() -> int:
    return _budget


def set_search_budget(steps: int) -> None:
    global _budget
    if steps < 1:
        raise ValueError("search budget must be positive")
    _budget = steps


@contextmanager
def budget(steps: int):
    old = _budget
    set_search_budget(steps)
    try:
        yield
    finally:
        set_search_budget(old)


@dataclass
class RefineStats:
    """Counters describing which refinement paths were taken."""

    calls: int = 0
    tiers: dict = field(default_factory=lambda: {"independent": 0, "rank1": 0, "subset": 0, "subtractive": 0, "cone": 0})
    cone_steps: int = 0
    max_cone_steps: int = 0

    def reset(self):
        self.__init__()


stats = RefineStats()


# ------------------------------------------------------------ linear algebra


def _vec(s: Scalar) -> tuple[Fraction, ...]:
    return s.c


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    """Rank over Q by fraction-exact elimination."""
    rows = [list(v) for v in vectors if any(v)]
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        for i in range(r + 1, len(rows)):
            if rows[i][col]:
                t = rows[i][col] / p
                rows[i] = [a - t * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def is_qfree(values: Sequence[Scalar]) -> bool:
    """Q-independence of the set of values (duplicates collapse)."""
    distinct = list(dict.fromkeys(values))
    return rank([_vec(s) for s in distinct]) == len(distinct)


def is_setwise_qfree(P: RectPartition | GridPattern | Sequence[Rectangle]) -> bool:
    if isinstance(P, GridPattern):
        return all(is_qfree(P.lengths(i)) for i in range(P.dim))
    cells = P.cells if isinstance(P, RectPartition) else list(P)
    if not cells:
        return True
    return all(is_qfree([c.side(i) for c in cells]) for i in range(cells[0].dim))


def _solve(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Least-structure solve of ``x @ matrix = rhs`` (rows of ``matrix`` independent)."""
    n, m = len(matrix), len(rhs)
    # Augmented transpose: unknowns x_1..x_n, equations per column.
    aug = [[matrix[i][j] for i in range(n)] + [rhs[j]] for j in range(m)]
    r = 0
    where = [-1] * n
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        p = aug[r][col]
        aug[r] = [a / p for a in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                t = aug[i][col]
                aug[i] = [a - t * b for a, b in zip(aug[i], aug[r])]
        where[col] = r
        r += 1
    for i in range(r, m):
        if aug[i][n]:
            return None
    return [aug[where[c]][n] if where[c] >= 0 else Fraction(0) for c in range(n)]


def _integer_basis(int_rows: list[list[int]]) -> list[list[int]]:
    """Row-echelon Z-basis of the integer span of ``int_rows``."""
    rows = [list(r) for r in int_rows if any(r)]
    basis = []
    ncols = len(int_rows[0])
    for col in range(ncols):
        live = [r for r in rows if r[col]]
        rest = [r for r in rows if not r[col]]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                if r[col]:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            live = nxt
        if live:
            basis.append(live[0])
        rows = rest
    return basis


def _mat_inverse(rows: list[list[int]]) -> list[list[Fraction]]:
    n = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [a / p for a in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                t = aug[i][col]
                aug[i] = [a - t * b for a, b in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


def _det(rows: list[list[int]]) -> Fraction:
    n = len(rows)
    a = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for i in range(col + 1, n):
            if a[i][col]:
                t = a[i][col] / a[col][col]
                a[i] = [x - t * y for x, y in zip(a[i], a[col])]
    return det


# ------------------------------------------------------------ refinement


@dataclass(frozen=True)
class SimplicialRefinement:
    basis: tuple
    expansion: tuple  # one row of nonnegative ints per input

    def verify(self, inputs: Sequence[Scalar]) -> str | None:
        for b in self.basis:
            if scalar_sign(b) <= 0:
                return f"basis element {b} is not positive"
        if not is_qfree(self.basis) or len(set(self.basis)) != len(self.basis):
            return "basis is not Q-independent"
        if len(self.expansion) != len(inputs):
            return "expansion has the wrong number of rows"
        for s, row in zip(inputs, self.expansion):
            if len(row) != len(self.basis) or any(c < 0 for c in row):
                return f"expansion row {row} is not a nonnegative integer vector"
            total = s.table.zero()
            for b, c in zip(self.basis, row):
                total = total + b * c
            if total != s:
                return f"expansion of {s} does not reproduce it"
        return None

    def to_json(self) -> dict:
        return {"basis": [b.to_json() for b in self.basis], "expansion": [list(r) for r in self.expansion]}


def _gcd_fractions(values: Sequence[Fraction]) -> Fraction:
    den = 1
    for q in values:
        den = den * q.denominator // math.gcd(den, q.denominator)
    g = 0
    for q in values:
        g = math.gcd(g, int(q * den))
    return Fraction(g, den)


def _expand_in(basis: Sequence[Scalar], s: Scalar) -> list[Fraction] | None:
    return _solve([list(_vec(b)) for b in basis], list(_vec(s)))


def _tier_subset(distinct: list[Scalar], r: int) -> list[Scalar] | None:
    """A subset of the inputs that expands every input nonnegatively and integrally."""
    tried = 0
    for combo in combinations(range(len(distinct)), r):
        tried += 1
        if tried > 2000:
            return None
        basis = [distinct[i] for i in combo]
        if rank([_vec(b) for b in basis]) < r:
            continue
        ok = True
        for s in distinct:
            coeffs = _expand_in(basis, s)
            if coeffs is None or any(c < 0 or c.denominator != 1 for c in coeffs):
                ok = False
                break
        if ok:
            return basis
    return None


def _floor_ratio(x: Scalar, y: Scalar) -> int:
    """Exact ``floor(x / y)`` for positive scalars."""
    bits = 64
    while True:
        xl, xh = x.enclosure(bits)
        yl, yh = y.enclosure(bits)
        if yl > 0:
            lo, hi = math.floor(max(xl, 0) / yh), math.floor(xh / yl)
            if lo == hi:
                return lo
            if hi - lo == 1:
                return hi if scalar_sign(x - y * hi) >= 0 else lo
        if bits >= max_precision_bits():
            raise PrecisionExhausted(f"cannot resolve floor of {x} / {y}")
        bits *= 2


def _tier_subtractive(distinct: list[Scalar], max_rounds: int = 200) -> tuple[list[Scalar], list[list[int]]] | None:
    """Brun-style reduction: replace the largest element by its remainder modulo the next one.

    ``rows[i]`` always expresses ``distinct[i]`` in the working set with
    nonnegative integers, so the inputs stay in the generated monoid; stops
    once the working set is Q-independent (None if that takes too long).
    """
    work = list(distinct)
    rows = [[int(i == j) for j in range(len(work))] for i in range(len(work))]
    for _ in range(max_rounds):
        if rank([_vec(w) for w in work]) == len(work):
            return work, rows
        order = sorted(range(len(work)), key=lambda j: _LexKey1(work[j]))
        x, y = order[-1], order[-2]
        k = _floor_ratio(work[x], work[y])
        work[x] = work[x] - work[y] * k
        for row in rows:
            row[y] += k * row[x]
        drop = set()
        if scalar_sign(work[x]) == 0:
            drop.add(x)
        seen: dict = {}
        for j, w in enumerate(work):
            if j in drop:
                continue
            if w in seen:
                for row in rows:
                    row[seen[w]] += row[j]
                drop.add(j)
            else:
                seen[w] = j
        keep = [j for j in range(len(work)) if j not in drop]
        work = [work[j] for j in keep]
        rows = [[row[j] for j in keep] for row in rows]
    return None


class _LexKey1:
    __slots__ = ("s",)

    def __init__(self, s):
        self.s = s

    def __lt__(self, other):
        return compare(self.s, other.s) < 0


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _theta_combo(coeffs: Sequence[Fraction], theta: Sequence[Scalar]) -> Scalar:
    total = theta[0].table.zero()
    for q, t in zip(coeffs, theta):
        if q:
            total = total + t * q
    return total


def _cone_coords(gens: list[list[int]], theta: Sequence[Scalar]) -> list[Scalar] | None:
    """Coordinates of ``theta`` in the generators, or None if they are dependent."""
    if _det(gens) == 0:
        return None
    inv = _mat_inverse(gens)  # gens rows; theta = lam @ gens  =>  lam = theta @ inv
    r = len(gens)
    return [_theta_combo([inv[k][j] for k in range(r)], theta) for j in range(r)]


def _approx_cone(theta: Sequence[Scalar], N: int, counter) -> tuple[list[list[int]], list[Scalar]]:
    """A simplicial integer cone around ``theta`` from the Freudenthal simplex at scale N."""
    r = len(theta)
    scaled = [t * N for t in theta]
    base = [s.floor() for s in scaled]
    fracs = [s - fl for s, fl in zip(scaled, base)]
    order = sorted(range(r), key=lambda k: _Desc(fracs[k]))
    verts = [list(base)]
    cur = list(base)
    for k in order:
        cur = list(cur)
        cur[k] += 1
        verts.append(cur)
    # theta lies in the cone over these r+1 vertices; pick an r-subset containing it.
    for skip in range(r + 1):
        counter()
        gens = [v for j, v in enumerate(verts) if j != skip]
        lam = _cone_coords(gens, theta)
        if lam is None:
            continue
        if all(scalar_sign(x) >= 0 for x in lam):
            return gens, lam
    raise ArithmeticError("no simplicial subcone contains the target direction")


class _Desc:
    __slots__ = ("s",)

    def __init__(self, s):
        self.s = s

    def __lt__(self, other):
        return compare(self.s, other.s) > 0


def _tier_cone(distinct: list[Scalar]) -> tuple[list[Scalar], list[list[int]]]:
    table = distinct[0].table
    den = 1
    for s in distinct:
        for q in s.c:
            den = den * q.denominator // math.gcd(den, q.denominator)
    int_rows = [[int(q * den) for q in s.c] for s in distinct]
    lat = _integer_basis(int_rows)
    r = len(lat)
    e = [Scalar(table, tuple(Fraction(x, den) for x in row)) for row in lat]
    coords = []
    for s in distinct:
        sol = _solve([list(_vec(b)) for b in e], list(_vec(s)))
        coords.append([int(x) for x in sol])
    theta = e
    steps = 0

    def counter():
        nonlocal steps
        steps += 1
        if steps > _budget:
            raise SearchBudgetExceeded(f"simplicial refinement exceeded {_budget} steps")

    N = 1
    while True:
        gens, lam = _approx_cone(theta, N, counter)
        if all(_dot(g, m) >= 0 for g in gens for m in coords):
            break
        N *= 2
    # Stellar subdivision until the cone is unimodular.
    while True:
        counter()
        d = abs(_det(gens))
        if d == 1:
            break
        inv = _mat_inverse(gens)
        w_mu = None
        for k in range(r):
            unit = [Fraction(int(k == j)) for j in range(r)]
            mu = [_dot(unit, [inv[i][j] for i in range(r)]) for j in range(r)]
            if any(m.denominator != 1 for m in mu):
                w_mu = [m - math.floor(m) for m in mu]
                break
        w = [sum(w_mu[j] * gens[j][c] for j in range(r)) for c in range(r)]
        w = [int(x) for x in w]
        best = None
        for j in range(r):
            if w_mu[j] > 0:
                ratio = lam[j] / w_mu[j]
                if best is None or compare(ratio, best[1]) < 0:
                    best = (j, ratio)
        j, ratio = best
        lam = [lam[k] - ratio * w_mu[k] if k != j else ratio for k in range(r)]
        gens = [g if k != j else w for k, g in enumerate(gens)]
    inv = _mat_inverse(gens)  # columns are the dual basis
    basis, expansion_cols = [], []
    for k in range(r):
        col = [inv[i][k] for i in range(r)]
        b = _theta_combo(col, theta)
        exp = [_dot(gens[k], m) for m in coords]
        if any(exp):
            basis.append(b)
            expansion_cols.append(exp)
    stats.cone_steps += steps
    stats.max_cone_steps = max(stats.max_cone_steps, steps)
    rows = [[col[i] for col in expansion_cols] for i in range(len(distinct))]
    return basis, rows


def simplicial_refine(S: Sequence[Scalar]) -> SimplicialRefinement:
    """Positive Q-independent basis expanding every input with nonnegative integers."""
    S = list(S)
    if not S:
        return SimplicialRefinement((), ())
    for s in S:
        if scalar_sign(s) <= 0:
            raise ValueError(f"input {s} is not positive")
    stats.calls += 1
    distinct = list(dict.fromkeys(S))
    vecs = [_vec(s) for s in distinct]
    r = rank(vecs)
    if r == len(distinct):
        stats.tiers["independent"] += 1
        basis = distinct
        rows = [[int(s == b) for b in basis] for s in S]
        return SimplicialRefinement(tuple(basis), tuple(tuple(row) for row in rows))
    if r == 1:
        stats.tiers["rank1"] += 1
        u = distinct[0]
        k = next(i for i, q in enumerate(u.c) if q)
        ratios = [s.c[k] / u.c[k] for s in distinct]
        g = _gcd_fractions(ratios)
        b = u * g
        rows = [[int(s.c[k] / u.c[k] / g)] for s in S]
        return SimplicialRefinement((b,), tuple(tuple(row) for row in rows))
    # Several exact constructions; keep the one cutting the inputs into the fewest pieces.
    candidates = []
    sub = _tier_subset(distinct, r)
    if sub is not None:
        candidates.append(("subset", sub, [[int(c) for c in _expand_in(sub, s)] for s in distinct]))
    brun = _tier_subtractive(distinct)
    if brun is not None:
        candidates.append(("subtractive", brun[0], brun[1]))
    if sub is None:
        cone = _tier_cone(distinct)
        candidates.append(("cone", cone[0], cone[1]))
    weight = {s: S.count(s) for s in distinct}
    tier, basis, rows_d = min(
        candidates, key=lambda c: sum(weight[s] * sum(row) for s, row in zip(distinct, c[2]))
    )
    stats.tiers[tier] += 1
    lookup = dict(zip(distinct, rows_d))
    rows = [lookup[s] for s in S]
    return SimplicialRefinement(tuple(basis), tuple(tuple(int(x) for x in row) for row in rows))


def refine_grid_qfree(Q: GridPattern) -> GridPattern:
    """Refine each axis so its set of interval lengths is Q-free."""
    axes = []
    for i in range(Q.dim):
        lengths = Q.lengths(i)
        ref = simplicial_refine(lengths)
        cuts = []
        pos = Q.table.zero()
        for row in ref.expansion:
            for b, c in zip(ref.basis, row):
                for _ in range(c):
                    cuts.append(pos)
                    pos = pos + b
        axes.append(cuts)
    return GridPattern(axes, Q.table)
