"""The twelve executable acceptance criteria.

Each criterion is a function returning a :class:`Result`; all checks are
exact.  The same functions back ``rectex selftest`` and the pytest
acceptance suite, so the scoreboard printed by either is the same.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .decompose import (
    DecomposeStats,
    decompose_involution,
    decompose_shuffles,
    grid_to_grid_decompose,
    transposition_to_shuffles,
)
from .geometry import GridPattern, Multirectangle, Rectangle, unit_cube
from .invariants import (
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
)
from .io import FactorList, ScalarList, dumps, loads
from .lattice import Lattice, check_domain, default_r0, fundamental_domain, torus_vol
from .qfree import is_qfree, is_setwise_qfree, refine_grid_qfree, simplicial_refine
from .recmap import (
    Piece,
    RecMap,
    Shuffle,
    Transposition,
    compose_all,
    flip_compose,
    flip_embed,
    flip_equal,
    flip_unembed,
    identity,
    is_restricted_shuffle,
    mk_iet_lift,
    mk_restricted_shuffle,
    mk_transposition,
    rec_compose,
    rec_equal,
    rec_inverse,
    rec_validate,
)
from .sampling import (
    _iet_on_grid,
    random_commutator,
    random_flipmap,
    random_involution,
    random_qfree_grid,
    random_recmap,
)
from .scalar import Scalar, SymbolTable, compare

__all__ = ["Result", "CRITERIA", "run_criterion", "run_all"]

SYMBOLS = "sqrt2,sqrt3,sqrt5"


@dataclass
class Result:
    number: int
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return f"[{verdict}] {self.number:2d} {self.name} ({self.seconds:.2f}s): {self.detail}"


def _table() -> SymbolTable:
    return SymbolTable.from_spec(SYMBOLS)


def _shuffle_element(table: SymbolTable, d: int, axis: int, c: list, a: Scalar, b: Scalar) -> RecMap:
    """Shuffle by ``b`` modulo ``a`` along ``axis`` over the base ``prod [0, c_j)``."""
    zero = table.zero()
    base = Rectangle([zero] * (d - 1), list(c))
    return mk_restricted_shuffle(axis, base, zero, a, b)


def _expected_component(table: SymbolTable, d: int, axis: int, c: list, a: Scalar, b: Scalar) -> TensorValue:
    # slots hold the side lengths with slot ``axis`` exchanged with the last one
    sides = list(c)
    sides.insert(axis, None)
    sides[axis], sides[d - 1] = sides[d - 1], sides[axis]
    head = sides[: d - 1]
    wedge = tensor(a, b) - tensor(b, a)
    out = TensorValue(0, {(): 1})
    for s in head:
        out = out.otimes(s)
    return out.otimes(wedge)


# ------------------------------------------------------------ criteria


def c01_saf_homomorphism() -> tuple[bool, str]:
    table = _table()
    t0 = time.perf_counter()
    bad = 0
    count = 0
    for d in (1, 2, 3):
        for seed in range(200):
            f = random_recmap(d, 8, 1000 * d + seed, table)
            g = random_recmap(d, 8, 500000 + 1000 * d + seed, table)
            lhs = saf(rec_compose(f, g))
            rhs = saf(f) + saf(g)
            count += 1
            if lhs != rhs:
                bad += 1
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 30
    return ok, f"{count - bad}/{count} pairs additive in {elapsed:.1f}s (target < 30s)"


def _generator_params(table: SymbolTable, rng: random.Random):
    """Random ``0 < b < a <= 1`` and ``0 < c <= 1`` drawn from simple quadratic irrationals."""
    pool = [
        table.symbol("sqrt2", "1/2"),
        table.symbol("sqrt3", "1/2"),
        table.symbol("sqrt5", "1/3"),
        table.rational("1/3"),
        table.rational("1/2"),
        table.symbol("sqrt2", 1) - table.rational(1),
        table.rational(1) - table.symbol("sqrt2", "1/2"),
        table.symbol("sqrt3", "1/3"),
        table.rational("3/4"),
        table.symbol("sqrt5", "1/4"),
    ]
    while True:
        a, b, c = rng.choice(pool), rng.choice(pool), rng.choice(pool)
        if compare(b, a) < 0:
            return a, b, c


def c02_saf_generators() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(2)
    fails = []
    cases = 0
    # the one-dimensional rotation plus its exact reference value
    a, b = table.symbol("sqrt2", "1/2"), table.rational("1/3")
    T = saf(_shuffle_element(table, 1, 0, [], a, b)).components[0]
    want = TensorValue(2, {("sqrt2", "1"): Fraction(1, 6), ("1", "sqrt2"): Fraction(-1, 6)})
    if T != want:
        fails.append("reference rotation value")
    cases += 1
    while cases < 21:
        d = [1, 2, 2, 3][cases % 4]
        axis = rng.randrange(d)
        a, b, c0 = _generator_params(table, rng)
        c = [c0] + [table.rational(1)] * (d - 2) if d > 1 else []
        if d == 3 and rng.random() < 0.5:
            c = [table.rational(1), c0]
        f = _shuffle_element(table, d, axis, c, a, b)
        comps = saf(f).components
        exp = _expected_component(table, d, axis, c, a, b)
        if d == 1 and comps[0] != tensor(a, b) - tensor(b, a):
            fails.append(f"case {cases}")
        if comps[axis] != exp or any(not comps[j].is_zero() for j in range(d) if j != axis):
            fails.append(f"case {cases}")
        cases += 1
    return not fails, f"{cases - len(fails)}/{cases} generator values exact" + (f"; failed {fails}" if fails else "")


def c03_kernel() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(3)
    wrong_true = 0
    for seed in range(100):
        d = 1 + seed % 3
        f = random_commutator(d, 5, 300 + seed, table)
        grid = random_qfree_grid(rng, table, d)
        cells = grid.cells()
        rng.shuffle(cells)
        for P in cells:
            Q = next((Q for Q in cells if Q is not P and Q.sides() == P.sides()), None)
            if Q is not None:
                f = rec_compose(mk_transposition(P, Q), f)
                break
        g = random_commutator(d, 4, 900 + seed, table)
        f = rec_compose(g, f)
        if not is_in_derived(f):
            wrong_true += 1
    wrong_false = 0
    for k in range(20):
        d = 1 + k % 3
        axis = k % d
        a = table.symbol("sqrt2", "1/2")
        b = [table.rational("1/3"), table.rational("1/5"), table.symbol("sqrt3", "1/4")][k % 3]
        c = [table.symbol("sqrt5", "1/3")] + [table.rational("1/2")] * (d - 2) if d > 1 else []
        if is_in_derived(_shuffle_element(table, d, axis, c, a, b)):
            wrong_false += 1
    ok = wrong_true == 0 and wrong_false == 0
    return ok, f"products in kernel: {100 - wrong_true}/100; shuffles outside kernel: {20 - wrong_false}/20"


def c04_generation() -> tuple[bool, str]:
    table = _table()
    t0 = time.perf_counter()
    bad = []
    total_factors = 0
    cases = [(2, s) for s in range(50)] + [(3, s) for s in range(20)]
    for d, seed in cases:
        f = random_recmap(d, 8, 4000 + 100 * d + seed, table)
        st = DecomposeStats()
        fs = decompose_shuffles(f, st)
        total_factors += len(fs)
        ok = all(is_restricted_shuffle(s.to_recmap()) is not None for s in fs)
        ok = ok and st.traces_decrease()
        ok = ok and rec_equal(compose_all(fs, f.ambient, table), f)
        if not ok:
            bad.append((d, seed))
    elapsed = time.perf_counter() - t0
    n = len(cases)
    ok = not bad and elapsed < 300
    detail = f"{n - len(bad)}/{n} maps recomposed from {total_factors} shuffles in {elapsed:.1f}s (target < 300s)"
    if bad:
        detail += f"; failed {bad[:5]}"
    return ok, detail


def _random_scalar(table: SymbolTable, rng: random.Random, lo: Fraction, hi: Fraction) -> Scalar:
    """A scalar in ``[lo, hi)`` mixing a rational with one square root."""
    name = rng.choice(["sqrt2", "sqrt3", "sqrt5"])
    q = Fraction(rng.randint(1, 9), rng.randint(10, 40))
    s = table.symbol(name, q)
    frac = s - s.floor()
    width = hi - lo
    return frac * width + table.rational(lo)


def _random_transposition(table: SymbolTable, rng: random.Random, d: int, aligned: bool) -> Transposition:
    """Two disjoint translate boxes in the unit cube.

    On each axis the projections are either equal or separated; in the aligned
    case exactly one axis is separated (with a gap, so two shuffles are
    needed).
    """
    sep = [True] + [False] * (d - 1) if aligned else [True] + [rng.random() < 0.6 for _ in range(d - 1)]
    rng.shuffle(sep)
    Plo, Qlo, sides = [], [], []
    for k in range(d):
        if sep[k]:
            w = _random_scalar(table, rng, Fraction(1, 10), Fraction(3, 10))
            p = _random_scalar(table, rng, Fraction(0), Fraction(1, 10))
            gap = _random_scalar(table, rng, Fraction(1, 20), Fraction(1, 5))
            q = p + w + gap
            if rng.random() < 0.5:
                p, q = q, p
        else:
            w = _random_scalar(table, rng, Fraction(1, 5), Fraction(1, 2))
            p = q = _random_scalar(table, rng, Fraction(0), Fraction(1, 2))
        Plo.append(p)
        Qlo.append(q)
        sides.append(w)
    P = Rectangle(Plo, [x + w for x, w in zip(Plo, sides)])
    Q = Rectangle(Qlo, [x + w for x, w in zip(Qlo, sides)])
    return Transposition(P, Q)


def c05_transpositions() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(5)
    fails = []
    kinds = [(2, True)] * 5 + [(3, True)] * 5 + [(2, False)] * 10 + [(3, False)] * 10
    for i, (d, aligned) in enumerate(kinds):
        tau = _random_transposition(table, rng, d, aligned)
        fs = transposition_to_shuffles(tau)
        bound_ok = len(fs) == 2 if aligned else len(fs) <= 2 * (2 * d - 1)
        exact = rec_equal(compose_all(fs, None, table), tau.to_recmap())
        if not (bound_ok and exact):
            fails.append((i, d, aligned, len(fs), exact))
    n = len(kinds)
    return not fails, f"{n - len(fails)}/{n} transpositions factored within bounds" + (f"; failed {fails}" if fails else "")


def c06_involutions() -> tuple[bool, str]:
    table = _table()
    fails = []
    for seed in range(30):
        d = 1 + seed % 3
        f = random_involution(d, 600 + seed, table)
        ts = decompose_involution(f)
        supports = [Multirectangle([t.P, t.Q], d) for t in ts]
        disjoint = all(
            not supports[i].meets(supports[j]) for i in range(len(ts)) for j in range(i + 1, len(ts))
        )
        exact = rec_equal(compose_all(ts, f.ambient, table), f) if ts else rec_equal(f, identity(f.ambient, table))
        if not (disjoint and exact):
            fails.append(seed)
    return not fails, f"{30 - len(fails)}/30 involutions split into disjoint transpositions" + (
        f"; failed seeds {fails}" if fails else ""
    )


def _gcd_oracle(values: list[Fraction]) -> Fraction:
    den = math.lcm(*(v.denominator for v in values))
    return Fraction(math.gcd(*(int(v * den) for v in values)), den)


def c07_refinement() -> tuple[bool, str]:
    table = _table()
    s2 = table.symbol("sqrt2")
    one = table.rational(1)
    corpus = [
        [table.rational(3), table.rational(5)],
        [one, s2, one + s2],
        [one, s2 - one, table.rational(2) - s2],
        [table.rational("1/3"), table.rational("1/4"), table.rational("5/6")],
        [s2, table.symbol("sqrt3"), s2 + table.symbol("sqrt3", 2), one],
    ]
    rng = random.Random(7)
    for _ in range(20):
        u = _random_scalar(table, rng, Fraction(1, 10), Fraction(1))
        v = table.rational(Fraction(rng.randint(1, 7), rng.randint(2, 9)))
        rank1 = rng.random() < 0.3
        S = []
        for _ in range(rng.randint(2, 4)):
            m, n = rng.randint(0, 4), rng.randint(0, 4)
            if rank1:
                n = 0
            if m == n == 0:
                m = 1
            S.append(u * m + v * n if not rank1 else u * m)
        corpus.append(S)
    fails = []
    for i, S in enumerate(corpus):
        R = simplicial_refine(S)
        msg = R.verify(S)
        if msg:
            fails.append((i, msg))
            continue
        if all(s.is_rational() for s in S):
            g = _gcd_oracle([s.rational_value() for s in S])
            if [b.rational_value() for b in R.basis] != [g]:
                fails.append((i, "gcd mismatch"))
    # grid refinement outputs must be setwise Q-free
    grids = 0
    for k in range(10):
        d = 1 + k % 2
        axes = []
        for _ in range(d):
            x = _random_scalar(table, rng, Fraction(1, 5), Fraction(2, 5))
            y = table.rational(Fraction(rng.randint(1, 3), 7))
            cuts = [table.zero(), x, x + y]
            if compare(cuts[-1], one) >= 0:
                cuts = cuts[:-1]
            axes.append(cuts)
        G = GridPattern(axes, table)
        R = refine_grid_qfree(G)
        grids += 1
        if not is_setwise_qfree(R) or not R.partition().refines(G.partition()):
            fails.append((f"grid {k}", "not a setwise Q-free refinement"))
    n = len(corpus) + grids
    return not fails, f"{n - len(fails)}/{n} refinements verified" + (f"; failed {fails}" if fails else "")


def _image(f: RecMap, M: Multirectangle) -> Multirectangle:
    return Multirectangle([r for box in M for r in f.image_of(box)], M.dim)


def c08_isomorphism() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(8)
    fails = []
    half, one, zero = table.rational("1/2"), table.rational(1), table.zero()
    # the witness pair has different tensor volumes
    r = table.symbol("sqrt2", "1/2")
    W1 = Multirectangle([Rectangle([zero, zero], [r, r])], 2)
    W2 = Multirectangle([Rectangle([zero, zero], [half, one])], 2)
    res = rec_isomorphism(W1, W2)
    if not isinstance(res, NotIsomorphic) or res.vol_source == res.vol_target:
        fails.append("witness pair")
    cases = 1
    pairs = [
        (
            Multirectangle([Rectangle([zero, zero], [half, one])], 2),
            Multirectangle([Rectangle([zero, zero], [one, half])], 2),
        )
    ]
    for k in range(18):
        d = 1 + k % 3
        grid = random_qfree_grid(rng, table, d)
        cells = grid.cells()
        rng.shuffle(cells)
        M1 = Multirectangle(cells[: max(1, len(cells) // 2)], d)
        f = random_recmap(d, 6, 800 + k, table)
        pairs.append((M1, _image(f, M1)))
    for i, (M1, M2) in enumerate(pairs):
        cases += 1
        phi = rec_isomorphism(M1, M2)
        if not isinstance(phi, Bijection) or phi.validate():
            fails.append(f"pair {i}")
            continue
        amb = Multirectangle([unit_cube(table, M1.dim)], M1.dim)
        g = extend_to_ambient(phi, amb)
        if rec_validate(g) or not _image(g, M1).same_set(M2):
            fails.append(f"extension {i}")
    return not fails, f"{cases - len(fails)}/{cases} isomorphism cases correct" + (f"; failed {fails}" if fails else "")


def _random_lattice(table: SymbolTable, rng: random.Random, irrational: bool) -> Lattice:
    def entry(big: bool):
        if irrational and rng.random() < 0.6:
            s = table.symbol(rng.choice(["sqrt2", "sqrt3", "sqrt5"]), Fraction(rng.randint(1, 3), rng.randint(1, 3)))
            if big:
                return s
            return s - table.rational(s.floor())
        q = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
        return table.rational(q + (1 if big else 0))

    while True:
        cols = [(entry(True), entry(False)), (entry(False), entry(True))]
        try:
            return Lattice(cols, table)
        except ValueError:
            continue


def c09_torus() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(9)
    fails = []
    for k in range(10):
        L = _random_lattice(table, rng, irrational=k >= 3)
        (a, b), (c, d) = L.columns
        expected = tensor(a, d) - tensor(c, b)
        if L.det_sign() < 0:
            expected = -expected
        M = fundamental_domain(L)
        vol = vol_tensor(M)
        check = check_domain(L, M)
        R0 = default_r0(L)
        R1 = Rectangle(
            [x - table.rational("1/2") for x in R0.lo], [x + table.rational("1/3") for x in R0.hi]
        )
        vol1 = torus_vol(L, R1)
        if vol != expected or not check or vol1 != vol:
            fails.append((k, vol == expected, bool(check), vol1 == vol))
    return not fails, f"{10 - len(fails)}/10 lattices match the two-by-two formula with valid domains" + (
        f"; failed {fails}" if fails else ""
    )


def c10_flip() -> tuple[bool, str]:
    table = _table()
    fails = []
    for seed in range(30):
        d = 1 + seed % 2
        F = random_flipmap(d, 1000 + seed, table)
        if not flip_equal(flip_unembed(flip_embed(F)), F):
            fails.append(f"retract {seed}")
        G = random_flipmap(d, 2000 + seed, table)
        if not rec_equal(flip_embed(flip_compose(F, G)), rec_compose(flip_embed(F), flip_embed(G))):
            fails.append(f"homomorphism {seed}")
    return not fails, f"{60 - len(fails)}/60 embedding checks exact" + (f"; failed {fails}" if fails else "")


def c11_gtg() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(11)
    fails = []
    for k in range(20):
        d = 2 + k % 2
        grid = random_qfree_grid(rng, table, d)
        lift = mk_iet_lift([_iet_on_grid(rng, grid, i) for i in range(d)])
        if not is_in_gtg(lift):
            fails.append(f"lift {k}")
        tau = _random_transposition(table, rng, d, aligned=k % 3 == 0)
        if not is_in_gtg(tau.to_recmap()):
            fails.append(f"transposition {k}")
        a = table.symbol("sqrt2", "1/2")
        b = [table.rational("1/3"), table.rational("1/4")][k % 2]
        c = [table.symbol("sqrt3", "1/2")] + [table.symbol("sqrt5", "1/3")] * (d - 2)
        if is_in_gtg(_shuffle_element(table, d, 0, c, a, b)):
            fails.append(f"shuffle {k}")
    return not fails, f"{60 - len(fails)}/60 membership verdicts correct" + (f"; failed {fails}" if fails else "")


def _grid_to_grid_case(table: SymbolTable, rng: random.Random, d: int):
    Q = random_qfree_grid(rng, table, d)
    # target grid: the same intervals in a shuffled order on each axis
    axes = []
    for i in range(d):
        ls = Q.lengths(i)
        rng.shuffle(ls)
        cuts = [table.zero()]
        for ell in ls[:-1]:
            cuts.append(cuts[-1] + ell)
        axes.append(cuts)
    Q2 = GridPattern(axes, table)
    targets = Q2.cells()
    rng.shuffle(targets)
    pieces = []
    for c in Q.cells():
        t = next(t for t in targets if t.sides() == c.sides())
        targets.remove(t)
        pieces.append(Piece(c, tuple(y - x for x, y in zip(c.lo, t.lo))))
    return RecMap(Multirectangle([unit_cube(table, d)], d), pieces, table), Q


def c12_infrastructure() -> tuple[bool, str]:
    table = _table()
    rng = random.Random(12)
    fails = []
    f = random_recmap(2, 6, 12, table)
    F = random_flipmap(2, 12, table)
    M = Multirectangle(random_qfree_grid(rng, table, 2).cells()[:2], 2)
    L = _random_lattice(table, rng, irrational=True)
    payloads = [
        f,
        F,
        M,
        random_qfree_grid(rng, table, 3),
        L,
        vol_tensor(M),
        saf(f),
        FactorList(2, tuple(decompose_shuffles(f))),
        FactorList(2, (_random_transposition(table, rng, 2, False),)),
        rec_isomorphism(M, _image(f, M)),
        ScalarList((table.symbol("sqrt2"), table.rational("1/3"))),
        simplicial_refine([table.rational(1), table.symbol("sqrt2")]),
    ]
    for x in payloads:
        text = dumps(x, table)
        if dumps(loads(text).payload, table) != text:
            fails.append(f"round trip {type(x).__name__}")
    for seed in (0, 1, 42):
        a = dumps(random_recmap(2, 8, seed, SYMBOLS))
        b = dumps(random_recmap(2, 8, seed, SYMBOLS))
        if a != b:
            fails.append(f"determinism {seed}")
    for k in range(20):
        g, Q = _grid_to_grid_case(table, rng, 1 + k % 3)
        fs = grid_to_grid_decompose(g, Q)
        h = compose_all(fs, g.ambient, table) if fs else identity(g.ambient, table)
        if not rec_equal(h, g):
            fails.append(f"grid case {k}")
    return not fails, f"{len(payloads)} payload kinds round-trip, generation deterministic, 20 grid maps factored" + (
        f"; failed {fails}" if fails else ""
    )


CRITERIA: list[tuple[int, str, Callable[[], tuple[bool, str]]]] = [
    (1, "saf_homomorphism", c01_saf_homomorphism),
    (2, "saf_generators", c02_saf_generators),
    (3, "kernel_characterization", c03_kernel),
    (4, "generation_theorem", c04_generation),
    (5, "transposition_factorization", c05_transpositions),
    (6, "involution_factorization", c06_involutions),
    (7, "simplicial_refinement", c07_refinement),
    (8, "rec_isomorphism", c08_isomorphism),
    (9, "torus_volume", c09_torus),
    (10, "flip_embedding", c10_flip),
    (11, "gtg_membership", c11_gtg),
    (12, "infrastructure", c12_infrastructure),
]


def run_criterion(number: int) -> Result:
    for n, name, fn in CRITERIA:
        if n == number:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as e:  # a crash is a failure, reported with its type
                ok, detail = False, f"raised {type(e).__name__}: {e}"
            return Result(n, name, ok, detail, time.perf_counter() - t0)
    raise KeyError(number)


def run_all(filter_text: str | None = None) -> list[Result]:
    out = []
    for n, name, _ in CRITERIA:
        if filter_text and filter_text not in name and filter_text != str(n):
            continue
        out.append(run_criterion(n))
    return out
