"""Command-line driver.

Every command reads and writes the JSON documents of :mod:`rectex.io`.
Boolean queries print a one-line verdict and exit 0 (true) or 1 (false).
Errors exit 2 for malformed input, 3 when sign resolution runs out of
precision, and 4 when a refinement search exceeds its budget.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from typing import Sequence

from . import __version__
from .decompose import (
    DecomposeStats,
    NotAnInvolution,
    decompose_involution,
    decompose_shuffles,
    grid_to_grid_decompose,
)
from .geometry import GridPattern, Multirectangle, Rectangle, RectPartition, grid_refine, unit_cube
from .invariants import (
    Bijection,
    NotIsomorphic,
    extend_to_ambient,
    is_in_derived,
    is_in_gtg,
    rec_isomorphism,
    saf,
    vol_tensor,
)
from .io import Document, DocumentError, FactorList, FundamentalDomain, ScalarList, dumps, load
from .lattice import Lattice, LatticeError, fundamental_domain
from .qfree import SearchBudgetExceeded, budget, refine_grid_qfree, simplicial_refine
from .recmap import (
    FlipMap,
    RecMap,
    compose_all,
    flip_compose,
    flip_embed,
    flip_equal,
    flip_from_recmap,
    flip_inverse,
    flip_unembed,
    identity,
    rec_compose,
    rec_equal,
    rec_inverse,
)
from .sampling import random_commutator, random_flipmap, random_involution, random_recmap
from .scalar import PrecisionExhausted, SymbolTable, precision_cap
from .svg import render_svg

__all__ = ["main", "build_parser"]

EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_PRECISION = 3
EXIT_BUDGET = 4


class _Fail(Exception):
    """Input that parsed but cannot be used by the command."""


class _Ctx:
    """Loads documents over one shared symbol table."""

    def __init__(self):
        self.table: SymbolTable | None = None

    def load(self, path: str) -> Document:
        doc = load(path, self.table)
        self.table = doc.table
        return doc

    def expect(self, path: str, *types):
        doc = self.load(path)
        if not isinstance(doc.payload, types):
            names = " or ".join(t.__name__ for t in types)
            raise _Fail(f"{path}: expected a {names} document, got {doc.kind!r}")
        return doc.payload


def _emit(x, out: str | None, table: SymbolTable | None = None) -> None:
    text = dumps(x, table)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verdict(ok: bool, yes: str, no: str) -> int:
    print(yes if ok else no)
    return 0 if ok else EXIT_FALSE


def _as_map(x, ambient: Multirectangle | None, table: SymbolTable):
    if isinstance(x, FactorList):
        if ambient is None:
            ambient = Multirectangle([unit_cube(table, x.dim)], x.dim)
        if not x.factors:
            return identity(ambient, table)
        return compose_all(list(x.factors), ambient, table)
    return x


# ------------------------------------------------------------ commands


def cmd_compose(a, ctx: _Ctx) -> int:
    items = [ctx.expect(p, RecMap, FlipMap, FactorList) for p in a.inputs]
    ambient = next((x.ambient for x in items if isinstance(x, (RecMap, FlipMap))), None)
    maps = [_as_map(x, ambient, ctx.table) for x in items]
    acc = maps[0]
    for m in maps[1:]:
        if isinstance(acc, FlipMap) or isinstance(m, FlipMap):
            acc = acc if isinstance(acc, FlipMap) else flip_from_recmap(acc)
            m = m if isinstance(m, FlipMap) else flip_from_recmap(m)
            acc = flip_compose(acc, m)
        else:
            acc = rec_compose(acc, m)
    _emit(acc, a.output, ctx.table)
    return 0


def cmd_invert(a, ctx: _Ctx) -> int:
    x = ctx.expect(a.input, RecMap, FlipMap)
    _emit(rec_inverse(x) if isinstance(x, RecMap) else flip_inverse(x), a.output, ctx.table)
    return 0


def cmd_equal(a, ctx: _Ctx) -> int:
    x = _as_map(ctx.expect(a.a, RecMap, FlipMap, FactorList), None, ctx.table)
    y = ctx.expect(a.b, RecMap, FlipMap, FactorList)
    y = _as_map(y, getattr(x, "ambient", None), ctx.table)
    if isinstance(x, FlipMap) or isinstance(y, FlipMap):
        if not (isinstance(x, FlipMap) and isinstance(y, FlipMap)):
            raise _Fail("cannot compare a flip map with a rectangle exchange")
        ok = flip_equal(x, y)
    else:
        ok = rec_equal(x, y)
    return _verdict(ok, "equal", "not equal")


def cmd_validate(a, ctx: _Ctx) -> int:
    try:
        doc = ctx.load(a.input)
    except DocumentError as e:
        print(f"invalid: {e}")
        return EXIT_FALSE
    print(f"valid {doc.kind}")
    return 0


def cmd_saf(a, ctx: _Ctx) -> int:
    f = _as_map(ctx.expect(a.input, RecMap, FactorList), None, ctx.table)
    _emit(saf(f), a.output, ctx.table)
    return 0


def cmd_vol(a, ctx: _Ctx) -> int:
    x = ctx.expect(a.input, Multirectangle, Rectangle, RectPartition)
    M = x.target if isinstance(x, RectPartition) else x
    _emit(vol_tensor(M), a.output, ctx.table)
    return 0


def cmd_derived(a, ctx: _Ctx) -> int:
    f = _as_map(ctx.expect(a.input, RecMap, FactorList), None, ctx.table)
    return _verdict(is_in_derived(f), "in the derived subgroup", "not in the derived subgroup")


def cmd_gtg(a, ctx: _Ctx) -> int:
    f = _as_map(ctx.expect(a.input, RecMap, FactorList), None, ctx.table)
    return _verdict(is_in_gtg(f), "in GtG", "not in GtG")


def _multi(x) -> Multirectangle:
    if isinstance(x, Rectangle):
        return Multirectangle([x], x.dim)
    return x


def cmd_iso(a, ctx: _Ctx) -> int:
    M1 = _multi(ctx.expect(a.m1, Multirectangle, Rectangle))
    M2 = _multi(ctx.expect(a.m2, Multirectangle, Rectangle))
    res = rec_isomorphism(M1, M2)
    if isinstance(res, NotIsomorphic):
        print("not isomorphic: tensor volumes differ")
        print(f"  source volume: {res.vol_source}")
        print(f"  target volume: {res.vol_target}")
        return EXIT_FALSE
    _emit(res, a.output, ctx.table)
    return 0


def cmd_extend(a, ctx: _Ctx) -> int:
    phi = ctx.expect(a.phi, Bijection)
    M = _multi(ctx.expect(a.ambient, Multirectangle, Rectangle))
    try:
        f = extend_to_ambient(phi, M)
    except ValueError as e:
        raise _Fail(str(e)) from e
    _emit(f, a.output, ctx.table)
    return 0


def cmd_decompose(a, ctx: _Ctx) -> int:
    f = ctx.expect(a.input, RecMap)
    stats = DecomposeStats()
    if a.mode == "shuffles":
        factors = decompose_shuffles(f, stats)
    elif a.mode == "involution":
        try:
            factors = decompose_involution(f)
        except NotAnInvolution as e:
            raise _Fail(str(e)) from e
    else:
        Q = refine_grid_qfree(grid_refine([p.domain for p in f.pieces], f.table))
        try:
            factors = grid_to_grid_decompose(f, Q, stats)
        except ValueError as e:
            raise _Fail(f"map does not send a grid onto a grid: {e}") from e
    _emit(FactorList(f.dim, tuple(factors)), a.output, ctx.table)
    if a.verbose:
        print(f"{len(factors)} factors; collisions {stats.collisions}", file=sys.stderr)
    return 0


def cmd_qfree(a, ctx: _Ctx) -> int:
    S = ctx.expect(a.input, ScalarList)
    _emit(simplicial_refine(list(S.values)), a.output, ctx.table)
    return 0


def cmd_refine_grid(a, ctx: _Ctx) -> int:
    Q = ctx.expect(a.input, GridPattern)
    _emit(refine_grid_qfree(Q), a.output, ctx.table)
    return 0


def cmd_fd(a, ctx: _Ctx) -> int:
    L = ctx.expect(a.lattice, Lattice)
    r0 = ctx.expect(a.r0, Rectangle) if a.r0 else None
    try:
        M = fundamental_domain(L, r0)
    except LatticeError as e:
        raise _Fail(str(e)) from e
    _emit(FundamentalDomain(L, M, vol_tensor(M)), a.output, ctx.table)
    return 0


def cmd_flip_embed(a, ctx: _Ctx) -> int:
    F = ctx.expect(a.input, FlipMap, RecMap)
    if isinstance(F, RecMap):
        F = flip_from_recmap(F)
    _emit(flip_embed(F), a.output, ctx.table)
    return 0


def cmd_flip_unembed(a, ctx: _Ctx) -> int:
    g = ctx.expect(a.input, RecMap)
    try:
        F = flip_unembed(g)
    except ValueError as e:
        raise _Fail(str(e)) from e
    _emit(F, a.output, ctx.table)
    return 0


def cmd_random(a, ctx: _Ctx) -> int:
    table = SymbolTable.from_spec(a.symbols)
    if a.kind == "recmap":
        x = random_recmap(a.dim, a.pieces, a.seed, table)
    elif a.kind == "commutator":
        x = random_commutator(a.dim, a.pieces, a.seed, table)
    elif a.kind == "involution":
        x = random_involution(a.dim, a.seed, table)
    else:
        x = random_flipmap(a.dim, a.seed, table, a.pieces)
    _emit(x, a.output, table)
    return 0


def cmd_render(a, ctx: _Ctx) -> int:
    x = ctx.expect(a.input, RecMap, FlipMap, RectPartition, Multirectangle)
    try:
        text = render_svg(x)
    except ValueError as e:
        raise _Fail(str(e)) from e
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_selftest(a, ctx: _Ctx) -> int:
    from .acceptance import run_all

    results = run_all(a.filter)
    if not results:
        print(f"no criterion matches {a.filter!r}")
        return EXIT_INPUT
    for r in results:
        print(r.line(), flush=True)
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else EXIT_FALSE


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rectex", description="Exact rectangle exchange transformations.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--max-precision-bits", type=int, default=None, help="cap for interval refinement of opaque symbols")
    p.add_argument("--search-budget", type=int, default=None, help="step budget of the simplicial refinement search")
    p.add_argument("--seed", type=int, default=None, help="default seed for the random command")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.set_defaults(func=fn)
        return sp

    def out(sp):
        sp.add_argument("-o", "--output", help="output file (default: standard output)")

    sp = cmd("compose", cmd_compose, "compose maps or factor lists, leftmost applied last")
    sp.add_argument("inputs", nargs="+")
    out(sp)
    sp = cmd("invert", cmd_invert, "inverse of a map")
    sp.add_argument("input")
    out(sp)
    sp = cmd("equal", cmd_equal, "do two maps agree everywhere")
    sp.add_argument("a")
    sp.add_argument("b")
    sp = cmd("validate", cmd_validate, "check that a document is well formed and its payload valid")
    sp.add_argument("input")
    sp = cmd("saf", cmd_saf, "generalized SAF invariant of a map")
    sp.add_argument("input")
    out(sp)
    sp = cmd("vol", cmd_vol, "tensor volume of a multirectangle")
    sp.add_argument("input")
    out(sp)
    sp = cmd("derived", cmd_derived, "membership in the derived subgroup")
    sp.add_argument("input")
    sp = cmd("gtg", cmd_gtg, "membership in the subgroup generated by IET lifts and transpositions")
    sp.add_argument("input")
    sp = cmd("iso", cmd_iso, "piecewise translation between two multirectangles")
    sp.add_argument("m1")
    sp.add_argument("m2")
    out(sp)
    sp = cmd("extend", cmd_extend, "extend a bijection to a map of an ambient multirectangle")
    sp.add_argument("phi")
    sp.add_argument("ambient")
    out(sp)
    sp = cmd("decompose", cmd_decompose, "factor a map")
    sp.add_argument("input")
    sp.add_argument("--mode", choices=["shuffles", "involution", "grid"], default="shuffles")
    sp.add_argument("-v", "--verbose", action="store_true")
    out(sp)
    sp = cmd("qfree", cmd_qfree, "simplicial refinement of a scalar list")
    sp.add_argument("input")
    out(sp)
    sp = cmd("refine-grid", cmd_refine_grid, "refine a grid pattern to a setwise Q-free one")
    sp.add_argument("input")
    out(sp)
    sp = cmd("fd", cmd_fd, "fundamental domain and torus tensor volume of a lattice")
    sp.add_argument("--lattice", required=True)
    sp.add_argument("--r0", help="starting box document")
    out(sp)
    sp = cmd("flip-embed", cmd_flip_embed, "embed a flip map as a rectangle exchange of [-1, 1)^d")
    sp.add_argument("input")
    out(sp)
    sp = cmd("flip-unembed", cmd_flip_unembed, "recover a flip map from a sign-equivariant map")
    sp.add_argument("input")
    out(sp)
    sp = cmd("random", cmd_random, "seeded random element")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--pieces", type=int, default=6)
    sp.add_argument("--seed", type=int, default=None, dest="sub_seed")
    sp.add_argument("--symbols", default="sqrt2")
    sp.add_argument("--kind", choices=["recmap", "commutator", "involution", "flipmap"], default="recmap")
    out(sp)
    sp = cmd("render", cmd_render, "SVG drawing of a planar map or partition")
    sp.add_argument("input")
    out(sp)
    sp = cmd("selftest", cmd_selftest, "run the acceptance criteria and print a scoreboard")
    sp.add_argument("--filter", default=None, help="criterion number or name fragment")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    if getattr(a, "sub_seed", None) is not None:
        a.seed = a.sub_seed
    elif a.seed is None:
        a.seed = 0
    try:
        with contextlib.ExitStack() as stack:
            # scoped so that in-process callers keep their own settings
            if a.max_precision_bits is not None:
                stack.enter_context(precision_cap(a.max_precision_bits))
            if a.search_budget is not None:
                stack.enter_context(budget(a.search_budget))
            if a.command == "random" and (a.dim < 1 or a.pieces < 1):
                raise _Fail("--dim and --pieces must be at least 1")
            return a.func(a, _Ctx())
    except (DocumentError, _Fail, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionExhausted as e:
        print(f"error: precision exhausted: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except SearchBudgetExceeded as e:
        print(f"error: search budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
