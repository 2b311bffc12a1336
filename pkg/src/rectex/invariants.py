"""Tensor volume, the generalized SAF invariant and Rec-isomorphisms.

Tensors over Q are stored sparsely as ``{(name_1, ..., name_k): q}`` on
tuples of symbol names, so ``a (x) b`` for scalars ``a`` and ``b`` expands
bilinearly over their coefficient maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .geometry import Multirectangle, Rectangle, lex_key
from .recmap import Piece, RecMap, rec_validate
from .scalar import Scalar, SymbolTable

__all__ = [
    "TensorValue",
    "SafInvariant",
    "Bijection",
    "NotIsomorphic",
    "tensor",
    "vol_tensor",
    "vol_tensor_i",
    "saf",
    "is_in_derived",
    "is_in_gtg",
    "rec_isomorphism",
    "extend_to_ambient",
]


class TensorValue:
    """Element of the k-th tensor power of the scalar space, over Q."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Mapping[tuple, Fraction] | None = None):
        self.order = order
        self.coeffs = {k: Fraction(v) for k, v in (coeffs or {}).items() if v}
        for k in self.coeffs:
            if len(k) != order:
                raise ValueError(f"tuple {k} does not have length {order}")

    @classmethod
    def zero(cls, order: int) -> "TensorValue":
        return cls(order)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, TensorValue) and self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, frozenset(self.coeffs.items())))

    def _check(self, other: "TensorValue"):
        if self.order != other.order:
            raise ValueError(f"tensor orders differ: {self.order} vs {other.order}")

    def __add__(self, other: "TensorValue") -> "TensorValue":
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TensorValue(self.order, out)

    def __neg__(self) -> "TensorValue":
        return TensorValue(self.order, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "TensorValue") -> "TensorValue":
        return self + (-other)

    def __mul__(self, q) -> "TensorValue":
        return TensorValue(self.order, {k: v * q for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def otimes(self, other: "TensorValue | Scalar") -> "TensorValue":
        if isinstance(other, Scalar):
            other = tensor(other)
        out: dict[tuple, Fraction] = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = k1 + k2
                out[k] = out.get(k, 0) + v1 * v2
        return TensorValue(self.order + other.order, out)

    def swap_slots(self, i: int, j: int) -> "TensorValue":
        out = {}
        for k, v in self.coeffs.items():
            t = list(k)
            t[i], t[j] = t[j], t[i]
            out[tuple(t)] = v
        return TensorValue(self.order, out)

    def is_antisymmetric_last(self) -> bool:
        """Whether the coefficients change sign under swapping the last two slots."""
        if self.order < 2:
            return self.is_zero()
        return self.swap_slots(self.order - 2, self.order - 1) == -self

    def __repr__(self):
        items = ", ".join(f"{k}: {v}" for k, v in sorted(self.coeffs.items()))
        return f"TensorValue(order={self.order}, {{{items}}})"

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "coeffs": [
                {"tuple": list(k), "q": _fmt(v)} for k, v in sorted(self.coeffs.items())
            ],
        }

    @classmethod
    def from_json(cls, data, table: SymbolTable | None = None) -> "TensorValue":
        coeffs: dict[tuple, Fraction] = {}
        for entry in data["coeffs"]:
            k = tuple(entry["tuple"])
            if table is not None:
                for name in k:
                    if name not in table.index:
                        raise ValueError(f"undeclared symbol {name!r} in tensor")
            coeffs[k] = coeffs.get(k, 0) + Fraction(entry["q"])
        return cls(int(data["order"]), coeffs)


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def tensor(*scalars: Scalar) -> TensorValue:
    """``s_1 (x) ... (x) s_k`` expanded over symbol tuples."""
    out = TensorValue(0, {(): Fraction(1)})
    for s in scalars:
        out = TensorValue(out.order + 1, {
            k + (n,): v * q for k, v in out.coeffs.items() for n, q in s.coeffs.items()
        }) if s.coeffs else TensorValue(out.order + 1)
    return out


def vol_tensor(M: Multirectangle | Rectangle | Iterable[Rectangle]) -> TensorValue:
    if isinstance(M, Rectangle):
        return tensor(*M.sides())
    boxes = list(M)
    dim = M.dim if isinstance(M, Multirectangle) else boxes[0].dim
    out: dict[tuple, Fraction] = {}
    for r in boxes:
        for k, v in tensor(*r.sides()).coeffs.items():
            out[k] = out.get(k, 0) + v
    return TensorValue(dim, out)


def vol_tensor_i(M: Multirectangle | Rectangle, i: int) -> TensorValue:
    """Tensor volume with slots ``i`` and ``d-1`` (0-based) exchanged."""
    v = vol_tensor(M)
    return v.swap_slots(i, v.order - 1)


@dataclass(frozen=True)
class SafInvariant:
    components: tuple

    @property
    def dim(self) -> int:
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __add__(self, other: "SafInvariant") -> "SafInvariant":
        return SafInvariant(tuple(a + b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "SafInvariant":
        return SafInvariant(tuple(-a for a in self.components))

    def __sub__(self, other: "SafInvariant") -> "SafInvariant":
        return self + (-other)

    def to_json(self) -> dict:
        return {"components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, data, table=None) -> "SafInvariant":
        return cls(tuple(TensorValue.from_json(c, table) for c in data["components"]))


def saf(f: RecMap) -> SafInvariant:
    """Generalized SAF: ``T_i = sum_v vol_{d,i}(X_v) (x) v_i`` over displacement classes."""
    d = f.dim
    classes: dict[tuple, list[Rectangle]] = {}
    for p in f.moved():
        classes.setdefault(p.shift, []).append(p.domain)
    comps = []
    for i in range(d):
        total = TensorValue(d + 1)
        for shift, boxes in classes.items():
            if shift[i].is_zero():
                continue
            vol = vol_tensor_i(Multirectangle(boxes, dim=d), i)
            total = total + vol.otimes(shift[i])
        comps.append(total)
    return SafInvariant(tuple(comps))


def is_in_derived(f: RecMap) -> bool:
    return saf(f).is_zero()


def is_in_gtg(f: RecMap) -> bool:
    unit = f.table.unit_name
    for comp in saf(f).components:
        for k in comp.coeffs:
            if any(n != unit for n in k[: f.dim - 1]):
                return False
    return True


# ------------------------------------------------------------ isomorphisms


@dataclass(frozen=True)
class NotIsomorphic:
    vol_source: TensorValue
    vol_target: TensorValue

    def __bool__(self):
        return False


class Bijection:
    """Piecewise translation from one multirectangle onto another."""

    __slots__ = ("source", "target", "pieces", "table")

    def __init__(self, source: Multirectangle, target: Multirectangle, pieces: Sequence[Piece], table: SymbolTable):
        self.source = source
        self.target = target
        self.pieces = tuple(pieces)
        self.table = table

    def __repr__(self):
        return f"Bijection(pieces={len(self.pieces)})"

    def validate(self) -> str | None:
        from .recmap import _partition_report

        msg = _partition_report([p.domain for p in self.pieces], self.source, "domains")
        if msg:
            return msg
        return _partition_report([p.image for p in self.pieces], self.target, "images")

    def to_json(self) -> dict:
        return {
            "dim": self.source.dim,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "pieces": [
                {"rect": p.domain.to_json(), "shift": [s.to_json() for s in p.shift]}
                for p in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, data, table: SymbolTable) -> "Bijection":
        dim = int(data["dim"])
        src = Multirectangle.from_json(data["source"], table, dim=dim)
        tgt = Multirectangle.from_json(data["target"], table, dim=dim)
        pieces = [
            Piece(Rectangle.from_json(p["rect"], table), tuple(table.coerce(x) for x in p["shift"]))
            for p in data["pieces"]
        ]
        return cls(src, tgt, pieces, table)


def _axis_bases(boxes: list[Rectangle]) -> list[tuple[list[Scalar], dict]]:
    """Per axis, a Q-free basis and the integer expansion of every side length."""
    from .qfree import simplicial_refine

    out = []
    for axis in range(boxes[0].dim):
        lengths = []
        for r in boxes:
            ell = r.side(axis)
            if ell not in lengths:
                lengths.append(ell)
        ref = simplicial_refine(lengths)
        out.append((list(ref.basis), dict(zip(lengths, ref.expansion))))
    return out


def _blocks(r: Rectangle, bases) -> list[tuple[tuple, tuple, Rectangle]]:
    """Cut a box into blocks ``(type, counts, box)``.

    Along each axis the side is laid out as consecutive runs of equal basis
    lengths; a block is a product of runs, i.e. a grid of ``counts`` cells
    whose cell sides are the basis elements named by ``type``.
    """
    runs = []
    for axis, (basis, expansion) in enumerate(bases):
        pos, row_runs = r.lo[axis], []
        for j, c in enumerate(expansion[r.side(axis)]):
            if c:
                end = pos + basis[j] * c
                row_runs.append((j, c, pos, end))
                pos = end
        runs.append(row_runs)
    out = []
    for combo in product(*runs):
        t = tuple(x[0] for x in combo)
        n = tuple(x[1] for x in combo)
        out.append((t, n, Rectangle([x[2] for x in combo], [x[3] for x in combo], check=False)))
    return out


def _bars(blocks, cell: Sequence[Scalar], axis: int) -> list[tuple[Rectangle, int]]:
    """Slice blocks into bars one cell thick across ``axis``; returns (bar, length in cells)."""
    out = []
    d = len(cell)
    for n, box in blocks:
        ranges = [range(n[k]) if k != axis else range(1) for k in range(d)]
        for off in product(*ranges):
            lo = [box.lo[k] + cell[k] * off[k] if k != axis else box.lo[k] for k in range(d)]
            hi = [lo[k] + cell[k] if k != axis else box.hi[k] for k in range(d)]
            out.append((Rectangle(lo, hi, check=False), n[axis]))
    out.sort(key=lambda b: lex_key(b[0].lo))
    return out


def _match_bars(bars1, bars2, step: Scalar, axis: int) -> list[Piece]:
    """Lay both bar lists end to end along ``axis`` and cut at every break point."""
    pieces = []
    i = j = 0
    used1 = used2 = 0
    while i < len(bars1) and j < len(bars2):
        (b1, n1), (b2, n2) = bars1[i], bars2[j]
        m = min(n1 - used1, n2 - used2)
        lo1 = b1.lo[axis] + step * used1
        lo2 = b2.lo[axis] + step * used2
        dom = b1.with_side(axis, lo1, lo1 + step * m)
        shift = tuple(
            (lo2 - lo1) if k == axis else (b2.lo[k] - b1.lo[k]) for k in range(b1.dim)
        )
        pieces.append(Piece(dom, shift))
        used1 += m
        used2 += m
        if used1 == n1:
            i, used1 = i + 1, 0
        if used2 == n2:
            j, used2 = j + 1, 0
    if i != len(bars1) or j != len(bars2):
        raise ArithmeticError("cell counts differ after refinement")
    return pieces


def _match_blocks(boxes1: list[Rectangle], boxes2: list[Rectangle]) -> list[Piece]:
    """Piecewise translation between two box lists of equal tensor volume.

    Side lengths are expanded in per-axis Q-free bases; blocks of the same
    cell type are then matched bar by bar in lexicographic order.
    """
    bases = _axis_bases(boxes1 + boxes2)
    by_type1: dict[tuple, list] = {}
    by_type2: dict[tuple, list] = {}
    for boxes, by_type in ((boxes1, by_type1), (boxes2, by_type2)):
        for r in boxes:
            for t, n, b in _blocks(r, bases):
                by_type.setdefault(t, []).append((n, b))
    if set(by_type1) != set(by_type2):
        raise ArithmeticError("cell types differ after refinement")
    pieces = []
    for t in sorted(by_type1):
        cell = [bases[k][0][t[k]] for k in range(len(t))]
        l1, l2 = by_type1[t], by_type2[t]
        # bars run along the axis with the most cells, to keep the piece count low
        axis = max(range(len(t)), key=lambda k: (sum(n[k] for n, _ in l1 + l2), -k))
        pieces += _match_bars(_bars(l1, cell, axis), _bars(l2, cell, axis), cell[axis], axis)
    return pieces


def _iso_pieces(R1: Multirectangle, R2: Multirectangle) -> list[Piece]:
    if R1.is_empty():
        return []
    b1, b2 = R1.bounding_box(), R2.bounding_box()
    v = tuple(y - x for x, y in zip(b1.lo, b2.lo))
    if R1.translate(v).same_set(R2):
        return [Piece(r, v) for r in R1]
    return _match_blocks(list(R1), list(R2))


def rec_isomorphism(M1: Multirectangle, M2: Multirectangle) -> "Bijection | NotIsomorphic":
    """Piecewise translation M1 -> M2, or a witness that none exists."""
    if M1.dim != M2.dim:
        raise ValueError("dimensions differ")
    v1, v2 = vol_tensor(M1), vol_tensor(M2)
    if v1 != v2:
        return NotIsomorphic(v1, v2)
    table = (M1.pieces or M2.pieces)[0].lo[0].table if (M1.pieces or M2.pieces) else None
    zero = (table.zero(),) * M1.dim if table else ()
    common = M1.intersect(M2)
    pieces = [Piece(r, zero) for r in common]
    pieces += _iso_pieces(M1.subtract(M2), M2.subtract(M1))
    return Bijection(M1, M2, pieces, table)


def extend_to_ambient(phi: Bijection, M: Multirectangle) -> RecMap:
    """A RecMap of ``M`` agreeing with ``phi`` on its source."""
    if not (M.contains(phi.source) and M.contains(phi.target)):
        raise ValueError("ambient does not contain the source and target")
    rest = rec_isomorphism(M.subtract(phi.source), M.subtract(phi.target))
    if isinstance(rest, NotIsomorphic):
        raise ArithmeticError("complements have different tensor volumes")
    f = RecMap(M, list(phi.pieces) + list(rest.pieces), phi.table)
    msg = rec_validate(f)
    if msg:
        raise ArithmeticError(f"glued map is invalid: {msg}")
    return f
