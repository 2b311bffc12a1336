"""Exact lengths: a finite-dimensional Q-vector space embedded in the reals.

Every coordinate, side length and translation component is a :class:`Scalar`,
a rational combination of the symbols of a :class:`SymbolTable`.  Symbols are
the rational unit ``1``, square roots of squarefree integers, or opaque reals
given by a decimal midpoint and a number of trusted digits.

Arithmetic is coefficient-wise and exact.  Ordering questions are answered by
interval evaluation at escalating binary precision; for unit and square-root
symbols this always terminates, for opaque symbols it may raise
:class:`PrecisionExhausted`.
"""

from __future__ import annotations

import contextlib
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

__all__ = [
    "PrecisionExhausted",
    "SymbolMismatch",
    "Symbol",
    "SymbolTable",
    "Scalar",
    "parse_rational",
    "scalar_sign",
    "compare",
    "smax",
    "smin",
    "sign_of_products",
    "max_precision_bits",
    "set_max_precision_bits",
    "precision_cap",
]

UNIT = "unit"
SQRT = "sqrt"
OPAQUE = "opaque"

_START_BITS = 64
_max_bits = 4096


class PrecisionExhausted(ArithmeticError):
    """The sign of an expression involving opaque symbols could not be resolved."""


class SymbolMismatch(ValueError):
    """Operands were built over different symbol tables."""


def max_precision_bits() -> int:
    return _max_bits


def set_max_precision_bits(bits: int) -> None:
    global _max_bits
    if bits < _START_BITS:
        raise ValueError(f"precision cap must be at least {_START_BITS} bits")
    _max_bits = int(bits)
    _sign_cached.cache_clear()
    _compare_cached.cache_clear()


@contextlib.contextmanager
def precision_cap(bits: int):
    old = _max_bits
    set_max_precision_bits(bits)
    try:
        yield
    finally:
        set_max_precision_bits(old)


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, an integer, or a decimal string into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip())
    raise TypeError(f"cannot read a rational from {text!r}")


def _fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _is_squarefree(m: int) -> bool:
    if m < 2:
        return False
    p = 2
    while p * p <= m:
        if m % (p * p) == 0:
            return False
        p += 1
    return True


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: str
    radicand: int = 0
    midpoint: Fraction = Fraction(0)
    digits: int = 0

    def __post_init__(self):
        if self.kind not in (UNIT, SQRT, OPAQUE):
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if self.kind == SQRT and not _is_squarefree(self.radicand):
            raise ValueError(f"sqrt symbol {self.name!r} needs a squarefree radicand > 1")
        if self.kind == OPAQUE and self.digits <= 0:
            raise ValueError(f"opaque symbol {self.name!r} needs a positive digit count")

    def enclosure(self, bits: int) -> tuple[int, int]:
        """Integers ``lo <= value * 2**bits <= hi``."""
        if self.kind == UNIT:
            one = 1 << bits
            return one, one
        if self.kind == SQRT:
            s = math.isqrt(self.radicand << (2 * bits))
            return s, s + 1
        radius = Fraction(1, 10 ** self.digits)
        scale = 1 << bits
        lo = (self.midpoint - radius) * scale
        hi = (self.midpoint + radius) * scale
        return math.floor(lo), math.ceil(hi)

    def to_json(self) -> dict:
        if self.kind == UNIT:
            return {"name": self.name, "kind": UNIT}
        if self.kind == SQRT:
            return {"name": self.name, "kind": SQRT, "m": self.radicand}
        return {
            "name": self.name,
            "kind": OPAQUE,
            "value": _fmt_rational(self.midpoint),
            "digits": self.digits,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Symbol":
        kind = data["kind"]
        if kind == UNIT:
            return cls(data["name"], UNIT)
        if kind == SQRT:
            return cls(data["name"], SQRT, radicand=int(data["m"]))
        return cls(
            data["name"],
            OPAQUE,
            midpoint=parse_rational(str(data["value"])),
            digits=int(data["digits"]),
        )


_SQRT_NAME = re.compile(r"^sqrt(\d+)$")


class SymbolTable:
    """Ordered, immutable set of symbols; always contains the unit ``"1"``.

    Independence over Q of the declared symbols is a theorem for unit and
    square-root symbols and a recorded user assertion for opaque ones.
    """

    __slots__ = ("symbols", "names", "index", "_hash", "has_opaque", "_zero", "unit_name", "unit_index")

    def __init__(self, symbols: Iterable[Symbol]):
        symbols = tuple(symbols)
        names = tuple(s.name for s in symbols)
        if len(set(names)) != len(names):
            raise ValueError("symbol names must be unique")
        units = [s for s in symbols if s.kind == UNIT]
        if len(units) != 1:
            raise ValueError("a symbol table needs exactly one unit symbol")
        radicands = [s.radicand for s in symbols if s.kind == SQRT]
        if len(set(radicands)) != len(radicands):
            raise ValueError("sqrt radicands must be pairwise distinct")
        self.symbols = symbols
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}
        self._hash = hash(symbols)
        self.has_opaque = any(s.kind == OPAQUE for s in symbols)
        self._zero = None
        self.unit_name = units[0].name
        self.unit_index = self.index[self.unit_name]

    @classmethod
    def from_spec(cls, spec: str | Sequence[str] = ()) -> "SymbolTable":
        """Build ``1`` plus square roots from names like ``"sqrt2,sqrt3"``."""
        if isinstance(spec, str):
            spec = [p for p in (x.strip() for x in spec.split(",")) if p]
        symbols = [Symbol("1", UNIT)]
        for name in spec:
            if name == "1":
                continue
            m = _SQRT_NAME.match(name)
            if not m:
                raise ValueError(f"cannot infer a symbol from {name!r}; use sqrtN")
            symbols.append(Symbol(name, SQRT, radicand=int(m.group(1))))
        return cls(symbols)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return self is other or (
            isinstance(other, SymbolTable) and self.symbols == other.symbols
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"SymbolTable({', '.join(self.names)})"

    def zero(self) -> "Scalar":
        if self._zero is None:
            self._zero = Scalar(self, (Fraction(0),) * len(self.symbols))
        return self._zero

    def rational(self, q) -> "Scalar":
        c = [Fraction(0)] * len(self.symbols)
        c[self.unit_index] = parse_rational(q)
        return Scalar(self, tuple(c))

    def symbol(self, name: str, coeff=1) -> "Scalar":
        c = [Fraction(0)] * len(self.symbols)
        c[self.index[name]] = parse_rational(coeff)
        return Scalar(self, tuple(c))

    def scalar(self, coeffs: Mapping[str, object]) -> "Scalar":
        """Build a scalar from ``{"1": "3/4", "sqrt2": "-1/8"}``."""
        c = [Fraction(0)] * len(self.symbols)
        for name, q in coeffs.items():
            if name not in self.index:
                raise KeyError(f"undeclared symbol {name!r}")
            c[self.index[name]] += parse_rational(q)
        return Scalar(self, tuple(c))

    def coerce(self, x) -> "Scalar":
        if isinstance(x, Scalar):
            if x.table != self:
                raise SymbolMismatch("scalar belongs to another symbol table")
            return x
        if isinstance(x, Mapping):
            return self.scalar(x)
        return self.rational(x)

    def to_json(self) -> list:
        return [s.to_json() for s in self.symbols]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "SymbolTable":
        return cls(Symbol.from_json(d) for d in data)


class Scalar:
    """Immutable rational combination of the symbols of one table.

    Coefficients are stored densely, aligned with the table; the sparse view
    (:attr:`coeffs`) never contains zeros.
    """

    __slots__ = ("table", "c", "_hash", "_f", "_fa")

    def __init__(self, table: SymbolTable, c: tuple):
        self.table = table
        self.c = c
        self._hash = None
        self._f = None
        self._fa = 0.0

    @property
    def coeffs(self) -> dict[str, Fraction]:
        return {n: q for n, q in zip(self.table.names, self.c) if q}

    def _other(self, other) -> "Scalar | None":
        if isinstance(other, Scalar):
            if other.table is not self.table and other.table != self.table:
                raise SymbolMismatch("scalars from different symbol tables")
            return other
        if isinstance(other, (int, Fraction)):
            return self.table.rational(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        # most coefficients are zero; skip the Fraction arithmetic for them
        if not any(o.c):
            return self
        return Scalar(self.table, tuple(a + b if b else a for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return Scalar(self.table, tuple(a - b if b else a for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return Scalar(self.table, tuple(-a if a else a for a in self.c))

    def __mul__(self, q):
        if isinstance(q, (int, Fraction)):
            return Scalar(self.table, tuple(a * q if a else a for a in self.c))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, q):
        if isinstance(q, (int, Fraction)):
            q = Fraction(q)
            return Scalar(self.table, tuple(a / q for a in self.c))
        return NotImplemented

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is Scalar and other.table is self.table:
            h1, h2 = self._hash, other._hash
            if h1 is not None and h2 is not None and h1 != h2:
                return False
            return self.c == other.c
        o = self._other(other) if isinstance(other, (Scalar, int, Fraction)) else None
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash(self.c)
        return h

    def __lt__(self, other):
        return compare(self, self._other(other)) < 0

    def __le__(self, other):
        return compare(self, self._other(other)) <= 0

    def __gt__(self, other):
        return compare(self, self._other(other)) > 0

    def __ge__(self, other):
        return compare(self, self._other(other)) >= 0

    def __bool__(self):
        return any(self.c)

    def is_zero(self) -> bool:
        return not any(self.c)

    def sign(self) -> int:
        return scalar_sign(self)

    def is_rational(self) -> bool:
        u = self.table.unit_index
        return all(not q for i, q in enumerate(self.c) if i != u)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c[self.table.unit_index]

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        lo, hi = _enclose(self.table, self.c, bits)
        return lo, hi

    def floor(self) -> int:
        """Exact floor of the embedded real value."""
        if self.is_rational():
            return math.floor(self.rational_value())
        bits = _START_BITS
        while True:
            lo, hi = _enclose(self.table, self.c, bits)
            fl, fh = math.floor(lo), math.floor(hi)
            if fl == fh and hi != fh:
                return fl
            if bits >= _max_bits and self.table.has_opaque:
                raise PrecisionExhausted(f"cannot resolve floor of {self}")
            bits *= 2

    def __float__(self):
        if self._f is None:
            self._approx()
        return self._f

    def _approx(self) -> None:
        """Float value plus the sum of absolute term values (a rounding-error scale)."""
        total = 0.0
        mag = 0.0
        for sym, q in zip(self.table.symbols, self.c):
            if not q:
                continue
            if sym.kind == UNIT:
                v = 1.0
            elif sym.kind == SQRT:
                v = math.sqrt(sym.radicand)
            else:
                v = float(sym.midpoint)
            t = float(q) * v
            total += t
            mag += abs(t)
        self._fa = mag
        self._f = total

    def to_json(self) -> dict:
        return {n: _fmt_rational(q) for n, q in zip(self.table.names, self.c) if q}

    def __repr__(self):
        terms = []
        for n, q in zip(self.table.names, self.c):
            if not q:
                continue
            terms.append(_fmt_rational(q) if n == self.table.unit_name else f"{_fmt_rational(q)}*{n}")
        return "Scalar(" + (" + ".join(terms) if terms else "0") + ")"


def _enclose(table: SymbolTable, c: tuple, bits: int) -> tuple[Fraction, Fraction]:
    den = 1
    for q in c:
        if q:
            den = den * q.denominator // math.gcd(den, q.denominator)
    lo = hi = 0
    for sym, q in zip(table.symbols, c):
        if not q:
            continue
        n = q.numerator * (den // q.denominator)
        a, b = sym.enclosure(bits)
        if n > 0:
            lo += n * a
            hi += n * b
        else:
            lo += n * b
            hi += n * a
    scale = den << bits
    return Fraction(lo, scale), Fraction(hi, scale)


@lru_cache(maxsize=1 << 18)
def _sign_cached(table: SymbolTable, c: tuple) -> int:
    nz = [(sym, q) for sym, q in zip(table.symbols, c) if q]
    if not nz:
        return 0
    if len(nz) == 1 and nz[0][0].kind != OPAQUE:
        return 1 if nz[0][1] > 0 else -1
    den = 1
    for _, q in nz:
        den = den * q.denominator // math.gcd(den, q.denominator)
    ints = [(sym, q.numerator * (den // q.denominator)) for sym, q in nz]
    opaque = any(sym.kind == OPAQUE for sym, _ in ints)
    bits = _START_BITS
    while True:
        lo = hi = 0
        for sym, n in ints:
            a, b = sym.enclosure(bits)
            if n > 0:
                lo += n * a
                hi += n * b
            else:
                lo += n * b
                hi += n * a
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if bits >= _max_bits and opaque:
            raise PrecisionExhausted(
                "sign undecided at the precision cap; opaque data cannot resolve the comparison"
            )
        bits *= 2


def scalar_sign(s: Scalar) -> int:
    """Sign of the embedded real value of ``s``: -1, 0 or +1."""
    return _sign_cached(s.table, s.c)


@lru_cache(maxsize=1 << 18)
def _compare_cached(a: Scalar, b: Scalar) -> int:
    return _sign_cached(a.table, tuple(x - y for x, y in zip(a.c, b.c)))


def compare(a: Scalar, b: Scalar) -> int:
    """Sign of ``a - b``."""
    if a is b or a.c == b.c:
        return 0
    if not a.table.has_opaque:
        # Floats decide when the gap dwarfs the accumulated rounding error.
        fa, fb = float(a), float(b)
        gap = fa - fb
        err = 1e-12 * (a._fa + b._fa) + 1e-300
        if gap > err:
            return 1
        if gap < -err:
            return -1
    return _compare_cached(a, b)


def smax(a: Scalar, b: Scalar) -> Scalar:
    return a if compare(a, b) >= 0 else b


def smin(a: Scalar, b: Scalar) -> Scalar:
    return a if compare(a, b) <= 0 else b


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``n = s*s*r`` and ``r`` squarefree."""
    s, r, p = 1, 1, 2
    while p * p <= n:
        while n % (p * p) == 0:
            n //= p * p
            s *= p
        if n % p == 0:
            n //= p
            r *= p
        p += 1
    return s, r * n


def sign_of_products(terms: Iterable[tuple[object, Sequence[Scalar]]]) -> int:
    """Sign of ``sum(coef * prod(factors))`` for scalars of one table.

    Products of square roots are reduced to ``q * sqrt(r)`` with ``r``
    squarefree, so for unit/sqrt tables the distinct radicals are
    independent and the evaluation terminates.  Opaque factors are carried
    as formal monomials and evaluated by interval arithmetic.
    """
    monomials: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    table = None
    for coef, factors in terms:
        coef = parse_rational(coef)
        expansions = [((1, ()), coef)]
        for f in factors:
            table = f.table if table is None else table
            nxt = []
            for (rad, opq), q in expansions:
                for sym_i, (sym, c) in enumerate(zip(f.table.symbols, f.c)):
                    if not c:
                        continue
                    if sym.kind == UNIT:
                        nxt.append(((rad, opq), q * c))
                    elif sym.kind == SQRT:
                        s, r = _squarefree_split(rad * sym.radicand)
                        nxt.append(((r, opq), q * c * s))
                    else:
                        nxt.append(((rad, tuple(sorted(opq + (sym_i,)))), q * c))
            expansions = nxt
        for key, q in expansions:
            monomials[key] = monomials.get(key, Fraction(0)) + q
    monomials = {k: q for k, q in monomials.items() if q}
    if not monomials:
        return 0
    has_opaque = any(opq for _, opq in monomials)
    bits = _START_BITS
    while True:
        lo = hi = Fraction(0)
        for (rad, opq), q in monomials.items():
            s = math.isqrt(rad << (2 * bits))
            a = Fraction(s, 1 << bits)
            b = a if s * s == (rad << (2 * bits)) else Fraction(s + 1, 1 << bits)
            for i in opq:
                sym = table.symbols[i]
                radius = Fraction(1, 10 ** sym.digits)
                ends = [x * y for x in (a, b) for y in (sym.midpoint - radius, sym.midpoint + radius)]
                a, b = min(ends), max(ends)
            if q > 0:
                lo += q * a
                hi += q * b
            else:
                lo += q * b
                hi += q * a
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if bits >= _max_bits and has_opaque:
            raise PrecisionExhausted("sign of product expression undecided at the precision cap")
        bits *= 2
