"""Versioned, self-describing JSON documents for every payload kind.

A document is a JSON object::

    {"format": "rectex", "version": 1, "kind": "recmap",
     "symbols": [...], ...payload fields...}

The payload fields are merged into the top level, so a RecMap document reads
``{"dim", "symbols", "ambient", "pieces"}``.  Payloads are validated on load.
Output is byte-stable: keys keep a fixed order and scalars are written in
symbol-table order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

from .geometry import GridPattern, Multirectangle, Rectangle, RectPartition
from .invariants import Bijection, SafInvariant, TensorValue
from .lattice import Lattice
from .qfree import SimplicialRefinement
from .recmap import FlipMap, RecMap, Shuffle, Transposition, flip_validate, rec_validate
from .scalar import Scalar, SymbolTable

__all__ = [
    "FORMAT",
    "VERSION",
    "DocumentError",
    "FactorList",
    "ScalarList",
    "FundamentalDomain",
    "Document",
    "dump_document",
    "dumps",
    "loads",
    "load",
    "save",
]

FORMAT = "rectex"
VERSION = 1


class DocumentError(ValueError):
    """Malformed document; the message names the offending location."""


@dataclass(frozen=True)
class FactorList:
    """Factors in composition order: the last one acts first."""

    dim: int
    factors: tuple

    def to_json(self) -> dict:
        return {"dim": self.dim, "factors": [f.to_json() for f in self.factors]}


@dataclass(frozen=True)
class ScalarList:
    values: tuple


@dataclass(frozen=True)
class FundamentalDomain:
    lattice: Lattice
    domain: Multirectangle
    volume: TensorValue


@dataclass(frozen=True)
class Document:
    table: SymbolTable
    kind: str
    payload: Any


def _kind_of(x) -> str:
    for cls, name in _KINDS:
        if isinstance(x, cls):
            return name
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _payload_json(kind: str, x) -> dict:
    if kind in ("recmap", "flipmap", "tensor", "saf", "bijection", "lattice", "factors", "rectangle"):
        return x.to_json()
    if kind == "multirectangle":
        return {"dim": x.dim, "rects": x.to_json()}
    if kind == "partition":
        return {"dim": x.dim, "target": x.target.to_json(), "cells": [c.to_json() for c in x.cells]}
    if kind == "grid":
        return {"dim": x.dim, "axes": x.to_json()}
    if kind == "scalars":
        return {"scalars": [s.to_json() for s in x.values]}
    if kind == "refinement":
        return x.to_json()
    if kind == "fundamental_domain":
        return {
            "dim": x.lattice.dim,
            "basis": x.lattice.to_json()["basis"],
            "domain": x.domain.to_json(),
            "volume": x.volume.to_json(),
        }
    raise TypeError(kind)


def _table_of(x) -> SymbolTable | None:
    for attr in ("table",):
        t = getattr(x, attr, None)
        if isinstance(t, SymbolTable):
            return t
    if isinstance(x, Rectangle) and x.dim:
        return x.lo[0].table
    if isinstance(x, Multirectangle):
        for r in x:
            return _table_of(r)
    if isinstance(x, RectPartition):
        return _table_of(x.target)
    if isinstance(x, ScalarList) and x.values:
        return x.values[0].table
    if isinstance(x, SimplicialRefinement) and x.basis:
        return x.basis[0].table
    if isinstance(x, FundamentalDomain):
        return x.lattice.table
    if isinstance(x, FactorList):
        for f in x.factors:
            return _table_of(f.box if isinstance(f, Shuffle) else f.P)
    return None


def dump_document(x, table: SymbolTable | None = None) -> dict:
    kind = _kind_of(x)
    table = table or _table_of(x)
    if table is None:
        raise DocumentError("a symbol table is required for this payload")
    doc = {"format": FORMAT, "version": VERSION, "kind": kind, "symbols": table.to_json()}
    body = _payload_json(kind, x)
    doc.update(body)
    return doc


def dumps(x, table: SymbolTable | None = None) -> str:
    return json.dumps(dump_document(x, table), indent=1, ensure_ascii=False) + "\n"


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise DocumentError(f"{where}: missing field {key!r}")
    return data[key]


def _factor_from_json(item: dict, table: SymbolTable, where: str):
    kind = _require(item, "kind", where)
    if kind == "shuffle":
        return Shuffle.from_json(item, table)
    if kind == "transposition":
        return Transposition.from_json(item, table)
    raise DocumentError(f"{where}: unknown factor kind {kind!r}")


def _payload_from(kind: str, data: dict, table: SymbolTable):
    if kind == "recmap":
        f = RecMap.from_json(data, table)
        msg = rec_validate(f)
        if msg:
            raise DocumentError(f"payload: {msg}")
        return f
    if kind == "flipmap":
        F = FlipMap.from_json(data, table)
        msg = flip_validate(F)
        if msg:
            raise DocumentError(f"payload: {msg}")
        return F
    if kind == "multirectangle":
        return Multirectangle.from_json(_require(data, "rects", "payload"), table, dim=int(_require(data, "dim", "payload")))
    if kind == "partition":
        dim = int(_require(data, "dim", "payload"))
        target = Multirectangle.from_json(_require(data, "target", "payload"), table, dim=dim)
        return RectPartition(target, [Rectangle.from_json(c, table) for c in _require(data, "cells", "payload")])
    if kind == "grid":
        return GridPattern.from_json(_require(data, "axes", "payload"), table)
    if kind == "rectangle":
        return Rectangle.from_json(data, table)
    if kind == "lattice":
        return Lattice.from_json(data, table)
    if kind == "tensor":
        return TensorValue.from_json(data, table)
    if kind == "saf":
        return SafInvariant.from_json(data, table)
    if kind == "bijection":
        b = Bijection.from_json(data, table)
        msg = b.validate()
        if msg:
            raise DocumentError(f"payload: {msg}")
        return b
    if kind == "factors":
        items = _require(data, "factors", "payload")
        fs = tuple(_factor_from_json(it, table, f"factors[{i}]") for i, it in enumerate(items))
        return FactorList(int(_require(data, "dim", "payload")), fs)
    if kind == "scalars":
        return ScalarList(tuple(table.coerce(s) for s in _require(data, "scalars", "payload")))
    if kind == "refinement":
        basis = tuple(table.coerce(s) for s in _require(data, "basis", "payload"))
        expansion = tuple(tuple(int(c) for c in row) for row in _require(data, "expansion", "payload"))
        return SimplicialRefinement(basis, expansion)
    if kind == "fundamental_domain":
        dim = int(_require(data, "dim", "payload"))
        L = Lattice.from_json({"dim": dim, "basis": _require(data, "basis", "payload")}, table)
        M = Multirectangle.from_json(_require(data, "domain", "payload"), table, dim=dim)
        return FundamentalDomain(L, M, TensorValue.from_json(_require(data, "volume", "payload"), table))
    raise DocumentError(f"unknown document kind {kind!r}")


def parse_document(data, table: SymbolTable | None = None) -> Document:
    """Build the payload; with ``table`` given, the document must declare the same symbols."""
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    if data.get("format", FORMAT) != FORMAT:
        raise DocumentError(f"format: expected {FORMAT!r}")
    version = data.get("version", VERSION)
    if version != VERSION:
        raise DocumentError(f"version: unsupported version {version!r}")
    kind = _require(data, "kind", "document")
    try:
        declared = SymbolTable.from_json(_require(data, "symbols", "document"))
    except (KeyError, TypeError, ValueError) as e:
        raise DocumentError(f"symbols: {e}") from e
    if table is None:
        table = declared
    elif declared != table:
        raise DocumentError("symbols: the document declares a different symbol table")
    try:
        payload = _payload_from(kind, data, table)
    except DocumentError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise DocumentError(f"{kind} payload: {type(e).__name__}: {e}") from e
    return Document(table, kind, payload)


def loads(text: str, table: SymbolTable | None = None) -> Document:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_document(data, table)


def load(path: str, table: SymbolTable | None = None) -> Document:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return loads(text, table)
    except DocumentError as e:
        raise DocumentError(f"{path}: {e}") from e


def save(x, path: str, table: SymbolTable | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(x, table))


_KINDS: Sequence[tuple[type, str]] = (
    (RecMap, "recmap"),
    (FlipMap, "flipmap"),
    (RectPartition, "partition"),
    (Multirectangle, "multirectangle"),
    (GridPattern, "grid"),
    (Rectangle, "rectangle"),
    (Lattice, "lattice"),
    (TensorValue, "tensor"),
    (SafInvariant, "saf"),
    (Bijection, "bijection"),
    (FactorList, "factors"),
    (ScalarList, "scalars"),
    (SimplicialRefinement, "refinement"),
    (FundamentalDomain, "fundamental_domain"),
)
