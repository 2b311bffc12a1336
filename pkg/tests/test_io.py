import json
import xml.etree.ElementTree as ET

import pytest

from rectex.decompose import decompose_shuffles
from rectex.geometry import GridPattern, Multirectangle, RectPartition
from rectex.invariants import rec_isomorphism, saf, vol_tensor
from rectex.io import (
    DocumentError,
    FactorList,
    FundamentalDomain,
    ScalarList,
    dumps,
    load,
    loads,
    save,
)
from rectex.lattice import Lattice, fundamental_domain
from rectex.qfree import simplicial_refine
from rectex.recmap import flip_equal, identity, mk_transposition, rec_equal
from rectex.sampling import random_commutator, random_flipmap, random_recmap
from rectex.scalar import SymbolTable
from rectex.svg import render_svg


def payloads(T, box):
    f = random_recmap(2, 5, 7, T)
    s = T.symbol("sqrt2", "1/2")
    M = Multirectangle([box([0, 0], ["1/2", 1]), box(["1/2", 0], [1, s])])
    L = Lattice([[T.rational(1), T.zero()], [T.rational("1/2"), T.symbol("sqrt3")]], T)
    D = fundamental_domain(L)
    return [
        f,
        random_flipmap(2, 3, T),
        RectPartition(Multirectangle([box([0], [1])]), [box([0], [s]), box([s], [1])]),
        M,
        GridPattern([[T.zero(), s], [T.zero()]], T),
        box([0, 0], [s, 1]),
        L,
        vol_tensor(M),
        saf(f),
        rec_isomorphism(Multirectangle([box([0, 0], ["1/2", 1])]), Multirectangle([box([0, 0], [1, "1/2"])])),
        FactorList(2, tuple(decompose_shuffles(f))),
        ScalarList((T.rational(3), s)),
        simplicial_refine([T.rational(1), s, T.rational(1) + s]),
        FundamentalDomain(L, D, vol_tensor(D)),
    ]


def test_round_trips_are_byte_stable(T, box):
    kinds = set()
    for x in payloads(T, box):
        text = dumps(x, T)
        doc = loads(text, T)
        kinds.add(doc.kind)
        assert doc.table is T
        assert dumps(doc.payload, T) == text
    assert len(kinds) == 14


def test_structural_equality_after_load(T, box):
    f = random_recmap(2, 5, 7, T)
    g = loads(dumps(f)).payload
    assert rec_equal(g, f)
    F = random_flipmap(2, 3, T)
    assert flip_equal(loads(dumps(F), T).payload, F)


def test_document_layout(T):
    data = json.loads(dumps(identity(1, T)))
    assert data["format"] == "rectex" and data["version"] == 1 and data["kind"] == "recmap"
    assert data["symbols"][0] == {"name": "1", "kind": "unit"}
    assert data["pieces"][0]["shift"] == [{}]


def test_save_and_load(tmp_path, T):
    path = tmp_path / "f.json"
    save(identity(2, T), str(path))
    assert load(str(path)).kind == "recmap"


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.pop("kind"), "kind"),
        (lambda d: d.update(version=9), "version"),
        (lambda d: d.update(kind="teapot"), "teapot"),
        (lambda d: d["pieces"].pop(), "cover"),
        (lambda d: d.update(symbols=[{"name": "1", "kind": "sqrt", "m": 4}]), "symbols"),
    ],
)
def test_invalid_documents(T, mutate, message):
    data = json.loads(dumps(random_recmap(1, 3, 1, T)))
    mutate(data)
    with pytest.raises(DocumentError, match=message):
        loads(json.dumps(data))


def test_malformed_json_names_location():
    with pytest.raises(DocumentError, match="line 1"):
        loads("{not json")


def test_symbol_table_mismatch(T):
    other = SymbolTable.from_spec("sqrt7")
    with pytest.raises(DocumentError, match="symbols"):
        loads(dumps(identity(1, T)), other)


def test_seeded_generation_is_byte_stable(T):
    assert dumps(random_recmap(2, 6, 5, T)) == dumps(random_recmap(2, 6, 5, T))
    assert dumps(random_commutator(2, 4, 42, T)) == dumps(random_commutator(2, 4, 42, T))


def test_single_piece_is_identity(T):
    f = random_recmap(2, 1, 9, T)
    assert rec_equal(f, identity(2, T))


def test_svg_output(T, box):
    tau = mk_transposition(box([0, 0], ["1/4", "1/4"]), box(["1/2", 0], ["3/4", "1/4"]))
    root = ET.fromstring(render_svg(tau))
    assert root.tag.endswith("svg")
    rects = [e for e in root.iter() if e.tag.endswith("rect")]
    # two frames plus a source and an arrival box per piece
    assert len(rects) == 2 + 2 * len(tau.pieces)
    assert render_svg(tau) == render_svg(tau)
    ident = ET.fromstring(render_svg(identity(2, T)))
    assert len([e for e in ident.iter() if e.tag.endswith("rect")]) == 4


def test_svg_needs_dimension_two(T):
    with pytest.raises(ValueError):
        render_svg(identity(1, T))
