import json
import subprocess
import sys

import pytest

from rectex.cli import main
from rectex.geometry import Multirectangle
from rectex.io import ScalarList, dumps, load
from rectex.lattice import Lattice
from rectex.recmap import Piece, RecMap
from rectex.scalar import Symbol, SymbolTable

TABLE = SymbolTable.from_spec("sqrt2,sqrt3")


@pytest.fixture
def run(capsys):
    def go(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return go


def write(path, x, table=None):
    path.write_text(dumps(x, table))
    return path


@pytest.fixture
def fmap(tmp_path, run):
    path = tmp_path / "f.json"
    assert run("random", "--dim", 2, "--pieces", 5, "--seed", 3, "--symbols", "sqrt2,sqrt3", "-o", path)[0] == 0
    return path


def test_random_is_deterministic(run, fmap):
    code, out, _ = run("random", "--dim", 2, "--pieces", 5, "--seed", 3, "--symbols", "sqrt2,sqrt3")
    assert code == 0
    assert out == fmap.read_text()


def test_equal_against_resplit(tmp_path, run, fmap):
    f = load(str(fmap)).payload
    pieces = []
    for p in f.pieces:
        r = p.domain
        mid = r.lo[0] + r.side(0) / 2
        pieces += [Piece(r.with_side(0, r.lo[0], mid), p.shift), Piece(r.with_side(0, mid, r.hi[0]), p.shift)]
    g = write(tmp_path / "g.json", RecMap(f.ambient, pieces, f.table))
    code, out, _ = run("equal", fmap, g)
    assert (code, out.strip()) == (0, "equal")


def test_decompose_compose_equal(tmp_path, run, fmap):
    factors = tmp_path / "factors.json"
    assert run("decompose", fmap, "--mode", "shuffles", "-o", factors)[0] == 0
    assert json.loads(factors.read_text())["kind"] == "factors"
    back = tmp_path / "back.json"
    assert run("compose", factors, "-o", back)[0] == 0
    assert run("equal", back, fmap)[0] == 0
    assert run("equal", factors, fmap)[0] == 0


def test_involution_mode(tmp_path, run):
    inv = tmp_path / "inv.json"
    run("random", "--kind", "involution", "--seed", 4, "-o", inv)
    factors = tmp_path / "t.json"
    assert run("decompose", inv, "--mode", "involution", "-o", factors)[0] == 0
    assert run("equal", factors, inv)[0] == 0


def test_not_an_involution(run, fmap):
    assert run("decompose", fmap, "--mode", "involution")[0] == 2


def test_commutator_saf_is_zero(tmp_path, run):
    c = tmp_path / "c.json"
    run("random", "--kind", "commutator", "--seed", 42, "-o", c)
    code, out, _ = run("saf", c)
    assert code == 0
    assert all(comp["coeffs"] == [] for comp in json.loads(out)["components"])
    assert run("derived", c)[0] == 0


def test_invert_and_compose(tmp_path, run, fmap):
    inv = tmp_path / "inv.json"
    run("invert", fmap, "-o", inv)
    prod = tmp_path / "prod.json"
    run("compose", fmap, inv, "-o", prod)
    ident = tmp_path / "id.json"
    run("random", "--pieces", 1, "--symbols", "sqrt2,sqrt3", "-o", ident)
    assert run("equal", prod, ident)[0] == 0


def test_validate(tmp_path, run, fmap):
    assert run("validate", fmap)[0] == 0
    data = json.loads(fmap.read_text())
    data["pieces"].pop()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run("validate", bad)
    assert code == 1 and out.startswith("invalid")


def test_malformed_input_exit_code(tmp_path, run):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run("saf", bad)
    assert code == 2 and "line 1" in err
    assert run("saf", tmp_path / "missing.json")[0] == 2


def test_precision_exhausted_exit_code(tmp_path, run):
    t = SymbolTable([Symbol("1", "unit"), Symbol("x", "opaque", midpoint=1, digits=4)])
    path = write(tmp_path / "s.json", ScalarList((t.symbol("x") - t.rational(1),)), t)
    code, _, err = run("--max-precision-bits", 128, "qfree", path)
    assert code == 3 and "precision" in err


def test_search_budget_exit_code(tmp_path, run):
    from tests.test_qfree import CONE_INPUT

    path = write(tmp_path / "s.json", ScalarList(tuple(TABLE.coerce(x) for x in CONE_INPUT)), TABLE)
    assert run("qfree", path)[0] == 0
    code, _, err = run("--search-budget", 1, "qfree", path)
    assert code == 4 and "budget" in err


def test_membership_and_isomorphism(tmp_path, run, fmap, box, T):
    code, out, _ = run("gtg", fmap)
    assert code in (0, 1) and "GtG" in out
    h = T.symbol("sqrt2", "1/2")
    m1 = write(tmp_path / "m1.json", Multirectangle([box([0, 0], [h, h])]))
    m2 = write(tmp_path / "m2.json", Multirectangle([box([0, 0], ["1/2", 1])]))
    code, out, _ = run("iso", m1, m2)
    assert code == 1 and "not isomorphic" in out
    m3 = write(tmp_path / "m3.json", Multirectangle([box([0, 0], [1, "1/2"])]))
    phi = tmp_path / "phi.json"
    assert run("iso", m2, m3, "-o", phi)[0] == 0
    cube = write(tmp_path / "cube.json", Multirectangle([box([0, 0], [1, 1])]))
    ext = tmp_path / "ext.json"
    assert run("extend", phi, cube, "-o", ext)[0] == 0
    assert run("validate", ext)[0] == 0


def test_fundamental_domain(tmp_path, run, T):
    L = Lattice([[T.rational(1), T.zero()], [T.rational("1/2"), T.rational(1)]], T)
    path = write(tmp_path / "L.json", L)
    code, out, _ = run("fd", "--lattice", path)
    data = json.loads(out)
    assert code == 0 and data["kind"] == "fundamental_domain"
    assert data["volume"]["coeffs"] == [{"tuple": ["1", "1"], "q": "1"}]


def test_flip_round_trip(tmp_path, run):
    F = tmp_path / "F.json"
    run("random", "--kind", "flipmap", "--dim", 2, "--seed", 2, "-o", F)
    G = tmp_path / "G.json"
    assert run("flip-embed", F, "-o", G)[0] == 0
    back = tmp_path / "back.json"
    assert run("flip-unembed", G, "-o", back)[0] == 0
    assert run("equal", back, F)[0] == 0


def test_grid_commands(tmp_path, run, T):
    from rectex.geometry import GridPattern

    Q = write(tmp_path / "q.json", GridPattern([[T.zero(), T.rational("1/4")]], T))
    code, out, _ = run("refine-grid", Q)
    assert code == 0 and len(json.loads(out)["axes"][0]) == 4


def test_render(tmp_path, run, fmap):
    svg = tmp_path / "f.svg"
    assert run("render", fmap, "-o", svg)[0] == 0
    assert svg.read_text().startswith("<?xml")


def test_selftest_filter(run):
    code, out, _ = run("selftest", "--filter", "saf_generators")
    assert code == 0 and out.startswith("[PASS]")


def test_module_entry_point(fmap):
    res = subprocess.run([sys.executable, "-m", "rectex", "validate", str(fmap)], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("valid recmap")
