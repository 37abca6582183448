"""Smoke test for the spacefill_py extension module.

Build and install first:
    pip install --no-build-isolation ./crates/spacefill-py
then run with pytest or directly with python.
"""

import json
from fractions import Fraction
from pathlib import Path

import spacefill_py as sf

FIXTURES = Path(__file__).resolve().parent.parent / "crates" / "spacefill" / "fixtures"


def test_cube_basics():
    c = sf.Cube(2, 2, 3, [2, 5])
    assert c.depth == 3 and c.coords == [2, 5]
    assert c.volume() == Fraction(1, 64)
    assert c.parent() == sf.Cube(2, 2, 2, [1, 2])
    assert len(c.children()) == 4
    assert sf.Cube.root(2, 2).contains(c)
    assert str(c) == "l3(2,5)"


def test_grid_and_curve():
    g = sf.Grid.regular(2, 2, 3)
    assert len(g) == 64
    h = sf.Curve("hilbert2d", 2, 2)
    order = h.order(g)
    assert len(order) == 64 and h.is_continuous_on(g)
    assert h.compare(order[0], order[1]) == "before"
    assert not sf.Curve("morton", 2, 2).is_continuous_on(g)
    assert sf.Grid.from_json(g.to_json()) == g
    finer = g.subdivide(order[0])
    assert finer.refines(g) and not g.refines(finer)


def test_example_p_classification():
    p = sf.Partition.from_json((FIXTURES / "example_p.json").read_text())
    view = p.classify()
    assert len(view["preclassified"]) == 12
    assert len(view["classified"]) == 15
    assert view["histogram"] == [1, 8, 6]
    assert sum(view["classes"].values()) == 20
    m = sf.measure(p.cells, p.grid)
    assert (m["dv"], m["ds"]) == (3, 11)
    assert sf.measure(p.cells, p.grid, c=2)["ds"] == 6


def test_generators_and_analysis():
    k22 = sf.class_regular(2, 2, 2, 2, 4)
    m = sf.measure(k22.cells, k22)
    assert (m["dv"], m["ds"]) == (13, 14)
    cantor = sf.cantor_grid(2)
    assert len(cantor) == 8 * 4 - 7
    assert sf.rho(2, 2) == Fraction(1, 3)
    root = [sf.Cube.root(2, 2)]
    assert sf.gamma(root, 6) == 20
    r = sf.vcsc(root, 8, 2)
    assert (r["V"], r["S"]) == (88, 64)
    h = sf.befill(root, 25, 3, sf.Curve("hilbert2d", 2, 2))
    assert len(h) == 25
    rows = sf.reproduce_table(3)
    assert all(row["matches"] for row in rows)


def test_random_partition_round_trip():
    c = sf.Curve("peano", 3, 2)
    p = sf.Partition.random(c, 7, 4, 3)
    q = sf.Partition.from_json(p.to_json())
    assert q.cells == p.cells
    assert json.loads(p.to_json())["curve"] == "peano"


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"{name}: ok")
