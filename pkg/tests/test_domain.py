import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privhp.domain import ROOT, HypercubeDomain, SubdomainIndex, key_code


def test_locate_unit_interval():
    dom = HypercubeDomain(1)
    assert dom.locate((0.3,), 2).bits == "01"
    assert dom.locate((0.0,), 3).bits == "000"
    assert dom.locate((0.5,), 1).bits == "1"
    assert dom.locate((0.25,), 2).bits == "01"


def test_locate_top_face_is_closed():
    dom = HypercubeDomain(1)
    assert dom.locate((1.0,), 3).bits == "111"
    dom2 = HypercubeDomain(2)
    assert dom2.locate((1.0, 1.0), 4).bits == "1111"


def test_locate_square_round_robin():
    # level l+1 cuts coordinate l mod d
    dom = HypercubeDomain(2)
    assert dom.locate((0.6, 0.2), 1).bits == "1"
    assert dom.locate((0.6, 0.2), 2).bits == "10"
    assert dom.locate((0.6, 0.2), 4).bits == "1000"


def test_locate_level_zero_is_root():
    assert HypercubeDomain(3).locate((0.1, 0.9, 0.5), 0) == ROOT


def test_locate_rejects_out_of_range_coordinate():
    with pytest.raises(ValueError, match="coordinate 1"):
        HypercubeDomain(2).locate((0.5, 1.5), 3)
    with pytest.raises(ValueError, match="coordinate 0"):
        HypercubeDomain(1).locate((-0.01,), 1)


def test_locate_rejects_wrong_arity():
    with pytest.raises(ValueError):
        HypercubeDomain(2).locate((0.5,), 1)


def test_bounds_interval():
    dom = HypercubeDomain(1)
    lo, hi = dom.subdomain_bounds(SubdomainIndex("01"))
    assert lo == (0.25,) and hi == (0.5,)
    lo, hi = dom.subdomain_bounds(ROOT)
    assert lo == (0.0,) and hi == (1.0,)


def test_bounds_square():
    dom = HypercubeDomain(2)
    lo, hi = dom.subdomain_bounds(SubdomainIndex("10"))
    assert lo == (0.5, 0.0) and hi == (1.0, 0.5)
    lo, hi = dom.subdomain_bounds(SubdomainIndex("101"))
    assert lo == (0.75, 0.0) and hi == (1.0, 0.5)


def test_diameter_is_widest_axis():
    assert HypercubeDomain(1).diameter(SubdomainIndex("010")) == 0.125
    assert HypercubeDomain(2).diameter(SubdomainIndex("101")) == 0.5
    assert HypercubeDomain(3).diameter(SubdomainIndex("0110100")) == 0.25
    assert HypercubeDomain(4).diameter(ROOT) == 1.0


def test_geometry_square():
    g = HypercubeDomain(2).geometry(4)
    assert g.gamma == (1.0, 1.0, 0.5, 0.5, 0.25)
    assert g.Gamma == (1.0, 2.0, 2.0, 4.0, 4.0)
    assert g.Gamma_prev(0) == g.Gamma[0]
    assert g.gamma_prev(3) == 0.5


def test_geometry_matches_diameter():
    for d in (1, 2, 3):
        dom = HypercubeDomain(d)
        g = dom.geometry(9)
        for l in range(10):
            idx = dom.locate(tuple([0.3] * d), l)
            assert g.gamma[l] == dom.diameter(idx)


@settings(deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 12), st.integers(1, 3))
def test_index_prefixes_nest(x, y, level, d):
    """The level-l index is a prefix of the level-L index: cells nest."""
    dom = HypercubeDomain(d)
    point = ((x, y, 0.5))[:d]
    deep = dom.locate(point, level).bits
    for l in range(level):
        assert dom.locate(point, l).bits == deep[:l]


@settings(deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.integers(0, 10), st.integers(1, 2))
def test_located_cell_contains_point(x, y, level, d):
    dom = HypercubeDomain(d)
    point = ((x, y))[:d]
    lo, hi = dom.subdomain_bounds(dom.locate(point, level))
    for c in range(d):
        assert lo[c] <= point[c]
        assert point[c] < hi[c] or (hi[c] == 1.0 and point[c] == 1.0)


def test_level_cells_tile_domain(rng):
    """Each point belongs to exactly one cell per level."""
    for d in (1, 2, 3):
        dom = HypercubeDomain(d)
        level = int(rng.integers(1, 7))
        for point in rng.random((25, d)):
            hits = 0
            for v in range(1 << level):
                lo, hi = dom.subdomain_bounds(SubdomainIndex.from_int(level, v))
                if all(lo[c] <= point[c] < hi[c] for c in range(d)):
                    hits += 1
            assert hits == 1


def test_index_child_parent():
    idx = SubdomainIndex("10")
    assert idx.child(1).bits == "101"
    assert idx.parent().bits == "1"
    assert idx.level == 2
    with pytest.raises(ValueError):
        ROOT.parent()
    with pytest.raises(ValueError):
        idx.child(2)
    with pytest.raises(ValueError):
        SubdomainIndex("012")


@given(st.integers(0, 12), st.integers(0, 2**12 - 1))
def test_index_int_round_trip(level, value):
    value %= 1 << level
    idx = SubdomainIndex.from_int(level, value)
    assert idx.level == level
    assert idx.as_int() == value


def test_key_codes_distinguish_levels():
    seen = set()
    for level in range(7):
        for v in range(1 << level):
            seen.add(key_code(SubdomainIndex.from_int(level, v)))
    assert len(seen) == sum(1 << l for l in range(7))
    assert key_code(SubdomainIndex("0")) != key_code(SubdomainIndex("00"))


def test_domain_validation():
    with pytest.raises(ValueError):
        HypercubeDomain(0)
    with pytest.raises(ValueError):
        HypercubeDomain(1).locate((0.5,), -1)
    with pytest.raises(ValueError):
        HypercubeDomain(1).geometry(-1)
