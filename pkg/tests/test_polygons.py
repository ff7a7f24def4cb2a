from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from polylim.polygons import (
    DyckPath, LatticePolygon, NotClosed, OddLength, OddPerimeter, SelfIntersecting, SizeLimitExceeded,
    StaircasePolygon, catalan, column_moments, diagonal_moments, dyck_to_staircase, enumerate_sap,
    enumerate_staircase, layer_moments, polygon_cells, staircase_to_dyck, validate_polygon,
)

# square-lattice polygon counts by perimeter 4..16, from a separate transfer-matrix count
SAP_COUNTS = {4: 1, 6: 2, 8: 7, 10: 28, 12: 124, 14: 588, 16: 2938}


def test_catalan_formula():
    assert [catalan(n) for n in range(8)] == [comb(2 * n, n) // (n + 1) for n in range(8)]


@pytest.mark.parametrize("n0", range(2, 11))
def test_staircase_counts_are_catalan(n0):
    polys = list(enumerate_staircase(n0))
    assert len(polys) == catalan(n0 - 1)
    assert len(set(polys)) == len(polys)
    assert all(p.half_perimeter == n0 for p in polys)


@pytest.mark.parametrize("perimeter,count", SAP_COUNTS.items())
def test_sap_counts(perimeter, count):
    polys = list(enumerate_sap(perimeter))
    assert len(polys) == count
    assert len({p.steps for p in polys}) == count


def test_guards():
    with pytest.raises(SizeLimitExceeded):
        next(enumerate_staircase(15))
    with pytest.raises(SizeLimitExceeded):
        next(enumerate_sap(18))
    with pytest.raises(OddPerimeter):
        next(enumerate_sap(7))


@pytest.mark.parametrize("steps,err", [("RUL", NotClosed), ("RRLL", SelfIntersecting), ("RULDRULD", SelfIntersecting)])
def test_validate_rejects(steps, err):
    with pytest.raises(err):
        validate_polygon(steps)


def test_odd_length_is_not_closed():
    # an odd closed lattice walk cannot exist, so odd input fails the closure check first
    with pytest.raises((NotClosed, OddLength)):
        validate_polygon("RUL")


@given(st.sampled_from([p.steps for p in enumerate_sap(12)]), st.integers(0, 11), st.booleans())
def test_canonical_form_ignores_start_and_direction(steps, shift, backwards):
    s = steps[shift:] + steps[:shift]
    if backwards:
        s = "".join({"R": "L", "L": "R", "U": "D", "D": "U"}[c] for c in reversed(s))
    assert validate_polygon(s).steps == steps


def test_canonical_starts_r_ends_d():
    assert all(p.steps[0] == "R" and p.steps[-1] == "D" for p in enumerate_sap(14))


def test_cells_rectangle():
    p = validate_polygon("RRRUULLLDD")
    assert p.area == 6
    assert polygon_cells(p.steps) == {(i, j) for i in range(3) for j in range(2)}


def test_area_by_shoelace():
    for p in enumerate_sap(14):
        v = p.vertices() + [p.vertices()[0]]
        shoelace = abs(sum(a[0] * b[1] - b[0] * a[1] for a, b in zip(v, v[1:]))) // 2
        assert p.area == shoelace


def test_staircase_example_half_perimeter_14():
    # 8 diagonals of length 1 and 5 of length 2
    p = StaircasePolygon("URRRRRRURRRRRR", "RRRRRRRRRRRRUU")
    mv = diagonal_moments(p, 3)
    assert p.half_perimeter == 14 and p.area == 18
    assert mv.values == (13, 18, 8 + 5 * 4, 8 + 5 * 8)


def test_staircase_rejects_touching_paths():
    with pytest.raises(ValueError):
        StaircasePolygon("RU", "RU")
    with pytest.raises(ValueError):
        StaircasePolygon("URU", "RRU")


def test_staircase_reflection_swaps_width_and_height():
    for p in enumerate_staircase(7):
        q = p.reflect()
        assert (q.width, q.height) == (p.height, p.width)
        assert diagonal_moments(q, 3) == diagonal_moments(p, 3)


def test_column_moments_unit_square():
    w, h, mv = column_moments(StaircasePolygon("UR", "RU"), 2)
    assert (w, h, mv.values) == (1, 1, (1, 1, 1))


@pytest.mark.parametrize("n0", range(2, 9))
def test_dyck_bijection_roundtrip(n0):
    seen = set()
    for p in enumerate_staircase(n0):
        d = staircase_to_dyck(p)
        assert len(d.steps) == 2 * (n0 - 1)
        assert dyck_to_staircase(d) == p
        seen.add(d)
    assert len(seen) == catalan(n0 - 1)


@st.composite
def dyck_paths(draw):
    n = draw(st.integers(1, 12))
    h, steps = 0, []
    for i in range(2 * n):
        left = 2 * n - i
        if h == 0:
            s = 1
        elif h == left:
            s = -1
        else:
            s = draw(st.sampled_from([1, -1]))
        h += s
        steps.append(s)
    return DyckPath(tuple(steps))


@given(dyck_paths())
def test_dyck_to_staircase_inverse(d):
    p = dyck_to_staircase(d)
    assert staircase_to_dyck(p) == d
    assert p.area == sum(d.peaks_and_valleys()[0])  # peaks are column heights


def test_dyck_path_validation():
    with pytest.raises(ValueError):
        DyckPath((-1, 1))
    with pytest.raises(ValueError):
        DyckPath((1, 1, -1))


def test_layer_moments_agree_on_staircases():
    for p in enumerate_staircase(8):
        a, b = layer_moments(p, 3)
        mv = diagonal_moments(p, 3)
        assert a.values == b.values == mv.values


def test_vertical_layers_of_staircase_are_columns():
    for p in enumerate_staircase(8):
        a, b = layer_moments(p, 3, "vertical")
        _, _, mv = column_moments(p, 3)
        assert a.values == b.values == mv.values


@settings(max_examples=50)
@given(st.sampled_from(list(enumerate_sap(14))), st.sampled_from(["diagonal", "vertical"]))
def test_layer_variants_order(p, family):
    a, b = layer_moments(p, 4, family)
    assert a[1] == b[1] == p.area
    assert all(a[k] >= b[k] for k in range(2, 5))


def test_smallest_two_segment_layer():
    # no perimeter below 12 has a diagonal layer made of two segments
    for per in range(4, 12, 2):
        assert all(layer_moments(p, 2)[0][2] == layer_moments(p, 2)[1][2] for p in enumerate_sap(per))
    p = LatticePolygon("RRRULLUULDDD")
    a, b = layer_moments(p, 2)
    assert (a.values, b.values) == ((3, 5, 9), (3, 5, 7))
    assert a[2] > b[2]


def test_kmax_guard():
    with pytest.raises(ValueError):
        layer_moments(LatticePolygon("RULD"), 0)
    with pytest.raises(ValueError):
        layer_moments(LatticePolygon("RULD"), 1, "horizontal")
