import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from polylim.asymptotics import (
    IrrationalConstant, alpha, amplitude_f, c_table, column_constants, diagonal_constants, gamma_exponent,
    limit_moment, limit_moment_ratio, moment_growth_check, pde_amplitudes, polygon_amplitudes,
    riccati_amplitudes, scaling_series_F0, verify_pde_residual, walk_amplitudes, walk_constants,
)
from polylim.scalar import ExactScalar
from polylim.series import finite_moments

WALKS = ["dyck", "bilateral-dyck", "meander", "bernoulli"]


def test_gamma_exponents():
    assert gamma_exponent("staircase", (0,)) == Fraction(-1, 2)
    assert [gamma_exponent("staircase", (k,)) for k in range(5)] == [Fraction(3 * k - 1, 2) for k in range(5)]
    assert gamma_exponent("bernoulli", (0, 0)) == 1
    assert gamma_exponent("meander", (0, 1)) == gamma_exponent("dyck", (0, 1)) + 1


def test_c_first_values():
    c = c_table(1, (4,))
    assert c[(0,)] == 1 and c[(1,)] == 1 and c[(2,)] == Fraction(-5, 2)


def test_c_cap():
    with pytest.raises(ValueError):
        c_table(1, (9,))


def test_c_signs():
    # f_k > 0 with f_0 < 0 forces sign(c_k) = (-1)^(|k|+1)
    for k, v in c_table(3, (3, 3, 3)).items():
        if any(k):
            assert v != 0 and (v > 0) == (sum(k) % 2 == 1)


def test_pde_route_equals_composition():
    for M in (1, 2, 3):
        f = pde_amplitudes(M, 5)
        for k, v in f.items():
            assert amplitude_f("staircase", k) == ExactScalar(v)


def test_riccati_route_equals_composition():
    f = riccati_amplitudes(8)
    assert [amplitude_f("staircase", (k,)).q for k in range(9)] == f


def test_unit_amplitudes_closed_form():
    for k in range(1, 5):
        e = tuple(int(i == k - 1) for i in range(4))
        assert amplitude_f("staircase", e) == ExactScalar(Fraction(math.factorial(k), 2 ** (3 * (k + 1))))


def test_ratios_are_model_independent():
    diag = polygon_amplitudes("staircase", 2, (3, 3))
    col = polygon_amplitudes("column", 2, (3, 3), y=Fraction(1, 81))
    dyck = walk_amplitudes("dyck", 2, (3, 3))
    for k in diag.entries:
        assert diag.c(k) == col.c(k) == dyck.c(k)


def test_column_constants():
    cc = column_constants(2, Fraction(1, 16))
    assert cc.f0 == ExactScalar(-2) and cc.f_e[0] == ExactScalar(1)
    assert cc.u_c == ExactScalar(Fraction(9, 16))  # (1 - sqrt(y))^2
    with pytest.raises(IrrationalConstant):
        column_constants(1, Fraction(1, 2))
    with pytest.raises(ValueError):
        column_constants(1, 2)


def test_amplitudes_positive():
    tables = [polygon_amplitudes("staircase", 3, (3, 3, 3))] + [walk_amplitudes(m, 2, (4, 4)) for m in WALKS]
    for t in tables:
        for k, (_, _, f) in t.entries.items():
            if any(k):
                assert float(f) > 0


def test_walk_boundary_values():
    assert [walk_amplitudes(m, 1, (0,)).f((0,)) for m in WALKS] == [
        ExactScalar(-4), ExactScalar(Fraction(1, 2)), ExactScalar(1), ExactScalar(Fraction(1, 2))]
    assert walk_constants("dyck", 1).f_e[0] == ExactScalar(Fraction(1, 4))
    assert walk_constants("meander", 1).u_c == ExactScalar(Fraction(1, 2))


def test_F0_series():
    F = scaling_series_F0("staircase", 1, 3)
    assert [F[(k,)] for k in range(4)] == [-1, Fraction(-1, 64), Fraction(5, 8192), Fraction(-15, 262144)]


@pytest.mark.parametrize("model", ["staircase", *WALKS])
@pytest.mark.parametrize("M,order", [(1, 8), (2, 6), (3, 4)])
def test_pde_residuals(model, M, order):
    assert verify_pde_residual(model, M, order) == {}


def test_bilateral_times_dyck():
    b = scaling_series_F0("bilateral", 2, 5)
    d = scaling_series_F0("dyck", 2, 5)
    prod_ = {}
    for (k1, v1), (k2, v2) in product(b.items(), d.items()):
        k = tuple(x + y for x, y in zip(k1, k2))
        if sum(k) <= 5:
            prod_[k] = prod_.get(k, 0) + v1 * v2
    assert {k: v for k, v in prod_.items() if v} == {(0, 0): -2}


def test_limit_moments():
    assert limit_moment("staircase", (0,)) == ExactScalar(1)
    assert limit_moment("staircase", (1,)) == ExactScalar(Fraction(1, 4), 1)
    assert limit_moment("staircase", (2,)) == ExactScalar(Fraction(5, 24))
    assert str(limit_moment_ratio((2,))) == "10/(3π)"
    assert limit_moment_ratio((0, 2)) == ExactScalar(Fraction(19, 15))
    assert limit_moment_ratio((0, 0, 1)) == ExactScalar(1)


def test_ratio_independent_of_constants():
    y = Fraction(16, 81)
    for k in [(2, 0), (1, 1), (0, 2), (2, 1)]:
        r_col = limit_moment("column", k, y=y)
        for i, x in enumerate(k):
            e = tuple(int(j == i) for j in range(2))
            if x:
                r_col = r_col / limit_moment("column", e, y=y) ** x
        assert r_col == limit_moment_ratio(k)


def test_brownian_area_means():
    # E of the integral of |B| on [0, 1] for excursion, bridge, meander, free motion
    expected = {"dyck": math.sqrt(math.pi / 8), "bilateral-dyck": math.sqrt(2 * math.pi) / 8,
                "meander": 0.75 * math.sqrt(math.pi / 2), "bernoulli": 2 * math.sqrt(2) / (3 * math.sqrt(math.pi))}
    for m, v in expected.items():
        assert math.isclose(float(limit_moment(m, (1,))), v, rel_tol=1e-14)


@pytest.mark.parametrize("model", WALKS)
def test_walk_means_from_series(model):
    # finite-size area means approach the limit like n^(-1/2); one Richardson step removes it
    lim = float(limit_moment(model, (1,)))
    r40, r160 = (float(finite_moments(model, (1,), n).ordinary) / n**1.5 / lim for n in (40, 160))
    assert abs(r160 - 1) < abs(r40 - 1)
    assert abs(2 * r160 - r40 - 1) < 0.03


def test_alpha():
    for k in range(1, 5):
        a = alpha(k, M=4)
        assert a.squared == Fraction(1, 2 ** (9 * k))
        assert math.isclose(a.value, 2 ** (-4.5 * k))
    assert alpha(2, M=2).exact == ExactScalar(Fraction(1, 512))
    with pytest.raises(ValueError):
        alpha(3, M=2)


def test_alpha_column_composition():
    # -(f_e/f_0) 2^(3-3k/2)/k! with the column constants gives y^((1-k)/4) 2^(3-5k/2)
    r = Fraction(2, 3)
    y = r**4
    for k in (1, 2, 3):
        a = alpha(k, "column", M=3, y=y)
        assert a.squared == r ** (2 * (1 - k)) * Fraction(2) ** (6 - 5 * k)


def test_moment_growth():
    rep = moment_growth_check(1, 20)
    assert rep.moments[0] == 1
    assert max(rep.root_ratio) < 1
    assert all(b > a for a, b in zip(rep.carleman_partial, rep.carleman_partial[1:]))
    assert all(rep.decay[1.0][-1] < rep.decay[1.0][k] for k in range(1, 10))
    with pytest.raises(ValueError):
        moment_growth_check(1, 21)


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(0, 3), st.integers(0, 3)))
def test_walk_cauchy_product(k):
    b = walk_amplitudes("bilateral", 2, k)
    m = walk_amplitudes("meander", 2, k)
    r = walk_amplitudes("bernoulli", 2, k)
    total = sum((b.f(l).q * m.f((k[0] - l[0], k[1] - l[1])).q
                 for l in product(range(k[0] + 1), range(k[1] + 1))), Fraction(0))
    assert r.f(k).q == total


def test_diagonal_constants():
    c = diagonal_constants(3)
    assert c.u_c == ExactScalar(Fraction(1, 4))
    assert c.f0 == ExactScalar(-1)
