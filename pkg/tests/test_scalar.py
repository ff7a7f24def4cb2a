import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polylim.scalar import ExactScalar, GammaPole, IncompatibleScalars, gamma_exact

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=50)
scalars = st.builds(ExactScalar, fractions, st.integers(-3, 3), st.integers(-3, 3))
nonzero = scalars.filter(lambda s: s.q != 0)


@given(scalars, scalars, scalars)
def test_multiplication_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(nonzero)
def test_inverse(a):
    assert a * a.inverse() == ExactScalar(1)


@given(fractions, fractions, st.integers(-3, 3))
def test_addition_closed_for_fixed_powers(p, q, h):
    assert ExactScalar(p, h) + ExactScalar(q, h) == ExactScalar(p + q, h)


@given(scalars)
def test_float_agrees(a):
    assert math.isclose(float(a), float(a.q) * math.pi ** (a.h / 2) * 2 ** (a.s / 2))


def test_even_sqrt2_powers_fold():
    assert ExactScalar(1, 0, 2) == ExactScalar(2)
    assert ExactScalar(1, 0, -1) == ExactScalar(Fraction(1, 2), 0, 1)


def test_mismatched_sum_rejected():
    with pytest.raises(IncompatibleScalars):
        ExactScalar(1, 1) + ExactScalar(1)


@pytest.mark.parametrize("x", [Fraction(n, 2) for n in range(-9, 20) if n % 2 or n > 0])
def test_gamma_matches_math(x):
    assert math.isclose(float(gamma_exact(x)), math.gamma(float(x)), rel_tol=1e-12)


def test_gamma_closed_forms():
    assert gamma_exact(Fraction(-1, 2)) == ExactScalar(-2, 1)
    assert gamma_exact(Fraction(7, 2)) == ExactScalar(Fraction(15, 8), 1)
    with pytest.raises(GammaPole):
        gamma_exact(0)


@pytest.mark.parametrize("value,text", [
    (ExactScalar(Fraction(10, 3), -2), "10/(3π)"),
    (ExactScalar(Fraction(1, 4), 1), "√π/4"),
    (ExactScalar(Fraction(19, 15)), "19/15"),
    (ExactScalar(Fraction(1, 2), 0, 1), "√2/2"),
    (ExactScalar(-2, 1), "-2√π"),
])
def test_rendering(value, text):
    assert str(value) == text
