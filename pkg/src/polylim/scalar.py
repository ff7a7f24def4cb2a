"""Exact numbers of the form ``q * pi**(h/2) * 2**(s/2)`` and Gamma at half-integers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial


class GammaPole(ValueError):
    pass


class IncompatibleScalars(ValueError):
    """Addition of scalars carrying different powers of sqrt(pi) or sqrt(2)."""


@dataclass(frozen=True)
class ExactScalar:
    """``q * sqrt(pi)**h * sqrt(2)**s`` with rational ``q`` and ``s`` in {0, 1}.

    Even powers of sqrt(2) are folded into ``q`` on construction, and zero is
    stored with ``h = s = 0``.
    """

    q: Fraction
    h: int = 0
    s: int = 0

    def __post_init__(self):
        q = Fraction(self.q)
        h, s = self.h, self.s
        if s < 0 or s > 1:
            q *= Fraction(2) ** (s // 2)
            s %= 2
        if q == 0:
            h = s = 0
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "s", s)

    @classmethod
    def of(cls, x) -> "ExactScalar":
        return x if isinstance(x, cls) else cls(Fraction(x))

    def _check(self, other: "ExactScalar"):
        if self.q and other.q and (self.h, self.s) != (other.h, other.s):
            raise IncompatibleScalars(f"{self} + {other}")

    def __add__(self, other):
        other = ExactScalar.of(other)
        self._check(other)
        base = self if self.q else other
        return ExactScalar(self.q + other.q, base.h, base.s)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(-self.q, self.h, self.s)

    def __sub__(self, other):
        return self + (-ExactScalar.of(other))

    def __rsub__(self, other):
        return ExactScalar.of(other) - self

    def __mul__(self, other):
        other = ExactScalar.of(other)
        return ExactScalar(self.q * other.q, self.h + other.h, self.s + other.s)

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if not self.q:
            raise ZeroDivisionError("inverse of zero")
        # 1/sqrt(2) = sqrt(2)/2
        return ExactScalar(1 / self.q, -self.h, -self.s)

    def __truediv__(self, other):
        return self * ExactScalar.of(other).inverse()

    def __rtruediv__(self, other):
        return ExactScalar.of(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return ExactScalar(self.q**n, self.h * n, self.s * n)

    def __float__(self) -> float:
        return float(self.q) * math.pi ** (self.h / 2) * math.sqrt(2) ** self.s

    def is_rational(self) -> bool:
        return self.h == 0 and self.s == 0

    def __lt__(self, other):
        return float(self) < float(other)

    def __gt__(self, other):
        return float(self) > float(other)

    def __str__(self) -> str:
        def pi(h):
            return {1: "√π", 2: "π"}.get(h, f"π^({h}/2)")

        q = self.q
        top = ("√2" if self.s else "") + (pi(self.h) if self.h > 0 else "")
        bottom = pi(-self.h) if self.h < 0 else ""
        num = abs(q.numerator)
        head = ("-" if q < 0 else "") + ("" if num == 1 and top else str(num)) + top
        den = ("" if q.denominator == 1 else str(q.denominator)) + bottom
        if not den:
            return head
        return f"{head}/({den})" if q.denominator != 1 and bottom else f"{head}/{den}"

    def __repr__(self) -> str:
        return f"ExactScalar({self})"


def gamma_exact(x) -> ExactScalar:
    """Gamma at a positive integer or at any half-integer, exactly."""
    x = Fraction(x)
    if x.denominator == 1:
        n = x.numerator
        if n <= 0:
            raise GammaPole(f"Gamma has a pole at {n}")
        return ExactScalar(factorial(n - 1))
    if x.denominator != 2:
        raise ValueError(f"Gamma({x}) is not a half-integer value")
    n = x - Fraction(1, 2)
    n = n.numerator
    if n >= 0:
        return ExactScalar(Fraction(factorial(2 * n), 4**n * factorial(n)), 1)
    m = -n
    return ExactScalar(Fraction((-4) ** m * factorial(m), factorial(2 * m)), 1)
