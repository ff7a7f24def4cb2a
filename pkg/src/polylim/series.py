"""Exact truncated solutions of the staircase and walk functional equations.

Every model's generating function is a power series in ``u0`` whose
coefficients are polynomials in ``u1..uM``.  All of them share the
substitution

    v_k(u) = prod_{l=k}^{M} u_l ** binom(l, k)

which on a monomial ``u0^e0 u1^e1 ... uM^eM`` is the exponent map
``e_l -> sum_{k<=l} binom(l, k) e_k``.

Two coefficient rings are supported:

* ``PolyRing``: the full sparse polynomial in ``u1..uM`` (integer or
  rational coefficients).  This gives :class:`SeriesPoly`.
* ``JetRing``: the Taylor jet in ``d_i = u_i - 1`` truncated at total degree
  ``K``.  The jet coefficient of ``d^k`` at ``u0^n`` is exactly
  ``[u0^n] g_k``, the factorial-moment generating function, so this ring is
  the cheap route to long series at few derivatives.

The staircase column model ``H(u, y)`` is graded by half-perimeter (width
plus height) so that every coefficient is a finite polynomial; its width is
carried as the first exponent slot and ``y`` is a rational number folded
into the coefficients as ``y ** height``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, factorial
from typing import Iterable, Sequence

Number = int | Fraction

# exponent slots are packed into one int; slot width must exceed any exponent reached
_SLOT_BITS = 40
_SLOT = 1 << _SLOT_BITS
_MASK = _SLOT - 1

MAX_MGF_ORDER = 6
MAX_MGF_N = 30


class EquationModel(str, Enum):
    STAIRCASE_DIAGONAL = "staircase-diagonal"
    STAIRCASE_COLUMN = "staircase-column"
    DYCK = "dyck"
    BILATERAL = "bilateral-dyck"
    MEANDER = "meander"
    BERNOULLI = "bernoulli"

    @classmethod
    def parse(cls, name: "str | EquationModel") -> "EquationModel":
        if isinstance(name, cls):
            return name
        aliases = {"staircase": "staircase-diagonal", "diagonal": "staircase-diagonal",
                   "column": "staircase-column", "bilateral": "bilateral-dyck"}
        return cls(aliases.get(name, name))


class NonStabilized(RuntimeError):
    """Fixed-point iteration hit its cap without two equal successive iterates."""


class ZeroCount(ValueError):
    """No objects of the requested size."""


def _pack(exps: Iterable[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        key |= e << (_SLOT_BITS * i)
    return key


def _unpack(key: int, m: int) -> tuple[int, ...]:
    return tuple((key >> (_SLOT_BITS * i)) & _MASK for i in range(m))


def _v_exponents(e: Sequence[int]) -> list[int]:
    """Exponent map of the substitution ``v``; ``e = (e0, e1, ..., eM)``."""
    return [sum(comb(l, k) * e[k] for k in range(l + 1)) for l in range(len(e))]


# --- coefficient rings --------------------------------------------------------


class PolyRing:
    """Sparse polynomials in ``u1..uM`` (plus the width slot for the column model)."""

    def __init__(self, M: int, column: bool = False):
        self.M = M
        self.column = column
        self.slots = M + 1 if column else M
        self.U = {_pack([1] * self.slots): 1}

    def zero(self):
        return {}

    def one(self):
        return {0: 1}

    def is_zero(self, a) -> bool:
        return not a

    def add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for k, c in b.items():
            s = out.get(k, 0) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return out

    def scale(self, a, c):
        return {k: v * c for k, v in a.items()} if c else {}

    def mul(self, a, b):
        if not a or not b:
            return {}
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, Number] = {}
        get = out.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return {k: v for k, v in out.items() if v}

    def subst_v(self, series: list) -> list:
        out = []
        for n, a in enumerate(series):
            b: dict[int, Number] = {}
            for key, c in a.items():
                e = _unpack(key, self.slots)
                if not self.column:
                    e = (n,) + e
                new = _v_exponents(e)
                if not self.column:
                    new = new[1:]
                k = _pack(new)
                b[k] = b.get(k, 0) + c
            out.append(b)
        return out


class JetRing:
    """Jets in ``d_i = u_i - 1`` truncated at total degree ``K``."""

    def __init__(self, M: int, K: int, N: int):
        self.M, self.K, self.N = M, K, N
        self.index = [j for d in range(K + 1) for j in _compositions(d, M)]
        self.pos = {j: i for i, j in enumerate(self.index)}
        self.n = len(self.index)
        self.table = [
            (ia, ib, self.pos[c])
            for ia, a in enumerate(self.index)
            for ib, b in enumerate(self.index)
            if (c := tuple(x + y for x, y in zip(a, b))) in self.pos
        ]
        # P = prod_l (1 + d_l) is both U = u1...uM and the extra factor in v0 = u0 U
        self.U = self.zero()
        for j in self.index:
            if max(j, default=0) <= 1:
                self.U[self.pos[j]] = 1
        self._pow_u = [self.one()]
        for _ in range(N):
            self._pow_u.append(self.mul(self._pow_u[-1], self.U))
        # v_i - 1 = prod_{l>=i} (1 + d_l)^binom(l, i) - 1
        vm1 = []
        for i in range(1, M + 1):
            v = self.one()
            for l in range(i, M + 1):
                base = self.one()
                if K >= 1:
                    base[self.pos[tuple(int(t == l - 1) for t in range(M))]] = 1
                for _ in range(comb(l, i)):
                    v = self.mul(v, base)
            v[0] -= 1
            vm1.append(v)
        self.Q = []
        for j in self.index:
            q = self.one()
            for i, ji in enumerate(j):
                for _ in range(ji):
                    q = self.mul(q, vm1[i])
            self.Q.append(q)

    def zero(self):
        return [0] * self.n

    def one(self):
        z = [0] * self.n
        z[0] = 1
        return z

    def is_zero(self, a) -> bool:
        return not any(a)

    def add(self, a, b):
        return [x + y for x, y in zip(a, b)]

    def scale(self, a, c):
        return [x * c for x in a]

    def mul(self, a, b):
        out = [0] * self.n
        for ia, ib, ic in self.table:
            x = a[ia]
            if x:
                y = b[ib]
                if y:
                    out[ic] += x * y
        return out

    def subst_v(self, series: list) -> list:
        out = []
        for n, a in enumerate(series):
            acc = self.zero()
            for i, c in enumerate(a):
                if c:
                    q = self.Q[i]
                    for t in range(self.n):
                        if q[t]:
                            acc[t] += c * q[t]
            out.append(self.mul(acc, self._pow_u[n]))
        return out


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# --- truncated series in u0 ---------------------------------------------------


def _s_zero(ring, N):
    return [ring.zero() for _ in range(N + 1)]


def _s_add(ring, A, B):
    return [ring.add(a, b) for a, b in zip(A, B)]


def _s_sub(ring, A, B):
    return [ring.add(a, ring.scale(b, -1)) for a, b in zip(A, B)]


def _s_scale(ring, A, c):
    return [ring.scale(a, c) for a in A]


def _s_mulc(ring, A, c):
    return [ring.mul(a, c) for a in A]


def _s_shift(ring, A, k):
    """Multiply by ``u0**k`` keeping the length."""
    return [ring.zero() for _ in range(k)] + A[: len(A) - k]


def _s_mul(ring, A, B):
    N = len(A) - 1
    out = _s_zero(ring, N)
    for i, a in enumerate(A):
        if ring.is_zero(a):
            continue
        for j in range(N + 1 - i):
            if not ring.is_zero(B[j]):
                out[i + j] = ring.add(out[i + j], ring.mul(a, B[j]))
    return out


def _s_geom(ring, D):
    """``1 / (1 - D)`` for ``D`` without constant term."""
    N = len(D) - 1
    S = [ring.one()] + [ring.zero() for _ in range(N)]
    for n in range(1, N + 1):
        acc = ring.zero()
        for m in range(1, n + 1):
            if not ring.is_zero(D[m]) and not ring.is_zero(S[n - m]):
                acc = ring.add(acc, ring.mul(D[m], S[n - m]))
        S[n] = acc
    return S


def _s_monomial(ring, N, n, c):
    out = _s_zero(ring, N)
    if n <= N:
        out[n] = c
    return out


# --- the six equations ----------------------------------------------------------


def _phi(model: EquationModel, ring, N: int, G: list, subs: dict, y: Number | None):
    """Right-hand side of the model's functional equation applied to ``G``."""
    U = ring.U
    if model is EquationModel.STAIRCASE_DIAGONAL:
        D = _s_add(ring, _s_monomial(ring, N, 1, ring.scale(U, 2)), ring.subst_v(G))
        return _s_shift(ring, _s_mulc(ring, _s_geom(ring, D), U), 2)
    if model is EquationModel.STAIRCASE_COLUMN:
        # graded: X = H(v) + t u0 u1..uM,  H = y t X / (1 - X)
        X = _s_add(ring, ring.subst_v(G), _s_monomial(ring, N, 1, U))
        XS = _s_mul(ring, X, _s_geom(ring, X))
        return _s_shift(ring, _s_scale(ring, XS, y), 1)
    if model is EquationModel.DYCK:
        D = _s_shift(ring, _s_mulc(ring, ring.subst_v(G), U), 2)
        return _s_geom(ring, D)
    if model is EquationModel.BILATERAL:
        D = _s_shift(ring, _s_mulc(ring, ring.subst_v(subs["dyck"]), ring.scale(U, 2)), 2)
        return _s_geom(ring, D)
    if model is EquationModel.MEANDER:
        inner = _s_shift(ring, _s_mulc(ring, ring.subst_v(G), U), 1)
        return _s_mul(ring, subs["dyck"], _s_add(ring, _s_monomial(ring, N, 0, ring.one()), inner))
    if model is EquationModel.BERNOULLI:
        inner = _s_shift(ring, _s_mulc(ring, ring.subst_v(subs["meander"]), ring.scale(U, 2)), 1)
        return _s_mul(ring, subs["bilateral"], _s_add(ring, _s_monomial(ring, N, 0, ring.one()), inner))
    raise ValueError(model)


_DEPENDS = {
    EquationModel.BILATERAL: ("dyck",),
    EquationModel.MEANDER: ("dyck",),
    EquationModel.BERNOULLI: ("bilateral", "meander"),
}


def _transitive_deps(model: EquationModel) -> list[str]:
    out: list[str] = []
    for name in _DEPENDS.get(model, ()):
        for d in _transitive_deps(_SUB_MODEL[name]) + [name]:
            if d not in out:
                out.append(d)
    return out


_SUB_MODEL = {"dyck": EquationModel.DYCK, "bilateral": EquationModel.BILATERAL,
              "meander": EquationModel.MEANDER}


def _fixed_point(model: EquationModel, ring, N: int, subs: dict, y) -> tuple[list, int]:
    G = _s_zero(ring, N)
    cap = N + 3
    for it in range(1, cap + 1):
        new = _phi(model, ring, N, G, subs, y)
        if new == G:
            return G, it
        G = new
    raise NonStabilized(f"{model.value}: no fixed point after {cap} iterations (N={N})")


# --- public types -------------------------------------------------------------


@dataclass(frozen=True)
class SeriesPoly:
    """Truncated series ``sum_n u0^n P_n(u1..uM)`` with exact coefficients.

    ``coeffs[n]`` maps exponent tuples to coefficients.  For the diagonal and
    walk models the tuple is ``(n1, ..., nM)`` and ``n`` is the half-perimeter
    or walk length.  For ``staircase-column`` ``n`` is the half-perimeter
    (width + height) and the tuple is ``(width, m1, ..., mM)``.
    Treat instances as immutable.
    """

    model: EquationModel
    M: int
    N: int
    coeffs: tuple[dict[tuple[int, ...], Number], ...]
    y: Fraction | None = None
    iterations: int = 0

    def coefficient(self, n: int) -> dict[tuple[int, ...], Number]:
        return self.coeffs[n]

    def counts(self) -> list[Number]:
        """Coefficients at ``u1 = ... = uM = 1``."""
        return [sum(c.values()) for c in self.coeffs]

    def perturbed(self, n: int, exps: tuple[int, ...], delta: Number = 1) -> "SeriesPoly":
        coeffs = [dict(c) for c in self.coeffs]
        coeffs[n][exps] = coeffs[n].get(exps, 0) + delta
        return SeriesPoly(self.model, self.M, self.N, tuple(coeffs), self.y, self.iterations)

    def is_zero(self) -> bool:
        return not any(any(v for v in c.values()) for c in self.coeffs)

    def to_json(self) -> str:
        terms = [
            {"n0": n, "exps": list(e), "coeff": _exact_str(c)}
            for n, poly in enumerate(self.coeffs)
            for e, c in sorted(poly.items())
        ]
        return json.dumps({"model": self.model.value, "M": self.M, "N": self.N,
                           "y": None if self.y is None else _exact_str(self.y), "terms": terms})

    @classmethod
    def from_json(cls, text: str) -> "SeriesPoly":
        d = json.loads(text)
        coeffs: list[dict] = [{} for _ in range(d["N"] + 1)]
        for t in d["terms"]:
            coeffs[t["n0"]][tuple(t["exps"])] = _parse_exact(t["coeff"])
        y = None if d.get("y") is None else Fraction(d["y"])
        return cls(EquationModel.parse(d["model"]), d["M"], d["N"], tuple(coeffs), y)


@dataclass(frozen=True)
class RationalSeries:
    """Exact coefficients ``c_0..c_N`` of a series in ``u0``."""

    coeffs: tuple[Fraction, ...]
    variable: str = "u0"

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def to_json(self) -> str:
        return json.dumps({"variable": self.variable, "N": self.N,
                           "coeffs": [_exact_str(c) for c in self.coeffs]})


def _exact_str(c: Number) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _parse_exact(s: str) -> Number:
    f = Fraction(s)
    return f.numerator if f.denominator == 1 else f


def _to_seriespoly(model, ring: PolyRing, M, N, G, y, iterations) -> SeriesPoly:
    coeffs = tuple({_unpack(k, ring.slots): c for k, c in poly.items()} for poly in G)
    return SeriesPoly(model, M, N, coeffs, y, iterations)


def _from_seriespoly(s: SeriesPoly) -> list:
    return [{_pack(e): c for e, c in poly.items()} for poly in s.coeffs]


# --- operations -----------------------------------------------------------------


def _check_y(model: EquationModel, y):
    if model is EquationModel.STAIRCASE_COLUMN:
        if y is None:
            raise ValueError("staircase-column needs a rational height weight y")
        y = Fraction(y)
        if y <= 0:
            raise ValueError("y must be positive")
        return y
    if y is not None:
        raise ValueError(f"y is only meaningful for staircase-column, not {model.value}")
    return None


@lru_cache(maxsize=64)
def _solve_cached(model: EquationModel, M: int, N: int, y) -> SeriesPoly:
    ring = PolyRing(M, column=model is EquationModel.STAIRCASE_COLUMN)
    subs = {name: _from_seriespoly(_solve_cached(_SUB_MODEL[name], M, N, None))
            for name in _DEPENDS.get(model, ())}
    G, it = _fixed_point(model, ring, N, subs, y)
    return _to_seriespoly(model, ring, M, N, G, y, it)


def solve_qfe(model, M: int, N: int, y=None) -> SeriesPoly:
    """Solve a functional equation by fixed-point iteration from zero, exactly to order ``N``.

    >>> solve_qfe("staircase-diagonal", 1, 5).counts()
    [0, 0, 1, 2, 5, 14]
    """
    model = EquationModel.parse(model)
    if M < 1 or N < 2:
        raise ValueError("need M >= 1 and N >= 2")
    return _solve_cached(model, M, N, _check_y(model, y))


def verify_feq(model, series: SeriesPoly) -> SeriesPoly:
    """Residual of the cross-multiplied functional equation, truncated at ``series.N``.

    Walk models that reference other models (bilateral, meander, Bernoulli)
    take those from :func:`solve_qfe` at the same ``M`` and ``N``.
    """
    model = EquationModel.parse(model)
    M, N = series.M, series.N
    ring = PolyRing(M, column=model is EquationModel.STAIRCASE_COLUMN)
    G = _from_seriespoly(series)
    U = ring.U
    one = _s_monomial(ring, N, 0, ring.one())

    def sub(name):
        return _from_seriespoly(solve_qfe(_SUB_MODEL[name], M, N))

    if model is EquationModel.STAIRCASE_DIAGONAL:
        den = _s_sub(ring, _s_sub(ring, one, _s_monomial(ring, N, 1, ring.scale(U, 2))), ring.subst_v(G))
        res = _s_sub(ring, _s_mul(ring, G, den), _s_monomial(ring, N, 2, U))
    elif model is EquationModel.STAIRCASE_COLUMN:
        X = _s_add(ring, ring.subst_v(G), _s_monomial(ring, N, 1, U))
        lhs = _s_mul(ring, G, _s_sub(ring, one, X))
        res = _s_sub(ring, lhs, _s_shift(ring, _s_scale(ring, X, series.y), 1))
    elif model is EquationModel.DYCK:
        den = _s_sub(ring, one, _s_shift(ring, _s_mulc(ring, ring.subst_v(G), U), 2))
        res = _s_sub(ring, _s_mul(ring, G, den), one)
    elif model is EquationModel.BILATERAL:
        den = _s_sub(ring, one, _s_shift(ring, _s_mulc(ring, ring.subst_v(sub("dyck")), ring.scale(U, 2)), 2))
        res = _s_sub(ring, _s_mul(ring, G, den), one)
    elif model is EquationModel.MEANDER:
        rhs = _s_add(ring, one, _s_shift(ring, _s_mulc(ring, ring.subst_v(G), U), 1))
        res = _s_sub(ring, G, _s_mul(ring, sub("dyck"), rhs))
    elif model is EquationModel.BERNOULLI:
        rhs = _s_add(ring, one, _s_shift(ring, _s_mulc(ring, ring.subst_v(sub("meander")), ring.scale(U, 2)), 1))
        res = _s_sub(ring, G, _s_mul(ring, sub("bilateral"), rhs))
    else:
        raise ValueError(model)
    return _to_seriespoly(model, ring, M, N, res, series.y, 0)


def verify_H_equals_G(N: int, column: SeriesPoly | None = None, diagonal: SeriesPoly | None = None) -> bool:
    """Check ``H(u0, u1, y=u0) == G(u0, u1)`` coefficientwise up to ``u0^N`` (M = 1)."""
    if N > 14:
        raise ValueError("N <= 14")
    H = column if column is not None else solve_qfe(EquationModel.STAIRCASE_COLUMN, 1, N, y=1)
    G = diagonal if diagonal is not None else solve_qfe(EquationModel.STAIRCASE_DIAGONAL, 1, N)
    for n in range(N + 1):
        folded: dict[tuple[int, ...], Number] = {}
        for (w, m1), c in H.coeffs[n].items():
            folded[(m1,)] = folded.get((m1,), 0) + c
        if folded != {e: c for e, c in G.coeffs[n].items() if c}:
            return False
    return True


# --- factorial moments ------------------------------------------------------------


def _as_multi_index(k, M: int) -> tuple[int, ...]:
    if isinstance(k, int):
        k = (k,)
    k = tuple(k)
    if len(k) > M or any(x < 0 for x in k):
        raise ValueError(f"bad multi-index {k} for M={M}")
    return k + (0,) * (M - len(k))


@lru_cache(maxsize=64)
def solve_jets(model, M: int, N: int, K: int) -> dict[tuple[int, ...], RationalSeries]:
    """All factorial-moment generating functions ``g_k`` with ``|k| <= K`` via the jet ring.

    Independent of :class:`SeriesPoly`; only the diagonal and walk models.
    """
    model = EquationModel.parse(model)
    if model is EquationModel.STAIRCASE_COLUMN:
        raise ValueError("jets are not implemented for the column model")
    ring = JetRing(M, K, N)
    subs: dict[str, list] = {}
    for name in _transitive_deps(model):
        subs[name], _ = _fixed_point(_SUB_MODEL[name], ring, N, subs, None)
    G, _ = _fixed_point(model, ring, N, subs, None)
    return {j: RationalSeries(tuple(Fraction(G[n][i]) for n in range(N + 1)))
            for i, j in enumerate(ring.index)}


def factorial_mgf_series(model, k, N: int, M: int | None = None, y=None, method: str = "expand") -> RationalSeries:
    """``g_k(u0) = (1/k!) d^k G / du^k`` at ``u1 = ... = uM = 1``.

    ``method="expand"`` sums ``prod binom(e_i, k_i)`` over the expanded
    series; ``method="jet"`` reads the coefficient off :func:`solve_jets`.
    """
    model = EquationModel.parse(model)
    if M is None:
        M = max(1, len(k) if not isinstance(k, int) else 1)
    k = _as_multi_index(k, M)
    if sum(k) > MAX_MGF_ORDER:
        raise ValueError(f"|k| <= {MAX_MGF_ORDER}")
    if method == "jet":
        if y is not None:
            raise ValueError("jets are not implemented for the column model")
        return solve_jets(model, M, N, sum(k))[k]
    if N > MAX_MGF_N:
        raise ValueError(f"N <= {MAX_MGF_N}")
    s = solve_qfe(model, M, N, y)
    skip = 1 if model is EquationModel.STAIRCASE_COLUMN else 0
    out = []
    for poly in s.coeffs:
        tot = 0
        for e, c in poly.items():
            w = c
            for ei, ki in zip(e[skip:], k):
                w *= comb(ei, ki)
                if not w:
                    break
            tot += w
        out.append(Fraction(tot))
    return RationalSeries(tuple(out))


def stirling2(n: int, k: int) -> int:
    return _stirling2(n, k)


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


@dataclass(frozen=True)
class FiniteMoments:
    """Exact mixed moments at a fixed size ``n0`` in the uniform model."""

    k: tuple[int, ...]
    n0: int
    factorial: Fraction
    ordinary: Fraction
    count: Number = field(default=0)


def finite_moments(model, k, n0: int, M: int | None = None, y=None, method: str = "auto") -> FiniteMoments:
    """Factorial moment ``E[prod (X_i)_{k_i}]`` and ordinary moment ``E[prod X_i^{k_i}]`` at ``n0``.

    The ordinary moment is the Stirling-2 combination of factorial moments
    of all orders ``j <= k``.
    """
    model = EquationModel.parse(model)
    if M is None:
        M = len(k) if not isinstance(k, int) else 1
    k = _as_multi_index(k, M)
    if method == "auto":
        method = "expand" if n0 <= 12 or model is EquationModel.STAIRCASE_COLUMN else "jet"
    N = max(n0, 2)
    if method == "jet":
        jets = solve_jets(model, M, N, sum(k))

        def g(j):
            return jets[j][n0]
    else:
        def g(j):
            return factorial_mgf_series(model, j, N, M=M, y=y, method="expand")[n0]

    count = g((0,) * M)
    if count == 0:
        raise ZeroCount(f"no {model.value} objects at size {n0}")

    def fact_moment(j):
        kf = 1
        for x in j:
            kf *= factorial(x)
        return Fraction(kf) * g(j) / count

    ordinary = Fraction(0)
    for j in product(*(range(x + 1) for x in k)):
        w = 1
        for ki, ji in zip(k, j):
            w *= _stirling2(ki, ji)
        if w:
            ordinary += w * fact_moment(j)
    return FiniteMoments(k, n0, fact_moment(k), ordinary, count)
