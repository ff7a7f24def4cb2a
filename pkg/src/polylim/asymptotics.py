"""Dominant-balance asymptotics: exponents, amplitude recursions, limit moments.

Multi-indices are tuples ``k = (k1, ..., kM)``.  Amplitude tables are built
over every index of total degree ``<= |kmax|`` because the recursions couple
``k`` to ``k - e_{i+1} + e_i``, which can leave the box ``k <= kmax``.
Indices are visited by total degree, then by ``sum i*k_i``; that order puts
every dependency before its dependents.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial

from .scalar import ExactScalar, GammaPole, gamma_exact
from .series import EquationModel

MAX_COMPONENT = 8

POLYGON_MODELS = (EquationModel.STAIRCASE_DIAGONAL, EquationModel.STAIRCASE_COLUMN)
WALK_MODELS = (EquationModel.DYCK, EquationModel.BILATERAL, EquationModel.MEANDER, EquationModel.BERNOULLI)
_WALK_SHIFT = {
    EquationModel.DYCK: Fraction(0),
    EquationModel.BILATERAL: Fraction(1),
    EquationModel.MEANDER: Fraction(1),
    EquationModel.BERNOULLI: Fraction(3, 2),
}


class IrrationalConstant(ValueError):
    """A model constant would need a root that is not rational."""


def _mi(k, M: int | None = None) -> tuple[int, ...]:
    if isinstance(k, int):
        k = (k,)
    k = tuple(k)
    if M is not None:
        if len(k) > M:
            raise ValueError(f"multi-index {k} longer than M={M}")
        k = k + (0,) * (M - len(k))
    if any(x < 0 for x in k):
        raise ValueError(f"negative multi-index {k}")
    return k


def _unit(i: int, M: int) -> tuple[int, ...]:
    """``e_i`` for ``1 <= i <= M``."""
    return tuple(int(t == i - 1) for t in range(M))


def _shift(k, plus: int | None, minus: int | None):
    """``k + e_plus - e_minus`` or None when a component turns negative."""
    out = list(k)
    if plus:
        out[plus - 1] += 1
    if minus:
        out[minus - 1] -= 1
        if out[minus - 1] < 0:
            return None
    return tuple(out)


def _ordered(M: int, degree: int) -> list[tuple[int, ...]]:
    idx = [k for k in product(range(degree + 1), repeat=M) if sum(k) <= degree]
    idx.sort(key=lambda k: (sum(k), sum((i + 1) * x for i, x in enumerate(k)), k))
    return idx


def _proper_splits(k):
    """All ``l`` with ``0 < l < k`` componentwise-ordered (``l != 0``, ``l != k``)."""
    for l in product(*(range(x + 1) for x in k)):
        if any(l) and l != k:
            yield l, tuple(a - b for a, b in zip(k, l))


def gamma_exponent(model, k) -> Fraction:
    """Leading singular exponent of ``g_k``.

    >>> gamma_exponent("staircase-diagonal", (2,))
    Fraction(5, 2)
    """
    model = EquationModel.parse(model)
    k = _mi(k)
    g = Fraction(-1, 2) + sum(Fraction(2 + i, 2) * x for i, x in enumerate(k, start=1))
    return g + _WALK_SHIFT.get(model, Fraction(0))


def c_table(M: int, kmax) -> dict[tuple[int, ...], Fraction]:
    """Model-independent amplitude ratios ``c_k`` for all ``k <= kmax``."""
    kmax = _mi(kmax, M)
    if max(kmax) > MAX_COMPONENT:
        raise ValueError(f"components of kmax must be <= {MAX_COMPONENT}")
    full = _c_full(M, sum(kmax))
    return {k: v for k, v in full.items() if all(a <= b for a, b in zip(k, kmax))}


@lru_cache(maxsize=32)
def _c_full(M: int, degree: int) -> dict[tuple[int, ...], Fraction]:
    c: dict[tuple[int, ...], Fraction] = {}
    zero = (0,) * M
    for k in _ordered(M, degree):
        if k == zero:
            c[k] = Fraction(1)
            continue
        val = Fraction(0)
        km = _shift(k, None, 1)
        if km is not None:
            val -= 2 * gamma_exponent(EquationModel.STAIRCASE_DIAGONAL, km) * c[km]
        for i in range(1, M):
            kk = _shift(k, i, i + 1)
            if kk is not None:
                val += (k[i - 1] + 1) * c[kk]
        val -= Fraction(1, 2) * sum(c[l] * c[r] for l, r in _proper_splits(k))
        c[k] = val
    return c


# --- model constants ----------------------------------------------------------------


@dataclass(frozen=True)
class ModelConstants:
    """``sqrt(u_c)``, ``f_0`` and ``f_{e_k}`` of one model."""

    source: str
    sqrt_uc: ExactScalar
    f0: ExactScalar
    f_e: tuple[ExactScalar, ...]

    @property
    def u_c(self) -> ExactScalar:
        return self.sqrt_uc**2

    def uc_power(self, x: Fraction) -> ExactScalar:
        x = Fraction(x)
        if (2 * x).denominator != 1:
            raise ValueError("u_c is raised to half-integer powers only")
        return self.sqrt_uc ** int(2 * x)


def diagonal_constants(M: int) -> ModelConstants:
    return ModelConstants(
        "diagonal",
        ExactScalar(Fraction(1, 2)),
        ExactScalar(-1),
        tuple(ExactScalar(Fraction(factorial(k), 2 ** (3 * (k + 1)))) for k in range(1, M + 1)),
    )


def rational_root(x: Fraction, n: int) -> Fraction:
    x = Fraction(x)
    out = []
    for part in (x.numerator, x.denominator):
        r = round(abs(part) ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**n == part:
                out.append(cand)
                break
        else:
            raise IrrationalConstant(f"{x} has no rational {n}-th root")
    return Fraction(out[0], out[1])


def column_constants(M: int, y) -> ModelConstants:
    """Constants of the width/column-height model; needs ``y = r**4`` with rational ``0 < r < 1``."""
    y = Fraction(y)
    if not 0 < y < 1:
        raise ValueError("column model needs 0 < y < 1")
    r = rational_root(y, 4)
    return ModelConstants(
        f"column(y={y})",
        ExactScalar(1 - r * r),
        ExactScalar(-1 / r),
        tuple(ExactScalar(Fraction(factorial(k), 2**k) / r**k) for k in range(1, M + 1)),
    )


def amplitude_f(model, k, constants: ModelConstants | None = None, y=None) -> ExactScalar:
    """``f_k = c_k f_0^(1-|k|) prod f_{e_i}^{k_i}``."""
    model = EquationModel.parse(model)
    k = _mi(k)
    M = len(k)
    if constants is None:
        constants = _polygon_constants(model, M, y)
    c = _c_full(M, sum(k))[k]
    out = ExactScalar(c) * constants.f0 ** (1 - sum(k))
    for fe, ki in zip(constants.f_e, k):
        out = out * fe**ki
    return out


def _polygon_constants(model: EquationModel, M: int, y) -> ModelConstants:
    if model is EquationModel.STAIRCASE_DIAGONAL:
        return diagonal_constants(M)
    if model is EquationModel.STAIRCASE_COLUMN:
        if y is None:
            raise ValueError("column model needs y")
        return column_constants(M, y)
    raise ValueError(f"{model.value} is not a polygon model")


@lru_cache(maxsize=32)
def pde_amplitudes(M: int, degree: int) -> dict[tuple[int, ...], Fraction]:
    """Diagonal-model ``f_k`` straight from the scaling-function PDE, ``f_0 = -1``.

    Independent of :func:`c_table`: only ``f_0`` is seeded, ``f_{e_k}`` are
    produced by the recursion itself.
    """
    f: dict[tuple[int, ...], Fraction] = {}
    zero = (0,) * M
    for k in _ordered(M, degree):
        if k == zero:
            f[k] = Fraction(-1)
            continue
        acc = Fraction(0)
        km = _shift(k, None, 1)
        if km is not None:
            acc += Fraction(1, 16) * gamma_exponent(EquationModel.STAIRCASE_DIAGONAL, km) * f[km]
        for i in range(1, M):
            kk = _shift(k, i, i + 1)
            if kk is not None:
                acc += Fraction(i + 1, 4) * (k[i - 1] + 1) * f[kk]
        acc += sum(f[l] * f[r] for l, r in _proper_splits(k))
        f[k] = -acc / (2 * f[zero])
    return f


def riccati_amplitudes(kmax: int) -> list[Fraction]:
    """M = 1 amplitudes from ``gamma_{k-1} f_{k-1} / 16 + sum_l f_l f_{k-l} = 0``."""
    f = [Fraction(-1)]
    for k in range(1, kmax + 1):
        g = Fraction(3 * (k - 1), 2) - Fraction(1, 2)
        acc = g * f[k - 1] / 16 + sum(f[l] * f[k - l] for l in range(1, k))
        f.append(-acc / (2 * f[0]))
    return f


# --- walks -------------------------------------------------------------------------


WALK_BOUNDARY = {
    EquationModel.DYCK: Fraction(-4),
    EquationModel.BILATERAL: Fraction(1, 2),
    EquationModel.MEANDER: Fraction(1),
    EquationModel.BERNOULLI: Fraction(1, 2),
}


@dataclass(frozen=True)
class AmplitudeTable:
    """``k -> (gamma_k, c_k, f_k)`` for one model."""

    model: EquationModel
    M: int
    entries: dict[tuple[int, ...], tuple[Fraction, Fraction, ExactScalar]] = field(repr=False)

    def f(self, k) -> ExactScalar:
        return self.entries[_mi(k, self.M)][2]

    def gamma(self, k) -> Fraction:
        return self.entries[_mi(k, self.M)][0]

    def c(self, k) -> Fraction:
        return self.entries[_mi(k, self.M)][1]

    def rows(self):
        for k in sorted(self.entries, key=lambda k: (sum(k), k)):
            yield (k, *self.entries[k])


@lru_cache(maxsize=32)
def _walk_f(model: EquationModel, M: int, degree: int) -> dict[tuple[int, ...], Fraction]:
    zero = (0,) * M
    if model is EquationModel.BERNOULLI:
        fb = _walk_f(EquationModel.BILATERAL, M, degree)
        fm = _walk_f(EquationModel.MEANDER, M, degree)
        return {k: sum(fb[l] * fm[tuple(a - b for a, b in zip(k, l))]
                       for l in product(*(range(x + 1) for x in k)))
                for k in _ordered(M, degree)}
    fd = _walk_f(EquationModel.DYCK, M, degree) if model is EquationModel.MEANDER else None
    f: dict[tuple[int, ...], Fraction] = {}
    for k in _ordered(M, degree):
        if k == zero:
            f[k] = WALK_BOUNDARY[model]
            continue
        lin = Fraction(0)
        km = _shift(k, None, 1)
        if km is not None:
            lin += gamma_exponent(model, km) * f[km]
        for i in range(1, M):
            kk = _shift(k, i, i + 1)
            if kk is not None:
                lin += 2 * (i + 1) * (k[i - 1] + 1) * f[kk]
        if model is EquationModel.DYCK:
            quad = sum(f[l] * f[r] for l, r in _proper_splits(k))
            f[k] = -(lin + quad) / (2 * f[zero])
        elif model is EquationModel.BILATERAL:
            quad = sum(f[l] * f[r] for l, r in _proper_splits(k))
            f[k] = (lin - 8 * quad) / (16 * f[zero])
        else:
            quad = sum(f[l] * fd[tuple(a - b for a, b in zip(k, l))]
                       for l in product(*(range(x + 1) for x in k)) if l != k)
            f[k] = -(lin + quad) / fd[zero]
    return f


def walk_amplitudes(model, M: int, kmax) -> AmplitudeTable:
    """Leading amplitudes of the four walk models from their coupled recursions."""
    model = EquationModel.parse(model)
    if model not in WALK_MODELS:
        raise ValueError(f"{model.value} is not a walk model")
    kmax = _mi(kmax, M)
    if max(kmax) > MAX_COMPONENT:
        raise ValueError(f"components of kmax must be <= {MAX_COMPONENT}")
    return _walk_table(model, M, kmax)


def _walk_table(model, M, kmax) -> AmplitudeTable:
    f = _walk_f(model, M, sum(kmax))
    zero = (0,) * M
    entries = {}
    for k, fk in f.items():
        if not all(a <= b for a, b in zip(k, kmax)):
            continue
        c = fk * f[zero] ** (sum(k) - 1)
        for i, ki in enumerate(k, start=1):
            if ki:
                c /= f[_unit(i, M)] ** ki
        entries[k] = (gamma_exponent(model, k), c, ExactScalar(fk))
    return AmplitudeTable(model, M, entries)


def polygon_amplitudes(model, M: int, kmax, y=None) -> AmplitudeTable:
    kmax = _mi(kmax, M)
    if max(kmax) > MAX_COMPONENT:
        raise ValueError(f"components of kmax must be <= {MAX_COMPONENT}")
    return _polygon_table(EquationModel.parse(model), M, kmax, y)


def _polygon_table(model, M, kmax, y) -> AmplitudeTable:
    consts = _polygon_constants(model, M, y)
    entries = {
        k: (gamma_exponent(model, k), c, amplitude_f(model, k, consts))
        for k, c in _c_full(M, sum(kmax)).items()
        if all(a <= b for a, b in zip(k, kmax))
    }
    return AmplitudeTable(model, M, entries)


def amplitudes(model, M: int, kmax, y=None) -> AmplitudeTable:
    """Amplitude table of any model; no component cap (callers size it)."""
    model = EquationModel.parse(model)
    kmax = _mi(kmax, M)
    if model in WALK_MODELS:
        return _walk_table(model, M, kmax)
    return _polygon_table(model, M, kmax, y)


def walk_constants(model, M: int) -> ModelConstants:
    model = EquationModel.parse(model)
    f = _walk_f(model, M, 1)
    return ModelConstants(
        model.value,
        WALK_SQRT_UC,
        ExactScalar(f[(0,) * M]),
        tuple(ExactScalar(f[_unit(i, M)]) for i in range(1, M + 1)),
    )


WALK_SQRT_UC = ExactScalar(Fraction(1, 2), 0, 1)  # sqrt(1/2) = sqrt(2)/2


# --- limit moments -------------------------------------------------------------------


def limit_moment(model, k, y=None) -> ExactScalar:
    """``lim E[prod X_i^{k_i}]`` of the normalised parameters.

    ``k! / (f_0 u_c^(gamma_k - gamma_0)) * Gamma(gamma_0) / Gamma(gamma_k) * f_k``
    """
    model = EquationModel.parse(model)
    k = _mi(k)
    M = len(k)
    table = amplitudes(model, M, k, y)
    zero = (0,) * M
    if model in WALK_MODELS:
        sqrt_uc = WALK_SQRT_UC
    else:
        sqrt_uc = _polygon_constants(model, M, y).sqrt_uc
    g0, gk = table.gamma(zero), table.gamma(k)
    for g in (g0, gk):
        if g.denominator == 1 and g <= 0:
            raise GammaPole(f"gamma exponent {g} is a pole of Gamma")
    kfact = math.prod(factorial(x) for x in k)
    expo = gk - g0
    out = ExactScalar(kfact) / (table.f(zero) * sqrt_uc ** int(2 * expo))
    return out * gamma_exact(g0) / gamma_exact(gk) * table.f(k)


def limit_moment_ratio(k) -> ExactScalar:
    """``lim E[prod X_i^{k_i}] / prod E[X_i]^{k_i}``; depends on ``c_k`` and exponents only.

    >>> str(limit_moment_ratio((2,)))
    '10/(3π)'
    """
    k = _mi(k)
    M = len(k)
    if max(k, default=0) > MAX_COMPONENT:
        raise ValueError(f"components of k must be <= {MAX_COMPONENT}")
    poly = EquationModel.STAIRCASE_DIAGONAL
    zero = (0,) * M
    c = _c_full(M, sum(k))[k]
    out = ExactScalar(math.prod(factorial(x) for x in k) * c)
    out = out * gamma_exact(gamma_exponent(poly, zero)) ** (1 - sum(k))
    for i, ki in enumerate(k, start=1):
        if ki:
            out = out * gamma_exact(gamma_exponent(poly, _unit(i, M))) ** ki
    return out / gamma_exact(gamma_exponent(poly, k))


@dataclass(frozen=True)
class AlphaValue:
    """``alpha_k`` exactly (possibly with a sqrt(2)), its rational square, and a float."""

    k: int
    exact: ExactScalar
    squared: Fraction
    value: float


def alpha(k: int, model="staircase-diagonal", M: int | None = None, y=None) -> AlphaValue:
    """Scale factor between the ``k``-th normalised parameter and the excursion integral.

    ``alpha_k = -(f_{e_k} / f_0) 2^(3 - 3k/2) / k!``
    """
    model = EquationModel.parse(model)
    M = k if M is None else M
    if not 1 <= k <= M:
        raise ValueError("need 1 <= k <= M")
    consts = _polygon_constants(model, M, y)
    two_pow = ExactScalar(1, 0, 6 - 3 * k)  # sqrt(2)^(6-3k)
    a = -(consts.f_e[k - 1] / consts.f0) * two_pow / factorial(k)
    sq = a * a
    assert sq.is_rational()
    return AlphaValue(k, a, sq.q, float(a))


# --- scaling functions ---------------------------------------------------------------


def scaling_series_F0(model, M: int, order: int, y=None) -> dict[tuple[int, ...], Fraction]:
    """Coefficients of ``F_0(eps) = sum (-1)^|k| f_k eps^k`` up to total degree ``order``."""
    model = EquationModel.parse(model)
    if order > MAX_COMPONENT:
        raise ValueError(f"order <= {MAX_COMPONENT}")
    if model in WALK_MODELS:
        f = _walk_f(model, M, order)
        return {k: (-1) ** sum(k) * v for k, v in f.items()}
    consts = _polygon_constants(model, M, y)
    out = {}
    for k in _ordered(M, order):
        fk = amplitude_f(model, k, consts)
        if not fk.is_rational():
            raise IrrationalConstant("F0 coefficients must be rational")
        out[k] = (-1) ** sum(k) * fk.q
    return out


def _pmul(a, b, order):
    out: dict[tuple[int, ...], Fraction] = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            if sum(k) <= order:
                out[k] = out.get(k, 0) + va * vb
    return out


def _padd(*terms):
    out: dict[tuple[int, ...], Fraction] = {}
    for t in terms:
        for k, v in t.items():
            out[k] = out.get(k, 0) + v
    return out


def _pscale(a, c):
    return {k: c * v for k, v in a.items()}


def _euler(F, M, sign):
    """``eps_1 (F/2 + sign * sum (1+i/2) eps_i dF/deps_i)``."""
    out = {}
    for k, v in F.items():
        w = Fraction(1, 2) + sign * sum(Fraction(2 + i, 2) * x for i, x in enumerate(k, start=1))
        out[_shift(k, 1, None)] = w * v
    return out


def _ladder(F, M):
    """``sum_{i<M} (i+1) eps_{i+1} dF/deps_i``."""
    out: dict[tuple[int, ...], Fraction] = {}
    for k, v in F.items():
        for i in range(1, M):
            if k[i - 1]:
                kk = _shift(_shift(k, None, i), i + 1, None)
                out[kk] = out.get(kk, 0) + (i + 1) * k[i - 1] * v
    return out


def verify_pde_residual(model, M: int, order: int) -> dict[tuple[int, ...], Fraction]:
    """Plug the truncated ``F_0`` into its differential relation; return the non-zero residual terms.

    Terms of total degree ``<= order`` are exact, so the returned dict must
    be empty.  Staircase (diagonal) uses the PDE whose ``M = 1`` case is the
    Riccati equation; the walk models use their four scaling relations.
    """
    model = EquationModel.parse(model)
    zero = (0,) * M

    def F(m):
        return scaling_series_F0(m, M, order)

    if model is EquationModel.STAIRCASE_DIAGONAL:
        f = F(model)
        res = _padd(_pscale(_euler(f, M, -1), Fraction(1, 16)),
                    _pscale(_ladder(f, M), Fraction(1, 4)),
                    _pmul(f, f, order), {zero: Fraction(-1)})
    elif model is EquationModel.DYCK:
        f = F(model)
        res = _padd(_euler(f, M, -1), _pscale(_ladder(f, M), 2), _pmul(f, f, order), {zero: Fraction(-16)})
    elif model is EquationModel.BILATERAL:
        res = _padd(_pmul(F(model), F(EquationModel.DYCK), order), {zero: Fraction(2)})
    elif model is EquationModel.MEANDER:
        # sign of the last two terms fixed by f^(m)_0 = 1, f^(d)_0 = -4
        f = F(model)
        res = _padd(_euler(f, M, +1), _pscale(_ladder(f, M), -2),
                    _pscale(_pmul(f, F(EquationModel.DYCK), order), -1), {zero: Fraction(-4)})
    elif model is EquationModel.BERNOULLI:
        res = _padd(F(model), _pscale(_pmul(F(EquationModel.BILATERAL), F(EquationModel.MEANDER), order), -1))
    else:
        raise ValueError(f"no scaling relation for {model.value}")
    return {k: v for k, v in res.items() if v and sum(k) <= order}


# --- growth of moments ------------------------------------------------------------------


@dataclass
class GrowthReport:
    moments: list[float]
    root_ratio: list[float]  # m_k^(1/k) / k
    carleman_partial: list[float]  # partial sums of m_k^(-1/(2k))
    decay: dict[float, list[float]]  # t -> m_k t^k / k!


def moment_growth_check(M: int = 1, kmax: int = 20, ts=(0.5, 1.0, 2.0, 4.0)) -> GrowthReport:
    """Numerical look at how fast the diagonal limit moments ``m_{k e_1}`` grow."""
    if M == 1 and kmax > 20:
        raise ValueError("kmax <= 20 for M = 1")
    ms = [1.0]
    for k in range(1, kmax + 1):
        ms.append(float(limit_moment(EquationModel.STAIRCASE_DIAGONAL, (k,) + (0,) * (M - 1))))
    root = [ms[k] ** (1.0 / k) / k for k in range(1, kmax + 1)]
    carl, acc = [], 0.0
    for k in range(1, kmax + 1):
        acc += ms[k] ** (-1.0 / (2 * k))
        carl.append(acc)
    decay = {t: [ms[k] * t**k / factorial(k) for k in range(kmax + 1)] for t in ts}
    return GrowthReport(ms, root, carl, decay)
