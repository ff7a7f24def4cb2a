"""Markov-chain sampling of self-avoiding polygons at fixed perimeter.

The chain state is a closed step string.  A move picks a vertex ``i`` and
an arc of ``m`` steps following it (``1 <= m < L``, wrapping around the
cycle) and applies one of three isometries fixing the arc's endpoints:
point reflection through their midpoint (inversion), reflection across the
line through them, or reflection across their perpendicular bisector.  The
two reflections exist when the endpoints lie on a common horizontal,
vertical or diagonal line; otherwise inversion is used.  Since the arc is
moved by an isometry, only collisions with the rest of the polygon need
checking.  Non self-avoiding proposals are rejected.  Each move is an involution
selected with the same probability from either side, so the uniform
distribution on rooted strings is stationary, which is uniform on polygons.
Without the bisector reflection, or without wrapping arcs, the chain is
not irreducible (a horizontal domino never turns vertical).

Kernels are compiled with numba; random numbers come from numpy's PCG64 in
blocks and are passed in.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .polygons import STEPS, LatticePolygon, enumerate_sap, validate_polygon

FAMILIES = ("diagonal", "vertical")
VARIANTS = ("a", "b")
BURN_IN_SWEEPS = 100
CHECK_EVERY = 10_000


class DegenerateFit(ValueError):
    """Extrapolation needs at least two distinct abscissae."""


class InvalidChainState(RuntimeError):
    pass


@dataclass(frozen=True)
class McConfig:
    """Parameters of one chain.

    ``moment_family`` is ``diagonal``, ``vertical`` or ``both``.
    """

    n0: int
    samples: int
    sweep_factor: int = 10
    seed: int = 0
    kmax: int = 2
    moment_family: str = "both"
    n_batches: int = 20
    reflections: bool = True

    def __post_init__(self):
        if self.n0 < 2:
            raise ValueError("n0 must be >= 2")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.sweep_factor < 1:
            raise ValueError("sweep_factor must be >= 1")
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        if self.n_batches < 20:
            raise ValueError("at least 20 batches")
        if self.moment_family not in (*FAMILIES, "both"):
            raise ValueError(f"unknown moment family {self.moment_family!r}")

    @property
    def families(self) -> tuple[str, ...]:
        return FAMILIES if self.moment_family == "both" else (self.moment_family,)

    @property
    def moves_between(self) -> int:
        return self.sweep_factor * self.n0


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    n_samples: int
    n_batches: int
    seed: int


@dataclass(frozen=True)
class RatioSeriesPoint:
    """One ratio estimate at abscissa ``x = 1/(2 n0)`` with weight ``1/stderr**2``."""

    x: float
    y: float
    weight: float

    def __post_init__(self):
        if not self.x > 0:
            raise ValueError("x must be positive")

    @classmethod
    def from_estimate(cls, n0: int, est: McEstimate) -> "RatioSeriesPoint":
        w = 1.0 / est.stderr**2 if est.stderr > 0 else 1.0
        return cls(1.0 / (2 * n0), est.value, w)


# --- numba kernels ------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _try_move(xs, ys, grid, W, L, i, m, kind, nx, ny):
    """Move the arc of ``m`` steps starting at vertex ``i`` in place if the result is self-avoiding.

    Coordinates are unbounded; the occupancy grid is a torus of side
    ``W > L/2``.  Two vertices of a valid polygon never differ by ``W`` or more
    in a coordinate, so a torus alias can only flag an invalid proposal.
    """
    if m < 2:
        return True
    j = (i + m) % L
    xi, yi = xs[i], ys[i]
    dx, dy = xs[j] - xi, ys[j] - yi
    # axis of the endpoints: 1 horizontal, 2 vertical, 3 diagonal, 4 anti-diagonal
    axis = 0
    if kind != 0:
        if dy == 0:
            axis = 1
        elif dx == 0:
            axis = 2
        elif dx == dy:
            axis = 3
        elif dx == -dy:
            axis = 4
    if axis == 0:
        kind = 0
    sx, sy = xi + xs[j], yi + ys[j]
    c = xi + yi + dx  # bisector x + y = c when axis == 3
    e = yi - xi - dx  # bisector y - x = e when axis == 4
    for t in range(1, m):
        k = (i + t) % L
        q = (i + m - t) % L
        if kind == 0:
            px, py = sx - xs[q], sy - ys[q]
        elif kind == 1:  # across the line through both endpoints
            if axis == 1:
                px, py = xs[k], 2 * yi - ys[k]
            elif axis == 2:
                px, py = 2 * xi - xs[k], ys[k]
            elif axis == 3:
                px, py = xi + ys[k] - yi, yi + xs[k] - xi
            else:
                px, py = xi - (ys[k] - yi), yi - (xs[k] - xi)
        else:  # across the perpendicular bisector, walked backwards
            if axis == 1:
                px, py = sx - xs[q], ys[q]
            elif axis == 2:
                px, py = xs[q], sy - ys[q]
            elif axis == 3:
                px, py = c - ys[q], c - xs[q]
            else:
                px, py = ys[q] - e, xs[q] + e
        g = grid[px % W, py % W]
        if g != 0 and not 0 < (g - 1 - i) % L < m:
            return False
        nx[t] = px
        ny[t] = py
    for t in range(1, m):
        k = (i + t) % L
        grid[xs[k] % W, ys[k] % W] = 0
    for t in range(1, m):
        k = (i + t) % L
        xs[k] = nx[t]
        ys[k] = ny[t]
        grid[xs[k] % W, ys[k] % W] = k + 1
    return True


@njit(cache=True, nogil=True)
def _run_moves(xs, ys, grid, W, L, draws, reflections, nx, ny):
    """One proposal per draw; returns the number accepted (identity moves included)."""
    acc = 0
    for t in range(draws.shape[0]):
        r = draws[t]
        kind = r % 3
        r //= 3
        i = r % L
        m = r // L + 1
        if _try_move(xs, ys, grid, W, L, i, m, kind if reflections else 0, nx, ny):
            acc += 1
    return acc


@njit(cache=True, nogil=True)
def _is_valid(xs, ys, grid, W, L):
    for k in range(L):
        k1 = (k + 1) % L
        if abs(xs[k1] - xs[k]) + abs(ys[k1] - ys[k]) != 1:
            return False
        if grid[xs[k] % W, ys[k] % W] != k + 1:
            return False
    return True


@njit(cache=True, nogil=True)
def _measure(xs, ys, L, kmax, cellmap, coff, keys, cx, cy, tot, touched, out):
    """Layer moments of the current polygon.

    ``out[f, v, k-1]`` gets family ``f`` (0 diagonal, 1 vertical), variant
    ``v`` (0 layer total to the k, 1 sum of segment lengths to the k).
    Work is proportional to perimeter plus area.
    """
    W = cellmap.shape[0]
    x0, y0 = xs[0] - coff, ys[0] - coff
    nh = 0
    for s in range(L):
        s1 = (s + 1) % L
        if ys[s] == ys[s1]:
            x = min(xs[s], xs[s1])
            keys[nh] = (x - x0) * W + (ys[s] - y0)
            nh += 1
    hk = np.sort(keys[:nh])
    nc = 0
    for p in range(0, nh, 2):
        x = hk[p] // W
        ya = hk[p] % W
        yb = hk[p + 1] % W
        for y in range(ya, yb):
            cellmap[x, y] = 1
            cx[nc] = x
            cy[nc] = y
            nc += 1
    for f in range(2):
        if f == 0:
            ddx, ddy = 1, -1
        else:
            ddx, ddy = 0, 1
        nt = 0
        for c in range(nc):
            x, y = cx[c], cy[c]
            if cellmap[x - ddx, y - ddy]:
                continue
            ln = 1
            while cellmap[x + ln * ddx, y + ln * ddy]:
                ln += 1
            lid = x + y if f == 0 else x
            if tot[lid] == 0:
                touched[nt] = lid
                nt += 1
            tot[lid] += ln
            p = 1.0
            for k in range(kmax):
                p *= ln
                out[f, 1, k] += p
        for t in range(nt):
            lid = touched[t]
            p = 1.0
            for k in range(kmax):
                p *= tot[lid]
                out[f, 0, k] += p
            tot[lid] = 0
    for c in range(nc):
        cellmap[cx[c], cy[c]] = 0
    return nc


@njit(cache=True, nogil=True)
def _sample_block(xs, ys, grid, W, L, draws, per_sample, reflections, nx, ny,
                  kmax, cellmap, coff, keys, cx, cy, tot, touched, out, areas):
    ns = out.shape[0]
    acc = 0
    for s in range(ns):
        acc += _run_moves(xs, ys, grid, W, L, draws[s * per_sample:(s + 1) * per_sample],
                          reflections, nx, ny)
        areas[s] = _measure(xs, ys, L, kmax, cellmap, coff, keys, cx, cy, tot, touched, out[s])
    return acc


@njit(cache=True, nogil=True)
def _canonical_key(xs, ys, L):
    """Base-4 code of the canonical step string (lex-min start, counter-clockwise)."""
    st = 0
    for k in range(1, L):
        if xs[k] < xs[st] or (xs[k] == xs[st] and ys[k] < ys[st]):
            st = k
    ccw = xs[(st + 1) % L] > xs[st]  # first step R
    key = 0
    mult = 1
    for m in range(L):
        if ccw:
            a = (st + m) % L
            b = (a + 1) % L
            ddx, ddy = xs[b] - xs[a], ys[b] - ys[a]
        else:
            a = (st - m) % L
            b = a - 1 if a > 0 else L - 1
            ddx, ddy = xs[b] - xs[a], ys[b] - ys[a]
        if ddx == 1:
            code = 0
        elif ddx == -1:
            code = 1
        elif ddy == 1:
            code = 2
        else:
            code = 3
        key += code * mult
        mult *= 4
    return key


@njit(cache=True, nogil=True)
def _key_block(xs, ys, grid, W, L, draws, per_sample, reflections, nx, ny, keys):
    for s in range(keys.shape[0]):
        _run_moves(xs, ys, grid, W, L, draws[s * per_sample:(s + 1) * per_sample],
                   reflections, nx, ny)
        keys[s] = _canonical_key(xs, ys, L)


# --- chain state ----------------------------------------------------------------------


def initial_steps(n0: int) -> str:
    """A ``w x h`` rectangle with ``w + h = n0`` and sides as equal as possible."""
    w = (n0 + 1) // 2
    h = n0 - w
    return "R" * w + "U" * h + "L" * w + "D" * h


class Chain:
    """Mutable chain state: vertex coordinates plus an occupancy grid."""

    def __init__(self, steps: str, seed, reflections: bool = True):
        L = len(steps)
        validate_polygon(steps)
        self.L = L
        self.reflections = reflections
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.W = L // 2 + 1
        self.grid = np.zeros((self.W, self.W), dtype=np.int32)
        self.xs = np.zeros(L, dtype=np.int64)
        self.ys = np.zeros(L, dtype=np.int64)
        x = y = 0
        for k, s in enumerate(steps):
            self.xs[k], self.ys[k] = x, y
            self.grid[x % self.W, y % self.W] = k + 1
            dx, dy = STEPS[s]
            x += dx
            y += dy
        self._nx = np.zeros(L, dtype=np.int64)
        self._ny = np.zeros(L, dtype=np.int64)
        # measurement scratch
        self.coff = L // 2 + 2
        W = 2 * self.coff + 1
        self._cellmap = np.zeros((W, W), dtype=np.uint8)
        self._keys = np.zeros(L, dtype=np.int64)
        amax = (L // 4 + 1) ** 2 + 1
        self._cx = np.zeros(amax, dtype=np.int64)
        self._cy = np.zeros(amax, dtype=np.int64)
        self._tot = np.zeros(2 * W + 1, dtype=np.int64)
        self._touched = np.zeros(2 * W + 1, dtype=np.int64)
        self.proposed = 0
        self.accepted = 0

    def draws(self, n: int) -> np.ndarray:
        return self.rng.integers(0, 3 * self.L * (self.L - 1), size=n, dtype=np.int64)

    def advance(self, moves: int, chunk: int = 1 << 20) -> None:
        while moves > 0:
            n = min(moves, chunk)
            self.accepted += _run_moves(self.xs, self.ys, self.grid, self.W, self.L,
                                        self.draws(n), self.reflections, self._nx, self._ny)
            self.proposed += n
            moves -= n
        self.check()

    def check(self) -> None:
        if not _is_valid(self.xs, self.ys, self.grid, self.W, self.L):
            raise InvalidChainState("chain left the set of self-avoiding polygons")

    def steps(self) -> str:
        out = []
        for k in range(self.L):
            k1 = (k + 1) % self.L
            d = (int(self.xs[k1] - self.xs[k]), int(self.ys[k1] - self.ys[k]))
            out.append(next(s for s, v in STEPS.items() if v == d))
        return "".join(out)

    def polygon(self) -> LatticePolygon:
        return validate_polygon(self.steps())

    def sample(self, n: int, per_sample: int, kmax: int) -> tuple[np.ndarray, np.ndarray]:
        """``n`` measurements spaced ``per_sample`` moves; returns (moments[n, 2, 2, kmax], areas)."""
        out = np.zeros((n, 2, 2, kmax))
        areas = np.zeros(n, dtype=np.int64)
        block = max(1, min(n, (1 << 21) // per_sample))
        checked = self.proposed
        for s0 in range(0, n, block):
            m = min(block, n - s0)
            self.accepted += _sample_block(
                self.xs, self.ys, self.grid, self.W, self.L, self.draws(m * per_sample), per_sample,
                self.reflections, self._nx, self._ny, kmax, self._cellmap, self.coff, self._keys,
                self._cx, self._cy, self._tot, self._touched, out[s0:s0 + m], areas[s0:s0 + m])
            self.proposed += m * per_sample
            if self.proposed - checked >= CHECK_EVERY:
                self.check()
                checked = self.proposed
        return out, areas

    def keys(self, n: int, per_sample: int) -> np.ndarray:
        keys = np.zeros(n, dtype=np.int64)
        block = max(1, min(n, (1 << 21) // per_sample))
        for s0 in range(0, n, block):
            m = min(block, n - s0)
            _key_block(self.xs, self.ys, self.grid, self.W, self.L, self.draws(m * per_sample),
                       per_sample, self.reflections, self._nx, self._ny, keys[s0:s0 + m])
            self.proposed += m * per_sample
        self.check()
        return keys


def mc_move(p: LatticePolygon | str, rng: np.random.Generator, reflections: bool = True) -> LatticePolygon:
    """One proposal on ``p``; the input is returned unchanged on rejection."""
    steps = p.steps if isinstance(p, LatticePolygon) else p
    ch = Chain(steps, 0, reflections)
    ch.rng = rng
    ch.advance(1)
    return ch.polygon()


def canonical_key(p: LatticePolygon | str) -> int:
    steps = p.steps if isinstance(p, LatticePolygon) else p
    ch = Chain(steps, 0)
    return int(_canonical_key(ch.xs, ch.ys, ch.L))


# --- estimation -----------------------------------------------------------------------


def batch_means(x: np.ndarray, n_batches: int) -> tuple[float, float]:
    """Mean and its standard error from ``n_batches`` contiguous batches."""
    x = np.asarray(x, dtype=float)
    if x.size < n_batches:
        return float(x.mean()), float("nan")
    b = x.size // n_batches
    means = x[: b * n_batches].reshape(n_batches, b).mean(axis=1)
    return float(x.mean()), float(means.std(ddof=1) / np.sqrt(n_batches))


def jackknife_ratio(x: np.ndarray, r: int, n_batches: int) -> tuple[float, float]:
    """``mean(x**r) / mean(x)**r`` and its delete-one-batch jackknife error."""
    x = np.asarray(x, dtype=float)
    b = x.size // n_batches
    if b == 0:
        return float(np.mean(x**r) / np.mean(x) ** r), float("nan")
    xb = x[: b * n_batches].reshape(n_batches, b)
    s1 = xb.sum(axis=1)
    sr = (xb**r).sum(axis=1)
    full = float(np.mean(x**r) / np.mean(x) ** r)
    n = b * (n_batches - 1)
    loo = ((sr.sum() - sr) / n) / ((s1.sum() - s1) / n) ** r
    err = np.sqrt((n_batches - 1) / n_batches * np.sum((loo - loo.mean()) ** 2))
    return full, float(err)


@dataclass
class McResult:
    """Per-sample layer moments of one chain with derived estimates."""

    config: McConfig
    samples: np.ndarray = field(repr=False)  # [n, family, variant, k]
    areas: np.ndarray = field(repr=False)
    proposed: int = 0
    accepted: int = 0

    def values(self, family: str, variant: str, k: int) -> np.ndarray:
        return self.samples[:, FAMILIES.index(family), VARIANTS.index(variant), k - 1]

    def moment(self, family: str, variant: str, k: int, r: int) -> McEstimate:
        v, e = batch_means(self.values(family, variant, k) ** r, self.config.n_batches)
        return McEstimate(v, e, len(self.samples), self.config.n_batches, self.config.seed)

    def ratio(self, family: str, variant: str, k: int, r: int = 2) -> McEstimate:
        v, e = jackknife_ratio(self.values(family, variant, k), r, self.config.n_batches)
        return McEstimate(v, e, len(self.samples), self.config.n_batches, self.config.seed)

    def rows(self):
        """CSV rows: n0, family, variant, k, r, estimate, stderr, samples, seed, quantity."""
        c = self.config
        for fam in c.families:
            for var in VARIANTS:
                for k in range(1, c.kmax + 1):
                    for r in (1, 2):
                        e = self.moment(fam, var, k, r)
                        yield (c.n0, fam, var, k, r, e.value, e.stderr, e.n_samples, c.seed, "moment")
                    e = self.ratio(fam, var, k, 2)
                    yield (c.n0, fam, var, k, 2, e.value, e.stderr, e.n_samples, c.seed, "ratio")


CSV_HEADER = ("n0", "family", "variant", "k", "r", "estimate", "stderr", "samples", "seed", "quantity")


def mc_run(config: McConfig, progress=None) -> McResult:
    """Burn in for 100 sweeps, then take ``samples`` measurements ``sweep_factor * n0`` moves apart."""
    # one independent stream per (seed, n0)
    ch = Chain(initial_steps(config.n0), (config.seed, config.n0), config.reflections)
    ch.advance(BURN_IN_SWEEPS * config.moves_between)
    if progress:
        progress(f"n0={config.n0}: burn-in done")
    samples, areas = ch.sample(config.samples, config.moves_between, config.kmax)
    return McResult(config, samples, areas, ch.proposed, ch.accepted)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("POLYLIM_THREADS", "1")))
    except ValueError:
        return 1


def mc_run_many(configs: list[McConfig], progress=None) -> list[McResult]:
    """Independent chains, run concurrently up to ``POLYLIM_THREADS``; output order follows input."""
    n = min(_threads(), len(configs))
    if n <= 1:
        return [mc_run(c, progress) for c in configs]
    with ThreadPoolExecutor(n) as ex:
        return list(ex.map(lambda c: mc_run(c, progress), configs))


# --- uniformity -----------------------------------------------------------------------


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    n_classes: int
    visited: int
    measurements: int


def chi_square_uniformity(n0: int, measurements: int, seed: int, spacing: int | None = None,
                          reflections: bool = True) -> ChiSquareResult:
    """Compare visit counts of every polygon of perimeter ``2 n0`` with the uniform law."""
    from scipy.stats import chisquare

    keys = {canonical_key(p): i for i, p in enumerate(enumerate_sap(2 * n0))}
    spacing = spacing or 10 * n0
    ch = Chain(initial_steps(n0), seed, reflections)
    ch.advance(BURN_IN_SWEEPS * spacing)
    seen = ch.keys(measurements, spacing)
    uniq, cnt = np.unique(seen, return_counts=True)
    counts = np.zeros(len(keys))
    for u, c in zip(uniq, cnt):
        counts[keys[int(u)]] = c
    if len(keys) == 1:
        return ChiSquareResult(0.0, 0, 1.0, 1, 1, measurements)
    stat, p = chisquare(counts)
    return ChiSquareResult(float(stat), len(keys) - 1, float(p), len(keys),
                           int((counts > 0).sum()), measurements)


# --- extrapolation --------------------------------------------------------------------


@dataclass(frozen=True)
class Fit:
    intercept: float
    slope: float
    residual: float
    intercept_stderr: float
    slope_stderr: float

    def __iter__(self):
        return iter((self.intercept, self.slope, self.residual))


def extrapolate(points: list[RatioSeriesPoint]) -> Fit:
    """Weighted least squares of ``y = a + b x``; ``a`` is the infinite-size value."""
    if len(points) < 2:
        raise DegenerateFit("need at least two points")
    x = np.array([p.x for p in points])
    y = np.array([p.y for p in points])
    w = np.array([p.weight for p in points])
    if np.ptp(x) == 0:
        raise DegenerateFit("all abscissae are equal")
    sw = np.sqrt(w)
    A = np.column_stack([np.ones_like(x), x]) * sw[:, None]
    coef, *_ = np.linalg.lstsq(A, y * sw, rcond=None)
    res = float(np.sum(w * (y - coef[0] - coef[1] * x) ** 2))
    cov = np.linalg.inv(A.T @ A)
    return Fit(float(coef[0]), float(coef[1]), res, float(np.sqrt(cov[0, 0])), float(np.sqrt(cov[1, 1])))
