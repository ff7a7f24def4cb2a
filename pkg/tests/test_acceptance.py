"""Acceptance gate: one test and one PASS/FAIL line per criterion.

The Monte Carlo reproduction runs about 20 minutes on one core.
"""
import hashlib
import math
import time
from collections import Counter
from fractions import Fraction
from itertools import product

import pytest

from polylim.asymptotics import (
    alpha, amplitude_f, limit_moment_ratio, scaling_series_F0, verify_pde_residual, walk_amplitudes,
)
from polylim.cli import main
from polylim.montecarlo import McConfig, RatioSeriesPoint, chi_square_uniformity, extrapolate, mc_run_many
from polylim.polygons import catalan, diagonal_moments, enumerate_staircase
from polylim.scalar import ExactScalar
from polylim.series import EquationModel, finite_moments, solve_qfe, verify_feq, verify_H_equals_G
from polylim.walks import enumerate_walks

WALKS = ["dyck", "bilateral-dyck", "meander", "bernoulli"]


def test_exact_series_reproduction(criterion):
    t = time.perf_counter()
    s = solve_qfe("staircase", 1, 12)
    dt = time.perf_counter() - t
    counts = s.counts()
    ok = counts[:6] == [0, 0, 1, 2, 5, 14] and counts[2:] == [catalan(n - 1) for n in range(2, 13)]
    criterion("G series t^2+2t^3+5t^4+14t^5+... through order 12", ok and dt < 5, f"{dt:.2f} s")


def test_oracle_equivalence(criterion):
    t = time.perf_counter()
    ok = True
    for M in (1, 2):
        s = solve_qfe("staircase", M, 10)
        for n in range(2, 11):
            brute = Counter(diagonal_moments(p, M).values[1:] for p in enumerate_staircase(n))
            ok &= Counter({e: c for e, c in s.coeffs[n].items() if c}) == brute
    for m in WALKS:
        s = solve_qfe(m, 2, 16)
        for n in range(17):
            brute = Counter(mom[1:] for _, mom in enumerate_walks(m, n, 2))
            ok &= Counter({e: c for e, c in s.coeffs[n].items() if c}) == brute
    dt = time.perf_counter() - t
    criterion("series tables equal brute-force histograms (staircase M<=2 n0<=10, walks length<=16)",
              ok and dt < 60, f"{dt:.1f} s")


def test_functional_equation_residuals(criterion):
    t = time.perf_counter()
    ok = True
    for model in EquationModel:
        y = Fraction(1, 2) if model is EquationModel.STAIRCASE_COLUMN else None
        ok &= verify_feq(model, solve_qfe(model, 2, 12, y)).is_zero()
    ok &= verify_H_equals_G(10)
    dt = time.perf_counter() - t
    criterion("functional-equation residuals vanish at N=12 (six models) and H=G at N=10", ok and dt < 30,
              f"{dt:.1f} s")


def test_scaling_series(criterion):
    t = time.perf_counter()
    F = scaling_series_F0("staircase", 1, 3)
    dt = time.perf_counter() - t
    ok = [F[(k,)] for k in range(4)] == [-1, Fraction(-1, 64), Fraction(5, 8192), Fraction(-15, 262144)]
    criterion("F0 = -1 - eps/64 + 5 eps^2/8192 - 15 eps^3/262144", ok and dt < 1, f"{dt:.3f} s")


def test_pde_residuals(criterion):
    t = time.perf_counter()
    ok = verify_pde_residual("staircase", 1, 8) == {} and verify_pde_residual("staircase", 2, 6) == {}
    for m in ("dyck", "bilateral-dyck", "meander", "bernoulli"):
        ok &= verify_pde_residual(m, 2, 6) == {}
    dt = time.perf_counter() - t
    criterion("Riccati (M=1), PDE (M=2) and walk scaling relations hold to tested order", ok and dt < 10,
              f"{dt:.2f} s")


def test_limit_ratios(criterion):
    r1, r2 = limit_moment_ratio((2,)), limit_moment_ratio((0, 2))
    ok = r1 == ExactScalar(Fraction(10, 3), -2) and r2 == ExactScalar(Fraction(19, 15))
    ok &= isinstance(r1, ExactScalar) and isinstance(r2.q, Fraction)
    criterion("limit ratios exactly 10/(3π) and 19/15", ok, f"{r1}, {r2}")


def test_cross_formula_consistency(criterion):
    ok = True
    for k in range(1, 5):
        ok &= alpha(k, M=4).squared == Fraction(1, 2 ** (9 * k))
        e = tuple(int(i == k - 1) for i in range(4))
        ok &= amplitude_f("staircase", e) == ExactScalar(Fraction(math.factorial(k), 2 ** (3 * (k + 1))))
    for n in range(2, 13):
        ok &= finite_moments("staircase", (1,), n).ordinary == Fraction(4 ** (n - 2), catalan(n - 1))
    criterion("alpha_k^2 = 2^(-9k), f_e_k = k! 2^(-3(k+1)) for k<=4, mean area 4^(n-2)/C(n-1) for n<=12", ok)


def test_walk_amplitudes(criterion):
    f0 = [walk_amplitudes(m, 2, (4, 4)).f((0, 0)) for m in WALKS]
    ok = f0 == [ExactScalar(-4), ExactScalar(Fraction(1, 2)), ExactScalar(1), ExactScalar(Fraction(1, 2))]
    b, m, r = (walk_amplitudes(x, 2, (4, 4)) for x in ("bilateral-dyck", "meander", "bernoulli"))
    for k in product(range(5), repeat=2):
        if sum(k) > 4:
            continue
        conv = sum((b.f(l).q * m.f((k[0] - l[0], k[1] - l[1])).q
                    for l in product(range(k[0] + 1), range(k[1] + 1))), Fraction(0))
        ok &= r.f(k).q == conv
    criterion("walk boundary amplitudes (-4, 1/2, 1, 1/2) and Bernoulli = bilateral * meander for |k|<=4", ok)


def test_finite_size_trend(criterion):
    t = time.perf_counter()
    target = 10 / (3 * math.pi)
    dev = {}
    for n in (16, 64):
        m1 = finite_moments("staircase", (1,), n).ordinary
        m2 = finite_moments("staircase", (2,), n).ordinary
        dev[n] = abs(float(m2 / m1**2) - target)
    dt = time.perf_counter() - t
    criterion("|E[X^2]/E[X]^2 - 10/(3π)| smaller at n=64 than at n=16", dev[64] < dev[16] and dt < 60,
              f"{dev[16]:.5f} -> {dev[64]:.5f}, {dt:.1f} s")


@pytest.fixture(scope="module")
def mc_results():
    t = time.perf_counter()
    configs = [McConfig(per // 2, 100_000, 10, seed=2024, kmax=2, moment_family="diagonal")
               for per in (64, 128, 256, 512)]
    return mc_run_many(configs), time.perf_counter() - t


@pytest.mark.parametrize("variant,k,target,tol", [("a", 1, 1.061, 0.01), ("a", 2, 1.216, 0.03),
                                                  ("b", 2, 1.309, 0.03)])
def test_mc_reproduction(criterion, mc_results, variant, k, target, tol):
    results, dt = mc_results
    pts = [RatioSeriesPoint.from_estimate(r.config.n0, r.ratio("diagonal", variant, k)) for r in results]
    fit = extrapolate(pts)
    ok = abs(fit.intercept - target) <= tol and dt <= 1800
    criterion(f"MC extrapolated ratio k={k} variant {variant} in {target} ± {tol}", ok,
              f"{fit.intercept:.4f} ± {fit.intercept_stderr:.4f}, chains {dt:.0f} s")


def test_mc_uniformity(criterion):
    t = time.perf_counter()
    res = [chi_square_uniformity(n0, 1_000_000, seed=17) for n0 in (4, 6)]
    dt = time.perf_counter() - t
    ok = all(0.001 < r.p_value < 0.999 and r.visited == r.n_classes for r in res) and dt < 300
    criterion("chi-square uniformity at perimeters 8 and 12 with 10^6 measurements", ok,
              ", ".join(f"p={r.p_value:.3f}" for r in res) + f", {dt:.0f} s")


def test_determinism(criterion, tmp_path):
    commands = [
        ["enumerate", "--model", "sap", "--perimeter", "12"],
        ["series", "--model", "meander", "--M", "2", "--N", "12"],
        ["series", "--N", "12", "--k", "2", "--moments"],
        ["limits", "--M", "2", "--kmax", "3,3"],
        ["mc", "--n0", "16,24", "--samples", "2000", "--seed", "5"],
        ["uniformity", "--perimeter", "8", "--samples", "20000", "--seed", "5"],
    ]
    ok = True
    for i, cmd in enumerate(commands):
        digests = []
        for rep in range(2):
            out = tmp_path / f"c{i}_{rep}.txt"
            ok &= main(cmd + ["--out", str(out)]) == 0
            digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
        ok &= digests[0] == digests[1]
    mc_out = tmp_path / "c4_0.txt"
    digests = []
    for rep in range(2):
        out = tmp_path / f"x{rep}.csv"
        ok &= main(["extrapolate", str(mc_out), "--out", str(out)]) == 0
        digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
    ok &= digests[0] == digests[1]
    criterion("repeated commands give identical output digests", ok)
