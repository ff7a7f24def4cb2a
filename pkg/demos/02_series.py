"""Exact series from the functional equations, checked against enumeration."""
from fractions import Fraction

from polylim.series import finite_moments, solve_qfe, verify_feq, verify_H_equals_G

g = solve_qfe("staircase", 1, 12)
print("counts", g.counts())

# Joint distribution of (area, sum of squared layers) at half-perimeter 6
for exps, c in sorted(g.coefficient(6).items())[:5]:
    print(exps, c)
g2 = solve_qfe("staircase", 2, 8)
print(sorted(g2.coefficient(6).items())[:5])

# Every model satisfies its equation to the truncation order
for model in ("staircase", "dyck", "bilateral-dyck", "meander", "bernoulli"):
    print(model, verify_feq(model, solve_qfe(model, 2, 10)).is_zero())
print("column, y=1/2", verify_feq("column", solve_qfe("column", 1, 10, Fraction(1, 2))).is_zero())
print("diagonal and column layers agree:", verify_H_equals_G(10))

# Exact finite-size moments, far beyond reach of enumeration
for n in (16, 32, 64):
    m1 = finite_moments("staircase", (1,), n).ordinary
    m2 = finite_moments("staircase", (2,), n).ordinary
    print(n, float(m1), float(m2 / m1**2))
