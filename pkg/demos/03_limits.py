"""Dominant-balance amplitudes and exact limit moments."""
import math

from polylim.asymptotics import (
    alpha, limit_moment, limit_moment_ratio, polygon_amplitudes, scaling_series_F0, verify_pde_residual,
    walk_amplitudes,
)

# Exponents and amplitudes of the staircase model for one layer variable
t = polygon_amplitudes("staircase", 1, (5,))
for k in range(6):
    print(k, t.gamma((k,)), t.c((k,)), t.f((k,)))

# Scaling function coefficients, and the differential relation it satisfies
print(scaling_series_F0("staircase", 1, 3))
print("residual", verify_pde_residual("staircase", 2, 6))

# Limits of normalised moments: area and sum of squared layers
r1 = limit_moment_ratio((2,))
r2 = limit_moment_ratio((0, 2))
print(r1, float(r1), 10 / (3 * math.pi))
print(r2, float(r2))
print(limit_moment("staircase", (1,)), limit_moment("staircase", (0, 1)))

# Scale factors to the Brownian excursion integrals
for k in range(1, 5):
    a = alpha(k, M=4)
    print(k, a.squared, a.value)

# Walk models: leading amplitudes at k = 0
for m in ("dyck", "bilateral-dyck", "meander", "bernoulli"):
    print(m, walk_amplitudes(m, 1, (3,)).f((0,)))
