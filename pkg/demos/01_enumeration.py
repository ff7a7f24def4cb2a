"""Brute-force enumeration: staircase polygons, Dyck paths and self-avoiding polygons.

Run with ``python3 demos/01_enumeration.py``.
"""
from collections import Counter

from polylim.polygons import (
    LatticePolygon, StaircasePolygon, catalan, diagonal_moments, enumerate_sap, enumerate_staircase,
    layer_moments, staircase_to_dyck,
)
from polylim.walks import enumerate_walks

# Staircase polygons of half-perimeter n are counted by C(n-1).
for n in range(2, 9):
    print(n, sum(1 for _ in enumerate_staircase(n)), catalan(n - 1))

# Each staircase polygon maps to a Dyck path; diagonal layer sizes are its heights.
p = StaircasePolygon("UURURR", "RRURUU")
print(p.area, staircase_to_dyck(p), diagonal_moments(p, 2).values)

# Histogram of (area, sum of squared layer sizes) at half-perimeter 6
hist = Counter(diagonal_moments(q, 2).values[1:] for q in enumerate_staircase(6))
for key in sorted(hist):
    print(key, hist[key])

# Self-avoiding polygons: 1, 2, 7, 28, 124 at perimeter 4..12
print([sum(1 for _ in enumerate_sap(per)) for per in range(4, 14, 2)])

# A polygon whose diagonal layers split into two segments; variant a and b differ
q = LatticePolygon("RRRULLUULDDD")
a, b = layer_moments(q, 3, "diagonal")
print(q.area, a.values, b.values)

# Walks of length 6 and their height moments
for model in ("dyck", "meander"):
    print(model, sum(1 for _ in enumerate_walks(model, 6, 2)))
