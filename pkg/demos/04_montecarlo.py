"""Monte Carlo layer moments of self-avoiding polygons and their extrapolation.

A short run; the acceptance suite uses 10^5 samples per perimeter.
"""
from polylim.montecarlo import McConfig, RatioSeriesPoint, chi_square_uniformity, extrapolate, mc_run_many

# The sampler visits every polygon of perimeter 8 equally often
r = chi_square_uniformity(4, 100_000, seed=1)
print(r.visited, r.n_classes, r.p_value)

results = mc_run_many([McConfig(n0, 5000, seed=7, moment_family="diagonal") for n0 in (16, 32, 64)])
for res in results:
    print(res.config.n0, res.accepted / res.proposed, res.ratio("diagonal", "a", 1))

for variant, k in (("a", 1), ("a", 2), ("b", 2)):
    pts = [RatioSeriesPoint.from_estimate(res.config.n0, res.ratio("diagonal", variant, k)) for res in results]
    fit = extrapolate(pts)
    print(variant, k, round(fit.intercept, 4), round(fit.intercept_stderr, 4))
