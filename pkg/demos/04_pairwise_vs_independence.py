#!/usr/bin/env python3
"""Higher-dimensional components do not guarantee higher efficiency.

A four-cell multinomial trial with cell probabilities
(theta, theta, theta/k, 1 - 2 theta - theta/k), observed through the
indicator triple (y1, y2, y3).  All three composite likelihoods --
full, independence (univariate margins) and pairwise (bivariate
margins) -- estimate the single parameter theta, and all the information
scalars are available in closed form.

The pairwise likelihood uses strictly richer components than the
independence likelihood, yet for k > 1 and strong dependence it is the
LESS efficient of the two.
"""

import numpy as np

import clik

print(__doc__)

K = 5.0
model = clik.Multinomial4(K)

print(f"per-observation asymptotic variances at k={K:g}:\n")
print(f"{'theta':>8} {'full':>10} {'independence':>14} {'pairwise':>10} {'pair/ind':>10}")
for theta in (0.05, 0.10, 0.20, 0.30, 0.35, 0.40, 0.45):
    info = clik.multinomial_info_scalars(theta, K)
    print(f"{theta:8.2f} {info.nvar_full:10.5f} {info.nvar_ind:14.5f} "
          f"{info.nvar_pair:10.5f} {info.nvar_pair / info.nvar_ind:10.4f}")

print("""
Below theta ~ 0.3 the three estimators are near-identical; beyond it the
full likelihood pulls ahead and the pairwise estimator falls behind the
independence one (ratio > 1).
""")

print("how the pairwise/independence ratio depends on k (theta at 85% of range):\n")
print(f"{'k':>8} {'ratio':>10}")
for k in (0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0):
    m = clik.Multinomial4(k)
    info = clik.multinomial_info_scalars(0.85 * m.theta_max, k)
    print(f"{k:8g} {info.nvar_pair / info.nvar_ind:10.4f}")

print("""
At k = 1 the model is symmetric in the three indicators and both composite
likelihoods are exactly fully efficient (ratio 1).  Away from k = 1 the
ratio moves off 1 in opposite directions, and approaches 1 again in both
extremes.
""")

# --- Monte Carlo information agrees with the closed forms --------------------

theta = model.params(0.2)
exact = clik.multinomial_info_scalars(0.2, K)
for name, spec, h_t, j_t in (
        ("independence", clik.independence(3), exact.h_ind, exact.j_ind),
        ("pairwise", clik.pairwise(3), exact.h_pair, exact.j_pair)):
    triple = clik.info_monte_carlo(spec, model, theta, 100_000, 5)
    print(f"{name:13s} H: mc {triple.sensitivity[0, 0]:8.4f} vs exact {h_t:8.4f}"
          f"   J: mc {triple.variability[0, 0]:8.4f} vs exact {j_t:8.4f}")
