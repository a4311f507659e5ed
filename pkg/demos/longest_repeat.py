"""The longest repeated window grows like ln(n)/alpha.

Samples a few sequences per length, finds the longest self-match with the
suffix array, and compares the fitted slope with 1/alpha.

Run: python demos/longest_repeat.py
"""
import math

import numpy as np

from shiftmatch import alpha, build_chain, iid_weights, ising, max_match, sample, zero_interaction
from shiftmatch.experiments import fit_slope

grid = [2**e for e in range(8, 19, 2)]
trials = 8

for name, U in [("fair coin", zero_interaction(2)), ("biased coin", iid_weights([0.8, 0.2])),
                ("ising J=0.5", ising(0.5, 0.0))]:
    chain = build_chain(U)
    means = []
    for n in grid:
        M = [max_match(sample(chain, n, seed)).length for seed in range(trials)]
        means.append(np.mean(M))
    fit = fit_slope(grid, means, target=1 / alpha(U))
    print(f"{name:12s} mean M: " + " ".join(f"{m:5.1f}" for m in means))
    print(f"{'':12s} slope {fit.slope:.3f}  vs 1/alpha {fit.target:.3f}  (rel err {fit.rel_error:.1%})")

# one concrete witness
s = sample(build_chain(zero_interaction(2)), 5000, 1)
r = max_match(s)
i, j = r.witness
print(f"\nn=5000 fair coin: longest repeat {r.length} at offsets {i} and {j}")
print("  ", "".join(map(str, s.symbols[i : i + r.length])))
print(f"  ln(n)/alpha = {math.log(5000) / alpha(zero_interaction(2)):.2f}")
