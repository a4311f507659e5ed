"""A growing expected match count that is almost never realised.

A fair-coin sequence is matched against the constant word "aaaa...".  With
k_n = ceil(1.5 log2 n) the expected count climbs like sqrt(n), but a match
needs a run of k_n a's, which a length-n sample rarely contains.

Run: python demos/dirac_counterexample.py
"""
from shiftmatch import zero_interaction
from shiftmatch.experiments import counterexample_dirac

res = counterexample_dirac(zero_interaction(2), "a", [10**3, 10**4, 10**5], trials=[300, 300, 30])
print(f"{'n':>7s} {'k':>3s} {'E N':>9s} {'P(N=0) >=':>10s} {'sampled P(N=0)':>15s}")
for r in res.extra["rows"]:
    print(f"{r.n:7d} {r.k:3d} {r.pred_mean:9.2f} {r.union_bound:10.4f} {r.zero_frac:15.3f}")
