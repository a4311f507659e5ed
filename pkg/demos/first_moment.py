"""Cross matches between two independent sequences: sampled mean vs the exact formula.

Run: python demos/first_moment.py
"""
from shiftmatch import iid_weights, ising, zero_interaction
from shiftmatch.experiments import ExperimentPlan, regime_scan

cases = [
    ("fair vs fair", ExperimentPlan(zero_interaction(2), "pair-same", [100], k_list=[5], trials=2000)),
    ("ising vs ising", ExperimentPlan(ising(0.5, 0.0), "pair-same", [200], k_list=[6, 8], trials=2000)),
    ("fair vs biased", ExperimentPlan(zero_interaction(2), "pair-different", [200], k_list=[6],
                                      trials=2000, model2=iid_weights([0.8, 0.2]))),
]

for name, plan in cases:
    for c in regime_scan(plan).cells:
        z = (c.mean - c.pred_mean) / c.stderr
        print(f"{name:15s} n={c.n} k={c.k}  mean {c.mean:9.3f} +- {c.stderr:.3f}"
              f"  exact {c.pred_mean:9.3f}  z={z:+.2f}")
