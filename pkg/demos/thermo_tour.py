"""Match exponents and typical match lengths for a few small models.

Run: python demos/thermo_tour.py
"""
import math

from shiftmatch import alpha, alpha_tilde, entropy, iid_weights, ising, k_star, pressure, zero_interaction
from shiftmatch.thermo import diagnostics, pattern_power_sum

models = {
    "fair coin": zero_interaction(2),
    "biased coin (0.8/0.2)": iid_weights([0.8, 0.2]),
    "ising J=0.5": ising(0.5, 0.0),
    "ising J=0.5 h=0.3": ising(0.5, 0.3),
}

print(f"{'model':24s} {'pressure':>9s} {'entropy':>9s} {'alpha':>9s} {'k*(1e6)':>9s}")
for name, U in models.items():
    print(f"{name:24s} {pressure(U):9.5f} {entropy(U):9.5f} {alpha(U):9.5f} {k_star(U, 10**6):9.3f}")

# alpha is the decay rate of the collision sum  sum_A P(A)^2 ~ exp(-2 k alpha)
U = models["ising J=0.5"]
a = alpha(U)
print("\ncollision sum times exp(2 k alpha), ising J=0.5:")
for k in (2, 4, 8, 12):
    print(f"  k={k:2d}  {pattern_power_sum(U, k, 2) * math.exp(2 * k * a):.6f}")

d = diagnostics(U, 10)
print(f"\nrho_hat={d.rho_hat:.4f}  gamma_hat={d.gamma_hat:.4f}")

# two different laws: matches between a fair and a biased sequence
Z, Q = models["fair coin"], models["biased coin (0.8/0.2)"]
print(f"\nalpha_tilde(fair, biased) = {alpha_tilde(Z, Q):.5f}  (ln2/2 = {math.log(2) / 2:.5f})")
