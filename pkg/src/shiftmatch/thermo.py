"""Exact thermodynamics of finite-range interactions via block transfer matrices.

States are blocks of ``B = max(R, 1)`` symbols, coded base ``m`` with the
first symbol most significant.  Appending a symbol ``a`` to block ``x``
moves to block ``(x * m + a) % m**B`` and costs the energy of every term
whose translate ends at the appended site, so each term of a long word is
charged exactly once.  Only the ``m`` compatible successors of each block
are stored, as ``(m**B, m)`` arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .potential import Interaction, add, energies, scale

MAX_STATES = 4096
DEFAULT_CAP = 2**24
PERRON_TOL = 1e-12
PERRON_MAX_ITER = 100_000
ENTROPY_STEP = 1e-5


class PerronError(RuntimeError):
    pass


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TransferSystem:
    """Transfer data of an interaction.

    ``weights[x, a] = exp(-(E(x.a) - shift))``; the true matrix entry is
    ``weights * exp(-shift)``.  ``lam`` is the Perron root of the shifted
    matrix, ``right``/``left`` its Perron vectors with ``sum(left * right) == 1``.
    """

    interaction: Interaction
    block: int
    weights: np.ndarray
    shift: float
    lam: float
    right: np.ndarray
    left: np.ndarray
    residual: float
    iterations: int
    next_state: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.interaction.m

    @property
    def n_states(self) -> int:
        return self.weights.shape[0]

    @property
    def pressure(self) -> float:
        return math.log(self.lam) - self.shift

    @property
    def spectral_radius(self) -> float:
        return self.lam * math.exp(-self.shift)

    @property
    def matrix(self) -> np.ndarray:
        """Dense ``exp(-E)`` matrix (only sensible for small state spaces)."""
        S = self.n_states
        T = np.zeros((S, S))
        rows = np.repeat(np.arange(S), self.m)
        T[rows, self.next_state.ravel()] = self.weights.ravel() * math.exp(-self.shift)
        return T

    @property
    def transition(self) -> np.ndarray:
        """Stationary-chain probabilities of appending each symbol, shape ``(S, m)``."""
        r = self.right
        return self.weights * r[self.next_state] / (self.lam * r[:, None])

    @property
    def stationary(self) -> np.ndarray:
        return self.left * self.right

    def apply(self, v: np.ndarray) -> np.ndarray:
        return (self.weights * v[self.next_state]).sum(axis=1)

    def apply_transpose(self, u: np.ndarray) -> np.ndarray:
        return _apply_transpose(self.weights, self.next_state, u)


def _apply_transpose(weights, next_state, u):
    return np.bincount(
        next_state.ravel(), weights=(weights * u[:, None]).ravel(), minlength=weights.shape[0]
    )


def block_digits(m: int, B: int) -> np.ndarray:
    """All blocks of length ``B`` as rows of symbol codes, in state order."""
    S = m**B
    idx = np.arange(S)
    return np.stack([(idx // m ** (B - 1 - t)) % m for t in range(B)], axis=1)


def all_patterns(m: int, k: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    if m**k > cap:
        raise CapExceeded(f"{m}**{k} patterns exceed the brute-force cap {cap}")
    return block_digits(m, k)


def _power_iteration(apply, size: int, tol: float, max_iter: int):
    v = np.full(size, 1.0 / math.sqrt(size))
    res = math.inf
    for it in range(1, max_iter + 1):
        w = apply(v)
        lam = float(v @ w)
        res = float(np.linalg.norm(w - lam * v)) / lam
        if res <= tol:
            return lam, w / np.linalg.norm(w), res, it
        v = w / np.linalg.norm(w)
    raise PerronError(f"power iteration did not converge: residual {res:.3e} after {max_iter} iterations")


_CACHE: dict = {}


def build_transfer(U: Interaction, block: int | None = None, tol: float = PERRON_TOL,
                   max_iter: int = PERRON_MAX_ITER) -> TransferSystem:
    """Transfer system of ``U`` with Perron data (cached per interaction)."""
    if isinstance(U, TransferSystem):
        if block is None or block == U.block:
            return U
        U = U.interaction
    if not isinstance(U, Interaction):
        raise TypeError(f"thermodynamics needs an Interaction, got {type(U).__name__}")
    B = U.block if block is None else int(block)
    if B < U.block:
        raise ValueError(f"block length {B} shorter than the interaction range {U.range}")
    key = (U.digest(), U.name, B, tol)
    if key in _CACHE:
        return _CACHE[key]
    m = U.m
    S = m**B
    if S > MAX_STATES:
        raise ValueError(f"{m}**{B} = {S} transfer states exceed the limit {MAX_STATES}")
    words = np.empty((S * m, B + 1), dtype=np.int64)
    words[:, :B] = np.repeat(block_digits(m, B), m, axis=0)
    words[:, B] = np.tile(np.arange(m), S)
    E = np.zeros(S * m)
    for S_off, table in U.terms.items():
        anchor = B - S_off[-1]
        E += table[tuple(words[:, anchor + o] for o in S_off)]
    E = E.reshape(S, m)
    shift = float(E.min())
    weights = np.exp(-(E - shift))
    next_state = (np.arange(S)[:, None] * m + np.arange(m)[None, :]) % S

    lam, right, res_r, it_r = _power_iteration(
        lambda v: (weights * v[next_state]).sum(axis=1), S, tol, max_iter)
    lam_l, left, res_l, it_l = _power_iteration(
        lambda u: _apply_transpose(weights, next_state, u), S, tol, max_iter)
    if abs(lam_l - lam) > 1e-9 * lam:
        raise PerronError(f"left/right Perron roots disagree: {lam!r} vs {lam_l!r}")
    if np.any(right <= 0) or np.any(left <= 0):
        raise PerronError("Perron vectors are not strictly positive; the measure is not unique")
    left = left / float(left @ right)
    for arr in (weights, right, left, next_state):
        arr.setflags(write=False)
    ts = TransferSystem(U, B, weights, shift, lam, right, left, max(res_r, res_l),
                        max(it_r, it_l), next_state)
    if len(_CACHE) > 512:
        _CACHE.clear()
    _CACHE[key] = ts
    return ts


def pressure(U) -> float:
    """Log of the transfer-matrix spectral radius."""
    return build_transfer(U).pressure


def alpha(U) -> float:
    """Match exponent ``p(U) - p(2U) / 2``; the decay rate of ``sum_A P(A)**2``."""
    U = _interaction(U)
    return pressure(U) - pressure(scale(U, 2.0)) / 2.0


def alpha_tilde(U, V) -> float:
    """Two-measure exponent ``(p(U) + p(V) - p(U + V)) / 2``."""
    U, V = _interaction(U), _interaction(V)
    return 0.5 * pressure(U) + 0.5 * pressure(V) - 0.5 * pressure(add(U, V))


def entropy(U, step: float = ENTROPY_STEP) -> float:
    """Entropy ``p - q dp/dq`` at ``q = 1``, by central difference in ``q``."""
    U = _interaction(U)
    dp = (pressure(scale(U, 1.0 + step)) - pressure(scale(U, 1.0 - step))) / (2.0 * step)
    return pressure(U) - dp


def k_star(U, n: int) -> float:
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.log(n) / alpha(U)


def k_star_tilde(U, V, n: int) -> float:
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.log(n) / alpha_tilde(U, V)


def _interaction(U) -> Interaction:
    return U.interaction if isinstance(U, TransferSystem) else U


def cylinder_probs(U, k: int, cap: int = DEFAULT_CAP, block: int | None = None) -> np.ndarray:
    """Stationary probabilities of every ``k``-pattern, indexed base ``m`` (MSB first)."""
    ts = build_transfer(U, block)
    m, B, S = ts.m, ts.block, ts.n_states
    if k < 1:
        raise ValueError("pattern length must be >= 1")
    if m**k > cap:
        raise CapExceeded(f"{m}**{k} patterns exceed the brute-force cap {cap}")
    pi = ts.stationary
    if k <= B:
        return pi.reshape(m**k, m ** (B - k)).sum(axis=1)
    P = ts.transition
    probs = pi
    for _ in range(k - B):
        tail = np.arange(len(probs)) % S
        probs = (probs[:, None] * P[tail]).ravel()
    return probs


def cylinder_prob(U, pattern) -> float:
    """Stationary probability that a window equals ``pattern``."""
    ts = build_transfer(U)
    codes = ts.interaction.alphabet.encode(pattern)
    k = len(codes)
    if k < 1:
        raise ValueError("pattern length must be >= 1")
    m, B, S = ts.m, ts.block, ts.n_states
    pi = ts.stationary
    if k < B:
        prefix = 0
        for c in codes:
            prefix = prefix * m + int(c)
        width = m ** (B - k)
        return float(pi[prefix * width : (prefix + 1) * width].sum())
    x = 0
    for c in codes[:B]:
        x = x * m + int(c)
    prob = float(pi[x])
    P = ts.transition
    for c in codes[B:]:
        prob *= float(P[x, c])
        x = (x * m + int(c)) % S
    return prob


def pattern_power_sum(U, k: int, s: float, cap: int = DEFAULT_CAP) -> float:
    """``sum_A P(A)**s`` over all ``k``-patterns, by exhaustive enumeration."""
    probs = cylinder_probs(U, k, cap=cap)
    return float(np.sum(probs**s))


def cross_power_sum(U, V, k: int, cap: int = DEFAULT_CAP) -> float:
    """``sum_A P_U(A) P_V(A)`` over all ``k``-patterns, by exhaustive enumeration."""
    U, V = _interaction(U), _interaction(V)
    if U.alphabet != V.alphabet:
        raise ValueError("alphabet mismatch")
    return float(np.dot(cylinder_probs(U, k, cap=cap), cylinder_probs(V, k, cap=cap)))


def log_pair_overlap_sum(U, V, k: int) -> float:
    """``log sum_A P_U(A) P_V(A)`` for any ``k`` through the product chain.

    Runs the Hadamard product of the two stationary chains on a common block
    length, so the cost is linear in ``k`` and no enumeration cap applies.
    """
    U, V = _interaction(U), _interaction(V)
    if U.alphabet != V.alphabet:
        raise ValueError("alphabet mismatch")
    B = max(U.block, V.block)
    tu, tv = build_transfer(U, B), build_transfer(V, B)
    m = tu.m
    if k < 1:
        raise ValueError("pattern length must be >= 1")
    if k <= B:
        pu = tu.stationary.reshape(m**k, -1).sum(axis=1)
        pv = tv.stationary.reshape(m**k, -1).sum(axis=1)
        return math.log(float(pu @ pv))
    v = tu.stationary * tv.stationary
    W = tu.transition * tv.transition
    log_scale = 0.0
    for _ in range(k - B):
        v = _apply_transpose(W, tu.next_state, v)
        total = v.sum()
        log_scale += math.log(total)
        v = v / total
    return log_scale + math.log(v.sum())


def pair_overlap_sum(U, V, k: int) -> float:
    return math.exp(log_pair_overlap_sum(U, V, k))


def run_decay(U, symbol) -> float:
    """Ratio ``P([a]_{k+1}) / P([a]_k)`` for ``k >= B``: the chance of extending a run."""
    ts = build_transfer(U)
    a = ts.interaction.alphabet.index(symbol)
    x = 0
    for _ in range(ts.block):
        x = x * ts.m + a
    return float(ts.transition[x, a])


@dataclass(frozen=True)
class ThermoDiagnostics:
    gamma_hat: float
    rho_hat: float
    delta_hat: float
    gamma_by_k: tuple = ()


def diagnostics(U, k_max: int, cap: int = DEFAULT_CAP) -> ThermoDiagnostics:
    """Empirical cylinder-bound constant and finite-energy constants.

    ``gamma_hat`` is the largest ratio (either way) between ``P(A)`` and
    ``exp(-k p - H(A))`` over all patterns of length ``<= k_max``;
    ``rho_hat`` the largest single-site conditional probability over all
    contexts.
    """
    from .potential import conditional_site_distribution

    ts = build_transfer(U)
    U = ts.interaction
    m = U.m
    if m**k_max > cap:
        raise CapExceeded(f"{m}**{k_max} patterns exceed the brute-force cap {cap}")
    p = ts.pressure
    gammas = []
    for k in range(1, k_max + 1):
        probs = cylinder_probs(ts, k, cap=cap)
        H = energies(U, all_patterns(m, k, cap))
        log_ratio = np.log(probs) + k * p + H
        gammas.append(float(np.exp(np.abs(log_ratio).max())))
    R = U.range
    if m ** (2 * R) > cap:
        raise CapExceeded(f"{m ** (2 * R)} contexts exceed the brute-force cap {cap}")
    rho = 0.0
    symbols = U.alphabet.symbols
    for ctx in all_patterns(m, 2 * R, cap) if R > 0 else [np.zeros(0, dtype=int)]:
        left = [symbols[c] for c in ctx[:R]]
        right = [symbols[c] for c in ctx[R:]]
        rho = max(rho, float(conditional_site_distribution(U, left, right).max()))
    return ThermoDiagnostics(max(gammas), rho, 1.0 - rho, tuple(gammas))


# Exhaustive oracles.  These never touch the transfer matrix.

def log_partition_free(U: Interaction, n: int, cap: int = DEFAULT_CAP) -> float:
    """``log Z_n`` with free boundary, summing ``exp(-H)`` over all ``m**n`` words."""
    H = energies(U, all_patterns(U.m, n, cap))
    top = (-H).max()
    return float(top + math.log(np.exp(-H - top).sum()))


def block_entropy_rate(U, n: int, cap: int = DEFAULT_CAP) -> float:
    """``-(1/n) sum_A P(A) log P(A)`` over all ``n``-patterns."""
    probs = cylinder_probs(U, n, cap=cap)
    return float(-(probs * np.log(probs)).sum() / n)
