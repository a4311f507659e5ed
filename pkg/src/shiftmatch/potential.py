"""Finite-range translation-invariant interactions on a finite alphabet.

An interaction is stored as a set of coupling tables, one per offset set
``S`` (a sorted tuple of non-negative offsets starting at 0).  The table for
``S`` is an array of shape ``(m,) * len(S)`` giving the energy of the term
anchored at site ``i`` and covering sites ``i + S``.  Translates are never
stored; they are generated when a Hamiltonian is evaluated.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np


class Alphabet:
    """Ordered collection of distinct, opaque symbols."""

    def __init__(self, symbols: Iterable[Hashable]):
        symbols = tuple(symbols)
        if len(symbols) == 0:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"alphabet symbols must be distinct: {symbols!r}")
        self.symbols = symbols
        self._index = {s: i for i, s in enumerate(symbols)}

    @classmethod
    def of_size(cls, m: int) -> "Alphabet":
        if m < 1:
            raise ValueError("alphabet size must be >= 1")
        if m <= 26:
            return cls("abcdefghijklmnopqrstuvwxyz"[:m])
        return cls(range(m))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.symbols)!r})"

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except (KeyError, TypeError):
            raise ValueError(f"symbol {symbol!r} not in alphabet {list(self.symbols)!r}") from None

    def encode(self, word) -> np.ndarray:
        """Map a word (string, list of tokens, or Window) to integer codes."""
        if isinstance(word, Window):
            word = word.pattern
        return np.array([self.index(s) for s in word], dtype=np.int64)

    def decode(self, codes) -> list:
        return [self.symbols[int(c)] for c in codes]

    @property
    def single_char(self) -> bool:
        return all(isinstance(s, str) and len(s) == 1 for s in self.symbols)


def _as_alphabet(alphabet) -> Alphabet:
    if isinstance(alphabet, Alphabet):
        return alphabet
    if isinstance(alphabet, int):
        return Alphabet.of_size(alphabet)
    return Alphabet(alphabet)


@dataclass(frozen=True)
class Window:
    """A pattern observed at some base index; energies ignore the base."""

    pattern: tuple
    base: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(self.pattern))
        if len(self.pattern) < 1:
            raise ValueError("window length must be >= 1")

    def __len__(self) -> int:
        return len(self.pattern)


@dataclass(frozen=True, eq=False)
class Interaction:
    """Finite-range interaction: coupling tables keyed by anchored offset sets.

    ``range`` is the declared bound R on the diameter of every offset set.
    Equality compares the alphabet and the non-zero coupling tables, so the
    declared range (which only fixes the block length of transfer matrices)
    does not enter.
    """

    alphabet: Alphabet
    range: int
    terms: Mapping[tuple, np.ndarray] = field(default_factory=dict)
    name: str = "model"

    def __post_init__(self):
        alphabet = _as_alphabet(self.alphabet)
        object.__setattr__(self, "alphabet", alphabet)
        m = alphabet.size
        R = int(self.range)
        if R < 0:
            raise ValueError("range must be >= 0")
        object.__setattr__(self, "range", R)
        clean = {}
        for offsets, table in self.terms.items():
            offsets = tuple(int(o) for o in offsets)
            _check_offsets(offsets, R)
            table = np.array(table, dtype=float)
            if table.shape != (m,) * len(offsets):
                raise ValueError(
                    f"table for offsets {offsets} has shape {table.shape}, "
                    f"expected {(m,) * len(offsets)}"
                )
            if not np.all(np.isfinite(table)):
                raise ValueError(f"non-finite coupling in table for offsets {offsets}")
            table.setflags(write=False)
            clean[offsets] = table
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @property
    def m(self) -> int:
        return self.alphabet.size

    @property
    def block(self) -> int:
        """Block length of the transfer construction, max(R, 1)."""
        return max(self.range, 1)

    def nonzero_terms(self) -> dict:
        return {S: t for S, t in self.terms.items() if np.any(t != 0.0)}

    def is_zero(self) -> bool:
        return not self.nonzero_terms()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interaction) or self.alphabet != other.alphabet:
            return False
        a, b = self.nonzero_terms(), other.nonzero_terms()
        return a.keys() == b.keys() and all(np.array_equal(a[S], b[S]) for S in a)

    def __hash__(self) -> int:
        return hash(self.digest())

    def isclose(self, other: "Interaction", rtol=1e-12, atol=1e-14) -> bool:
        if self.alphabet != other.alphabet:
            return False
        keys = set(self.terms) | set(other.terms)
        for S in keys:
            shape = (self.m,) * len(S)
            a = self.terms.get(S, np.zeros(shape))
            b = other.terms.get(S, np.zeros(shape))
            if not np.allclose(a, b, rtol=rtol, atol=atol):
                return False
        return True

    def digest(self) -> str:
        """Stable SHA-256 of the alphabet, range and non-zero couplings."""
        payload = {
            "alphabet": [repr(s) for s in self.alphabet.symbols],
            "range": self.range,
            "terms": [
                [list(S), [float.hex(float(v)) for v in t.ravel()]]
                for S, t in self.nonzero_terms().items()
            ],
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def __repr__(self) -> str:
        return (
            f"Interaction(name={self.name!r}, alphabet={list(self.alphabet.symbols)!r}, "
            f"range={self.range}, terms={sorted(self.nonzero_terms())})"
        )


def _check_offsets(offsets: tuple, R: int) -> None:
    if len(offsets) == 0:
        raise ValueError("offset set must be non-empty")
    if offsets[0] != 0:
        raise ValueError(f"offset set {list(offsets)} must contain 0 as its smallest element")
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise ValueError(f"offsets {list(offsets)} must be strictly increasing")
    if offsets[-1] > R:
        raise ValueError(f"offset set {list(offsets)} exceeds range {R}")


def zero_interaction(alphabet=2, name: str = "zero") -> Interaction:
    return Interaction(_as_alphabet(alphabet), 0, {}, name=name)


def ising(J: float, h: float = 0.0, name: str | None = None) -> Interaction:
    """Nearest-neighbour Ising chain on spins (+1, -1).

    Pair term ``J * s_i * s_{i+1}`` and site term ``h * s_i``; energies enter
    Boltzmann weights as ``exp(-H)``, so ``J < 0`` is ferromagnetic.
    """
    spins = np.array([1.0, -1.0])
    terms = {(0,): h * spins, (0, 1): J * np.outer(spins, spins)}
    return Interaction(Alphabet((1, -1)), 1, terms, name=name or f"ising(J={J:g},h={h:g})")


def iid_weights(p: Sequence[float], symbols=None, name: str | None = None) -> Interaction:
    """Range-0 interaction whose Gibbs measure is i.i.d. with marginals ``p``."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or len(p) < 1:
        raise ValueError("p must be a non-empty probability vector")
    if np.any(~np.isfinite(p)) or np.any(p <= 0):
        raise ValueError(f"probabilities must be strictly positive: {p.tolist()}")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
    alphabet = _as_alphabet(symbols) if symbols is not None else Alphabet.of_size(len(p))
    if alphabet.size != len(p):
        raise ValueError("symbols and p differ in length")
    label = ",".join(f"{x:g}" for x in p)
    return Interaction(alphabet, 0, {(0,): -np.log(p)}, name=name or f"iid({label})")


def scale(U: Interaction, q: float) -> Interaction:
    """The interaction ``qU``: every coupling multiplied by ``q``."""
    q = float(q)
    terms = {S: q * t for S, t in U.terms.items()}
    return Interaction(U.alphabet, U.range, terms, name=f"{q:g}*{U.name}")


def add(U: Interaction, V: Interaction) -> Interaction:
    """Term-wise sum ``U + V`` on a common alphabet."""
    if U.alphabet != V.alphabet:
        raise ValueError(
            f"alphabet mismatch: {list(U.alphabet.symbols)!r} vs {list(V.alphabet.symbols)!r}"
        )
    terms = {S: np.array(t) for S, t in U.terms.items()}
    for S, t in V.terms.items():
        terms[S] = terms[S] + t if S in terms else np.array(t)
    return Interaction(U.alphabet, max(U.range, V.range), terms, name=f"({U.name}+{V.name})")


def energies(U: Interaction, codes: np.ndarray) -> np.ndarray:
    """Free-boundary energies for a batch of coded patterns, shape ``(N, k)``."""
    codes = np.atleast_2d(np.asarray(codes, dtype=np.int64))
    N, k = codes.shape
    out = np.zeros(N)
    for S, table in U.terms.items():
        d = S[-1]
        if d >= k:
            continue
        span = k - d
        idx = tuple(codes[:, s : s + span] for s in S)
        out += table[idx].sum(axis=1)
    return out


def hamiltonian_free(U: Interaction, pattern) -> float:
    """Sum of all anchored terms whose translate lies inside the pattern."""
    codes = U.alphabet.encode(pattern)
    if len(codes) < 1:
        raise ValueError("pattern length must be >= 1")
    return float(energies(U, codes[None, :])[0])


def conditional_site_distribution(U: Interaction, left, right) -> np.ndarray:
    """Law of the middle symbol given ``R`` symbols on each side.

    Only terms touching the middle site contribute, which is exact for a
    range-``R`` interaction.
    """
    R = U.range
    left = U.alphabet.encode(left)
    right = U.alphabet.encode(right)
    if len(left) != R or len(right) != R:
        raise ValueError(
            f"context lengths must equal the range {R}, got {len(left)} and {len(right)}"
        )
    m = U.m
    words = np.empty((m, 2 * R + 1), dtype=np.int64)
    words[:, :R] = left
    words[:, R] = np.arange(m)
    words[:, R + 1 :] = right
    energy = np.zeros(m)
    for S, table in U.terms.items():
        for s in S:
            anchor = R - s
            energy += table[tuple(words[:, anchor + o] for o in S)]
    w = np.exp(-(energy - energy.min()))
    return w / w.sum()


def truncate(alphabet, couplings: Mapping[int, float], R: int, name: str = "truncated") -> Interaction:
    """Long-range Ising pair couplings ``J_d s_i s_{i+d}`` cut off at distance ``R``.

    ``couplings`` maps distance ``d >= 1`` (and optionally ``0`` for a field)
    to a coupling; distances beyond ``R`` are dropped.  The alphabet must be
    numeric spins.
    """
    alphabet = _as_alphabet(alphabet)
    spins = np.array([float(s) for s in alphabet.symbols])
    terms = {}
    for d, J in couplings.items():
        d = int(d)
        if d > R:
            continue
        if d == 0:
            terms[(0,)] = J * spins
        else:
            terms[(0, d)] = J * np.outer(spins, spins)
    return Interaction(alphabet, R, terms, name=name)

