"""Stationary Gibbs sequences from the block Markov chain of a transfer system."""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .potential import Alphabet, Interaction
from .thermo import TransferSystem, build_transfer

# Above this many block states the chunked composition sampler costs more
# than a plain loop.
_COMPOSE_MAX_STATES = 64


@dataclass(frozen=True, eq=False)
class Sequence:
    """A finite word, stored as integer codes into ``alphabet``."""

    codes: np.ndarray
    alphabet: Alphabet
    model_id: str = ""
    seed: int | None = None

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 1 or len(codes) < 1:
            raise ValueError("a sequence needs at least one symbol")
        if codes.min() < 0 or codes.max() >= self.alphabet.size:
            raise ValueError("sequence codes outside the alphabet")
        codes = codes.astype(np.uint8 if self.alphabet.size <= 256 else np.int64)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_symbols(cls, symbols, alphabet=None, model_id: str = "", seed=None) -> "Sequence":
        symbols = list(symbols)
        if alphabet is None:
            alphabet = Alphabet(sorted(set(symbols), key=repr))
        return cls(alphabet.encode(symbols), alphabet, model_id, seed)

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def n(self) -> int:
        return len(self.codes)

    @property
    def symbols(self) -> list:
        return self.alphabet.decode(self.codes)

    def __str__(self) -> str:
        if self.alphabet.single_char:
            return "".join(self.symbols)
        return " ".join(str(s) for s in self.symbols)


@dataclass(frozen=True, eq=False)
class StationaryChain:
    """Block chain ``P(x, y) = T(x, y) r(y) / (lambda r(x))`` started from ``pi = l r``."""

    transfer: TransferSystem
    transition: np.ndarray = field(repr=False)  # (S, m): probability of appending symbol a
    stationary: np.ndarray = field(repr=False)

    @property
    def alphabet(self) -> Alphabet:
        return self.transfer.interaction.alphabet

    @property
    def block(self) -> int:
        return self.transfer.block

    @property
    def model_id(self) -> str:
        return self.transfer.interaction.name

    @property
    def matrix(self) -> np.ndarray:
        """Dense block-to-block transition matrix."""
        S, m = self.transition.shape
        P = np.zeros((S, S))
        P[np.repeat(np.arange(S), m), self.transfer.next_state.ravel()] = self.transition.ravel()
        return P


@dataclass(frozen=True)
class DiracChain:
    """Degenerate law putting all mass on the constant word ``a a a ...``."""

    alphabet: Alphabet
    symbol: object
    block: int = 1

    def __post_init__(self):
        self.alphabet.index(self.symbol)

    @property
    def model_id(self) -> str:
        return f"dirac({self.symbol})"


def build_chain(ts) -> StationaryChain:
    if isinstance(ts, Interaction):
        ts = build_transfer(ts)
    P = ts.transition
    P = P / P.sum(axis=1, keepdims=True)
    pi = ts.stationary
    pi = pi / pi.sum()
    P.setflags(write=False)
    pi.setflags(write=False)
    return StationaryChain(ts, P, pi)


def _draw(cdf: np.ndarray, u) -> np.ndarray:
    """Inverse-CDF draw; ``cdf`` excludes its final entry."""
    return (np.asarray(u)[..., None] >= cdf).sum(axis=-1)


def _walk_loop(cdf, next_state, x0: int, u: np.ndarray) -> np.ndarray:
    out = np.empty(len(u), dtype=np.int64)
    x = x0
    for t, ut in enumerate(u.tolist()):
        a = int(np.searchsorted(cdf[x], ut, side="right"))
        out[t] = a
        x = next_state[x, a]
    return out


def _walk_composed(cdf, next_state, x0: int, u: np.ndarray) -> np.ndarray:
    """Appended symbols of the walk, computed chunk-wise for every start state.

    Each chunk of ``c`` steps is run from all ``S`` possible start states at
    once; afterwards the true start state of each chunk follows from the end
    map of the previous one.
    """
    L = len(u)
    S = cdf.shape[0]
    c = max(1, int(math.isqrt(L)))
    C = -(-L // c)
    U = np.zeros(C * c)
    U[:L] = u
    U = U.reshape(C, c)
    cur = np.broadcast_to(np.arange(S), (C, S)).copy()
    syms = np.empty((C, c, S), dtype=np.int8)
    for t in range(c):
        a = _draw(cdf[cur], U[:, t, None])
        syms[:, t, :] = a
        cur = next_state[cur, a]
    starts = np.empty(C, dtype=np.int64)
    x = x0
    for q in range(C):
        starts[q] = x
        x = cur[q, x]
    out = syms[np.arange(C), :, starts].reshape(-1)
    return out[:L].astype(np.int64)


def walk(chain: StationaryChain, u: np.ndarray):
    """Block chain driven by uniforms ``u``: ``u[0]`` picks the initial block."""
    ts = chain.transfer
    m, B = ts.m, ts.block
    pi_cdf = np.cumsum(chain.stationary)[:-1]
    x0 = int(_draw(pi_cdf, u[0]))
    head = [(x0 // m ** (B - 1 - t)) % m for t in range(B)]
    cdf = np.cumsum(chain.transition, axis=1)[:, :-1]
    rest = u[1:]
    if len(rest) == 0:
        tail = np.zeros(0, dtype=np.int64)
    elif ts.n_states <= _COMPOSE_MAX_STATES and m <= 127:
        tail = _walk_composed(cdf, ts.next_state, x0, rest)
    else:
        tail = _walk_loop(cdf, ts.next_state, x0, rest)
    return np.concatenate([np.array(head, dtype=np.int64), tail])


def _sample_stream(chain, n: int, seed: int, stream: int) -> Sequence:
    if isinstance(chain, DiracChain):
        return dirac_sequence(chain.symbol, n, chain.alphabet, seed=seed)
    if isinstance(chain, (Interaction, TransferSystem)):
        chain = build_chain(chain)
    B = chain.block
    if n < B:
        raise ValueError(f"n = {n} is shorter than the block length {B}")
    u = rng.uniforms(rng.stream_key(seed, stream), 0, n - B + 1)
    return Sequence(walk(chain, u), chain.alphabet, chain.model_id, seed)


def sample(chain, n: int, seed: int) -> Sequence:
    """Stationary sample of length ``n``; a pure function of (chain, n, seed)."""
    return _sample_stream(chain, n, seed, rng.STREAM_SINGLE)


def sample_pair(chain1, chain2, n: int, seed: int) -> tuple[Sequence, Sequence]:
    """Two independent samples drawn from disjoint random streams of ``seed``."""
    return (_sample_stream(chain1, n, seed, rng.STREAM_FIRST),
            _sample_stream(chain2, n, seed, rng.STREAM_SECOND))


def dirac_sequence(a, n: int, alphabet: Alphabet | None = None, seed=None) -> Sequence:
    if n < 1:
        raise ValueError("n must be >= 1")
    if alphabet is None:
        alphabet = Alphabet([a])
    code = alphabet.index(a)
    return Sequence(np.full(n, code), alphabet, f"dirac({a})", seed)


def write_sequence(seq: Sequence, path) -> None:
    """Write ``# model=<id> n=<n> seed=<s>`` then the symbols, atomically."""
    path = Path(path)
    text = f"# model={seq.model_id or 'unknown'} n={seq.n} seed={seq.seed}\n{seq}\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_tokens(path) -> tuple[list[str], dict]:
    """Tokens and header fields of a sequence file."""
    meta: dict = {}
    body = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                for item in line[1:].split():
                    if "=" in item:
                        key, val = item.split("=", 1)
                        meta[key] = val
            else:
                body.append(line)
    text = "".join(body).strip()
    if not text:
        raise ValueError(f"{path}: empty sequence")
    tokens = text.split() if any(ch.isspace() for ch in text) else list(text)
    return tokens, meta


def read_sequence(path, alphabet: Alphabet | None = None) -> Sequence:
    tokens, meta = read_tokens(path)
    seed = meta.get("seed")
    seed = int(seed) if seed not in (None, "None") else None
    return Sequence.from_symbols(tokens, alphabet, meta.get("model", ""), seed)
