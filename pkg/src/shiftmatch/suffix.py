"""Suffix array and adjacent LCP by prefix doubling, vectorised with numpy.

Short prefixes are packed into ``uint64`` keys (``b`` bits per symbol, with
0 reserved for "past the end"), giving rank levels for every power-of-two
length up to the packing width in one pass.  Longer levels are obtained by
doubling ranks until all suffixes are distinct.  Every level is kept, so the
LCP of all adjacent suffix pairs is found by one binary descent over levels.
"""
from __future__ import annotations

import numpy as np


def compact_codes(*arrays) -> list[np.ndarray]:
    """Jointly relabel arrays to codes ``1..m`` preserving order."""
    joined = np.concatenate([np.asarray(a).ravel() for a in arrays])
    _, inv = np.unique(joined, return_inverse=True)
    inv = inv.astype(np.int64) + 1
    out, pos = [], 0
    for a in arrays:
        out.append(inv[pos : pos + len(a)])
        pos += len(a)
    return out


def _ranks(keys: np.ndarray, order: np.ndarray, n: int) -> tuple[np.ndarray, int]:
    sorted_keys = keys[order]
    fresh = np.empty(n, dtype=np.int64)
    fresh[0] = 1
    fresh[1:] = sorted_keys[1:] != sorted_keys[:-1]
    rank_sorted = np.cumsum(fresh)
    rank = np.zeros(n + 1, dtype=np.int64)
    rank[order] = rank_sorted
    return rank, int(rank_sorted[-1])


class SuffixIndex:
    """Suffix array ``sa`` and ``lcp[t] = LCP(sa[t], sa[t + 1])`` of a code array.

    ``codes`` must be positive integers (0 is the end marker).
    """

    def __init__(self, codes: np.ndarray):
        codes = np.asarray(codes, dtype=np.int64)
        n = len(codes)
        if n == 0:
            raise ValueError("empty input")
        if codes.min() < 1:
            raise ValueError("codes must be >= 1")
        self.n = n
        bits = max(1, int(codes.max()).bit_length())
        levels: dict[int, np.ndarray] = {}

        key = np.zeros(n + 1, dtype=np.uint64)
        key[:n] = codes
        h = 1
        levels[1] = key
        while 2 * h * bits <= 64 and h < n:
            nxt = np.zeros(n + 1, dtype=np.uint64)
            nxt[:n] = key[:n] << np.uint64(bits * h)
            nxt[: n - h] |= key[h:n]
            h *= 2
            levels[h] = nxt
            key = nxt

        order = np.argsort(key[:n])
        rank, distinct = _ranks(key[:n], order, n)
        if distinct < n:
            levels[h] = rank
            while distinct < n:
                second = np.zeros(n, dtype=np.int64)
                if h < n:
                    second[: n - h] = rank[h:n]
                combined = rank[:n] * (n + 1) + second
                order = np.argsort(combined)
                rank, distinct = _ranks(combined, order, n)
                h *= 2
                levels[h] = rank
        self.sa = order
        self._levels = levels
        self.lcp = self._adjacent_lcp()

    def _adjacent_lcp(self) -> np.ndarray:
        n = self.n
        p = self.sa[:-1]
        q = self.sa[1:]
        acc = np.zeros(n - 1, dtype=np.int64)
        for h in sorted(self._levels, reverse=True):
            key = self._levels[h]
            ip = np.minimum(p + acc, n)
            iq = np.minimum(q + acc, n)
            kp = key[ip]
            same = (kp == key[iq]) & (kp != 0)
            acc += h * same
        return acc

    def max_lcp(self) -> int:
        return int(self.lcp.max()) if len(self.lcp) else 0

    def labels(self, k: int) -> np.ndarray:
        """Class label per text position: equal labels iff equal ``k``-prefixes.

        Positions whose suffix is shorter than ``k`` get labels of their own.
        """
        lab_sorted = np.zeros(self.n, dtype=np.int64)
        np.cumsum(self.lcp < k, out=lab_sorted[1:])
        lab = np.empty(self.n, dtype=np.int64)
        lab[self.sa] = lab_sorted
        return lab

    def count_pairs(self, k: int) -> int:
        """Unordered pairs of positions sharing a ``k``-prefix."""
        mask = np.zeros(len(self.lcp) + 2, dtype=np.int8)
        mask[1:-1] = self.lcp >= k
        d = np.diff(mask)
        runs = np.flatnonzero(d == -1) - np.flatnonzero(d == 1)
        return int((runs * (runs + 1) // 2).sum())
