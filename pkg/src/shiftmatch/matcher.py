"""Shift-match statistics of one sequence or of two equal-length sequences.

Windows are 0-indexed: the window of length ``k`` at ``i`` is
``s[i : i + k]`` for ``0 <= i <= n - k``.

* ``N(s, k)``: unordered pairs ``i < j`` of equal ``k``-windows.  This is half
  the ordered ``i != j`` count.
* ``M(s)``: largest ``k`` with ``N(s, k) > 0`` (0 if none).
* ``T(s, k)``: smallest prefix length containing a repeated ``k``-window.
* ``N(s, t, k)``: ordered pairs ``(i, j)``, ``j != i``, with
  ``s[i : i + k] == t[j : j + k]``.

The three single-sequence statistics satisfy
``N(s, k) == 0  <=>  M(s) < k  <=>  T(s, k) > n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .suffix import SuffixIndex, compact_codes

INFINITY = math.inf

_P1 = 2147483647  # 2**31 - 1
_P2 = 2147483629
_B1 = 1_000_003
_B2 = 972_663


@dataclass(frozen=True)
class MatchStats:
    n: int
    k: int
    count: int

    def __int__(self) -> int:
        return self.count


@dataclass(frozen=True)
class OverlapReport:
    length: int
    witness: tuple | None
    unconstrained_length: int | None = None
    unconstrained_witness: tuple | None = None


@dataclass(frozen=True)
class HittingReport:
    time: float  # int, or math.inf when no match occurs
    witness: tuple | None  # (i, j, k)

    @property
    def finite(self) -> bool:
        return self.time != INFINITY


def as_codes(s) -> np.ndarray:
    """Integer array view of a Sequence, string, or array-like of tokens."""
    codes = getattr(s, "codes", None)
    if codes is not None:
        return np.asarray(codes, dtype=np.int64)
    if isinstance(s, str):
        return np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    arr = np.asarray(s)
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64)
    _, inv = np.unique(arr, return_inverse=True)
    return inv.astype(np.int64)


def _pair_codes(s, t) -> tuple[np.ndarray, np.ndarray]:
    a_s, a_t = getattr(s, "alphabet", None), getattr(t, "alphabet", None)
    if a_s is not None and a_t is not None and a_s != a_t:
        s, t = np.asarray(s.symbols, dtype=object).astype(str), np.asarray(t.symbols, dtype=object).astype(str)
    elif isinstance(s, str) != isinstance(t, str) and (isinstance(s, str) or isinstance(t, str)):
        s, t = np.array(list(s), dtype=str), np.array(list(t), dtype=str)
    cs, ct = as_codes(s), as_codes(t)
    if cs.dtype != ct.dtype:
        cs, ct = cs.astype(np.int64), ct.astype(np.int64)
    return cs, ct


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range 1..{n}")


def _equal_windows_along_shift(eq: np.ndarray, k: int) -> int:
    """Number of length-``k`` all-true runs starting in ``eq``."""
    if len(eq) < k:
        return 0
    cs = np.zeros(len(eq) + 1, dtype=np.int64)
    np.cumsum(eq, out=cs[1:])
    return int(np.count_nonzero(cs[k:] - cs[:-k] == k))


# ---------------------------------------------------------------- oracles

def count_matches_naive(s, k: int) -> MatchStats:
    """Direct comparison of every window pair, one shift ``d = j - i`` at a time."""
    a = as_codes(s)
    n = len(a)
    _check_k(n, k)
    total = 0
    for d in range(1, n - k + 1):
        total += _equal_windows_along_shift(a[: n - d] == a[d:], k)
    return MatchStats(n, k, total)


def match_profile_naive(s) -> np.ndarray:
    """``N(s, k)`` for every ``k = 0..n`` from all pairwise common-prefix lengths.

    For each shift ``d`` the common prefix of the suffixes at ``i`` and
    ``i + d`` is the length of the run of equal symbols starting at ``i``;
    ``N(s, k)`` counts pairs whose common prefix is at least ``k``.
    """
    a = as_codes(s)
    n = len(a)
    hist = np.zeros(n + 2, dtype=np.int64)
    for d in range(1, n):
        eq = a[: n - d] == a[d:]
        idx = np.arange(n - d)
        breaks = np.flatnonzero(~eq)
        nxt = np.searchsorted(breaks, idx)
        stop = np.append(breaks, n - d)[nxt]
        hist += np.bincount(stop - idx, minlength=n + 2)[: n + 2]
    profile = np.cumsum(hist[::-1])[::-1]
    profile[0] = n * (n - 1) // 2 if n > 1 else 0
    return profile[: n + 1]


def cross_count_naive(s, t, k: int) -> int:
    a, b = _pair_codes(s, t)
    n = len(a)
    if len(b) != n:
        raise ValueError("sequences must have equal length")
    _check_k(n, k)
    total = 0
    for i in range(n - k + 1):
        wi = a[i : i + k]
        for j in range(n - k + 1):
            if j != i and np.array_equal(wi, b[j : j + k]):
                total += 1
    return total


# ---------------------------------------------------------------- fast routes

def _hash_windows(a: np.ndarray, k: int) -> np.ndarray:
    """62-bit fingerprints of all ``k``-windows (two polynomial hashes mod primes)."""
    n = len(a)
    x = a.astype(np.int64) + 1
    keys = []
    for p, base in ((_P1, _B1), (_P2, _B2)):
        pw = _powers(base, n + 1, p)
        inv = _powers(pow(base, p - 2, p), n + 1, p)
        prefix = np.zeros(n + 1, dtype=np.int64)
        np.cumsum((x * pw[:n]) % p, out=prefix[1:])
        prefix %= p
        win = (prefix[k:] - prefix[: n - k + 1]) % p
        keys.append((win * inv[: n - k + 1]) % p)
    return (keys[0] << 31) | keys[1]


def _powers(base: int, count: int, p: int) -> np.ndarray:
    out = np.ones(count, dtype=np.int64)
    filled = 1
    step = base % p
    while filled < count:
        take = min(filled, count - filled)
        out[filled : filled + take] = (out[:take] * step) % p
        filled += take
        step = step * step % p
    return out


def _window_groups(a: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Window starts sorted by fingerprint, and group boundaries, collision-free."""
    keys = _hash_windows(a, k)
    order = np.argsort(keys, kind="stable")
    sk = keys[order]
    bounds = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1], True])
    starts = np.repeat(order[bounds[:-1]], np.diff(bounds))
    # Verify every member against its group's first window.
    step = max(1, 4_000_000 // max(k, 1))
    for lo in range(0, len(order), step):
        mem = order[lo : lo + step]
        rep = starts[lo : lo + step]
        diff = mem != rep
        if not diff.any():
            continue
        cols = np.arange(k)
        if not np.array_equal(a[mem[diff, None] + cols], a[rep[diff, None] + cols]):
            return _exact_groups(a, k)
    return order, bounds


def _exact_groups(a: np.ndarray, k: int):
    win = np.lib.stride_tricks.sliding_window_view(a, k)
    order = np.lexsort(win.T[::-1])
    sw = win[order]
    fresh = np.r_[True, np.any(sw[1:] != sw[:-1], axis=1), True]
    return order, np.flatnonzero(fresh)


def count_matches_fast(s, k, method: str = "suffix"):
    """``N(s, k)`` by grouping windows into equality classes.

    ``method="suffix"`` reads classes off runs of the adjacent-LCP array;
    ``method="hash"`` groups fingerprints and verifies every member by
    direct comparison.  Both are exact.  Passing a sequence of ``k`` values
    returns a list and, for the suffix method, builds the index once.
    """
    a = as_codes(s)
    n = len(a)
    many = not isinstance(k, (int, np.integer))
    ks = [int(x) for x in k] if many else [int(k)]
    for x in ks:
        _check_k(n, x)
    if method == "suffix":
        (codes,) = compact_codes(a)
        idx = SuffixIndex(codes)
        top = idx.max_lcp()
        counts = [idx.count_pairs(x) if x <= top else 0 for x in ks]
    elif method == "hash":
        counts = []
        for x in ks:
            _, bounds = _window_groups(a, x)
            sizes = np.diff(bounds)
            counts.append(int((sizes * (sizes - 1) // 2).sum()))
    else:
        raise ValueError(f"unknown method {method!r}")
    out = [MatchStats(n, x, c) for x, c in zip(ks, counts)]
    return out if many else out[0]


def _index(s) -> SuffixIndex:
    (codes,) = compact_codes(as_codes(s))
    return SuffixIndex(codes)


def max_match_from_index(idx: SuffixIndex) -> OverlapReport:
    n = idx.n
    M = idx.max_lcp()
    if M == 0:
        return OverlapReport(0, None)
    lab = idx.labels(M)[: n - M + 1]
    sizes = np.bincount(lab)
    i = int(np.argmax(sizes[lab] >= 2))
    j = i + 1 + int(np.flatnonzero(lab[i + 1 :] == lab[i])[0])
    return OverlapReport(M, (i, j))


def max_match(s) -> OverlapReport:
    """Longest repeated window (overlaps allowed) with the smallest ``(i, j)`` witness."""
    return max_match_from_index(_index(s))


def first_occurrence(s, k: int) -> HittingReport:
    """Shortest prefix containing two equal ``k``-windows, scanning left to right.

    Each new position completes one window, which is looked up in a table of
    rolling-hash fingerprints of earlier windows; hits are confirmed by
    comparing the windows themselves.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a = as_codes(s).tolist()
    n = len(a)
    if k > n:
        return HittingReport(INFINITY, None)
    mod = (1 << 61) - 1
    base = 1_000_000_007
    top = pow(base, k - 1, mod)
    seen: dict[int, list[int]] = {}
    h = 0
    for t in range(k):
        h = (h * base + a[t] + 1) % mod
    for j in range(n - k + 1):
        if j > 0:
            h = ((h - (a[j - 1] + 1) * top) * base + a[j + k - 1] + 1) % mod
        bucket = seen.get(h)
        if bucket is not None:
            win = a[j : j + k]
            for i in bucket:
                if a[i : i + k] == win:
                    return HittingReport(j + k, (i, j, k))
            bucket.append(j)
        else:
            seen[h] = [j]
    return HittingReport(INFINITY, None)


def duality_check(s, k: int) -> bool:
    """Whether ``N == 0``, ``M < k`` and ``T > n`` agree, each by its own code path.

    ``N`` uses verified fingerprint grouping, ``M`` the suffix array, ``T``
    the incremental scan.
    """
    a = as_codes(s)
    n = len(a)
    _check_k(n, k)
    no_pairs = count_matches_fast(a, k, method="hash").count == 0
    short = max_match(a).length < k
    late = first_occurrence(a, k).time > n
    return no_pairs == short == late


# ---------------------------------------------------------------- two sequences

class CrossIndex:
    """Generalised suffix array over ``s + [separator] + t``."""

    def __init__(self, s, t):
        a, b = _pair_codes(s, t)
        if len(a) != len(b):
            raise ValueError(
                f"cross matching needs sequences of equal length, got {len(a)} and {len(b)}"
            )
        self.n = len(a)
        ca, cb = compact_codes(a, b)
        sep = max(int(ca.max()), int(cb.max())) + 1
        self.index = SuffixIndex(np.concatenate([ca, [sep], cb]))
        self._eq = ca == cb

    def _labels(self, k: int):
        n = self.n
        lab = self.index.labels(k)
        return lab[: n - k + 1], lab[n + 1 : 2 * n + 2 - k]

    def diagonal(self, k: int) -> int:
        return _equal_windows_along_shift(self._eq, k)

    def count(self, k: int) -> int:
        _check_k(self.n, k)
        ls, lt = self._labels(k)
        size = int(max(ls.max(), lt.max())) + 1
        both = np.bincount(ls, minlength=size) * np.bincount(lt, minlength=size)
        return int(both.sum()) - self.diagonal(k)

    def longest_common(self) -> OverlapReport:
        """Longest common window with no restriction on the offsets."""
        n = self.n
        sa, lcp = self.index.sa, self.index.lcp
        side = sa < n
        cross = side[:-1] != side[1:]
        L = int(lcp[cross].max()) if cross.any() else 0
        if L == 0:
            return OverlapReport(0, None)
        ls, lt = self._labels(L)
        size = int(max(ls.max(), lt.max())) + 1
        big = np.iinfo(np.int64).max
        first_t = np.full(size, big)
        np.minimum.at(first_t, lt, np.arange(len(lt)))
        ok = first_t[ls] < big
        i = int(np.argmax(ok))
        return OverlapReport(L, (i, int(first_t[ls[i]])))

    def _offdiagonal_witness(self, k: int):
        ls, lt = self._labels(k)
        size = int(max(ls.max(), lt.max())) + 1
        big = np.iinfo(np.int64).max
        jt = np.arange(len(lt))
        first_t = np.full(size, big)
        np.minimum.at(first_t, lt, jt)
        second_t = np.full(size, big)
        rest = jt != first_t[lt]
        np.minimum.at(second_t, lt[rest], jt[rest])
        i_all = np.arange(len(ls))
        j_all = np.where(first_t[ls] != i_all, first_t[ls], second_t[ls])
        ok = j_all < big
        if not ok.any():
            return None
        i = int(np.argmax(ok))
        return (i, int(j_all[i]))

    def max_match(self) -> OverlapReport:
        """Longest window shared at offsets ``j != i``, plus the unconstrained value."""
        free = self.longest_common()
        lo, hi = 0, free.length
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.count(mid) > 0:
                lo = mid
            else:
                hi = mid - 1
        witness = self._offdiagonal_witness(lo) if lo > 0 else None
        return OverlapReport(lo, witness, free.length, free.witness)


def cross_count(s, t, k: int) -> MatchStats:
    idx = CrossIndex(s, t)
    return MatchStats(idx.n, k, idx.count(k))


def max_cross_match(s, t) -> OverlapReport:
    return CrossIndex(s, t).max_match()
