import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftmatch.matcher import (CrossIndex, count_matches_fast, count_matches_naive,
                                cross_count, cross_count_naive, duality_check,
                                first_occurrence, match_profile_naive, max_cross_match,
                                max_match)
from shiftmatch.potential import zero_interaction
from shiftmatch.sampler import Sequence, build_chain, dirac_sequence, sample
from shiftmatch.suffix import SuffixIndex, compact_codes

words = st.lists(st.integers(0, 2), min_size=1, max_size=60)


def brute_pairs(s, k):
    n = len(s)
    return sum(1 for i in range(n - k + 1) for j in range(i + 1, n - k + 1)
               if s[i : i + k] == s[j : j + k])


def brute_max(s):
    """Longest repeat and its lexicographically smallest witness."""
    n = len(s)
    for k in range(n - 1, 0, -1):
        for i in range(n - k + 1):
            for j in range(i + 1, n - k + 1):
                if s[i : i + k] == s[j : j + k]:
                    return k, (i, j)
    return 0, None


def brute_first(s, k):
    for end in range(k, len(s) + 1):
        if brute_pairs(s[:end], k) > 0:
            return end
    return math.inf


# N

def test_naive_examples():
    assert count_matches_naive("aaaa", 2).count == 3
    assert count_matches_naive("abab", 2).count == 1
    assert count_matches_naive("abc", 2).count == 0


def test_fast_examples():
    assert count_matches_fast("aaaa", 2).count == 3
    assert count_matches_fast("aaaa", 2, method="hash").count == 3
    d = dirac_sequence("a", 100)
    assert count_matches_fast(d, 10).count == math.comb(91, 2) == 4095
    assert count_matches_fast(d, 10, method="hash").count == 4095


@pytest.mark.parametrize("fn", [count_matches_naive, count_matches_fast])
def test_k_out_of_range(fn):
    with pytest.raises(ValueError):
        fn("abc", 0)
    with pytest.raises(ValueError):
        fn("abc", 4)


def test_unknown_method():
    with pytest.raises(ValueError):
        count_matches_fast("abc", 1, method="magic")


@settings(max_examples=150, deadline=None)
@given(words)
def test_counts_agree_with_enumeration(s):
    n = len(s)
    profile = match_profile_naive(s)
    fast = count_matches_fast(s, range(1, n + 1))
    for k in range(1, n + 1):
        expected = brute_pairs(s, k)
        assert count_matches_naive(s, k).count == expected
        assert profile[k] == expected
        assert fast[k - 1].count == expected
        assert count_matches_fast(s, k, method="hash").count == expected


@settings(max_examples=80, deadline=None)
@given(words)
def test_count_bounds_and_monotonicity(s):
    n = len(s)
    counts = [count_matches_fast(s, k).count for k in range(1, n + 1)]
    for k, c in zip(range(1, n + 1), counts):
        assert c <= (n - k + 1) * (n - k) // 2
    assert all(b <= a for a, b in zip(counts, counts[1:]))


def test_ordered_count_is_twice_unordered():
    s = list("abracadabra")
    for k in range(1, 6):
        ordered = sum(1 for i in range(12 - k) for j in range(12 - k)
                      if i != j and s[i : i + k] == s[j : j + k])
        assert ordered == 2 * count_matches_naive(s, k).count


def test_hash_handles_large_alphabet():
    rng = np.random.default_rng(1)
    s = rng.integers(0, 10**6, size=3000)
    s[2000:2100] = s[100:200]
    assert count_matches_fast(s, 50, method="hash").count == count_matches_fast(s, 50).count


# M

def test_max_match_examples():
    r = max_match("abab")
    assert (r.length, r.witness) == (2, (0, 2))
    assert max_match("abc").length == 0
    assert max_match("abc").witness is None
    r = max_match("mississippi")
    assert r.length == 4
    assert r.witness == (1, 4)


@settings(max_examples=150, deadline=None)
@given(words)
def test_max_match_brute_force(s):
    r = max_match(s)
    assert (r.length, r.witness) == brute_max(s)
    if r.witness:
        i, j = r.witness
        assert s[i : i + r.length] == s[j : j + r.length]


def test_max_match_grows_with_appending():
    rng = np.random.default_rng(4)
    s = list(rng.integers(0, 2, size=200))
    prev = 0
    for n in range(1, 201, 7):
        cur = max_match(s[:n]).length
        assert cur >= prev
        prev = cur


# T

def test_first_occurrence_examples():
    r = first_occurrence("abcabc", 3)
    assert r.time == 6 and r.witness == (0, 3, 3)
    assert first_occurrence("aa", 1).time == 2
    r = first_occurrence("abc", 1)
    assert r.time == math.inf and not r.finite


@settings(max_examples=150, deadline=None)
@given(words, st.integers(1, 8))
def test_first_occurrence_brute_force(s, k):
    r = first_occurrence(s, k)
    assert r.time == brute_first(s, k)
    if r.finite:
        assert r.time >= k
        i, j, kk = r.witness
        assert j + k == r.time and s[i : i + k] == s[j : j + k]


@settings(max_examples=60, deadline=None)
@given(words)
def test_first_occurrence_nondecreasing_in_k(s):
    times = [first_occurrence(s, k).time for k in range(1, len(s) + 2)]
    assert all(b >= a for a, b in zip(times, times[1:]))


# duality

def test_duality_examples():
    assert duality_check("abab", 2)
    assert duality_check("abc", 2)


@settings(max_examples=300, deadline=None)
@given(words, st.integers(1, 60))
def test_duality_property(s, k):
    k = min(k, len(s))
    assert duality_check(s, k)


# two sequences

def test_cross_examples():
    assert cross_count("ab", "ba", 1).count == 2
    assert cross_count("ab", "ab", 1).count == 0


def test_cross_length_mismatch():
    with pytest.raises(ValueError, match="equal length"):
        cross_count("abc", "ab", 1)
    with pytest.raises(ValueError):
        max_cross_match("abc", "ab")


def test_max_cross_examples():
    r = max_cross_match("xabcy", "zabcw")
    assert r.length == 0 and r.witness is None
    assert r.unconstrained_length == 3 and r.unconstrained_witness == (1, 1)
    r = max_cross_match("aaaa", "aaaa")
    assert r.length == 3 and r.witness == (0, 1)
    r = max_cross_match("abc", "def")
    assert r.length == 0 and r.unconstrained_length == 0


pairs = st.integers(1, 40).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 2), min_size=n, max_size=n),
                        st.lists(st.integers(0, 2), min_size=n, max_size=n)))


@settings(max_examples=150, deadline=None)
@given(pairs)
def test_cross_against_double_loop(st_pair):
    s, t = st_pair
    n = len(s)
    idx = CrossIndex(s, t)
    best, witness = 0, None
    for k in range(1, n + 1):
        c = cross_count_naive(s, t, k)
        assert idx.count(k) == c
        assert cross_count(t, s, k).count == c
        assert c <= (n - k + 1) * (n - k)
        if c:
            best = k
    r = idx.max_match()
    assert r.length == best
    if best:
        witness = min((i, j) for i in range(n - best + 1) for j in range(n - best + 1)
                      if i != j and s[i : i + best] == t[j : j + best])
        assert r.witness == witness
    free = max((k for k in range(1, n + 1)
                if any(s[i : i + k] == t[j : j + k]
                       for i in range(n - k + 1) for j in range(n - k + 1))), default=0)
    assert r.unconstrained_length == free


def test_cross_random_binary_n500():
    rng = np.random.default_rng(500)
    s, t = rng.integers(0, 2, size=500), rng.integers(0, 2, size=500)
    idx = CrossIndex(s, t)
    for k in (1, 2, 5, 9, 13, 17):
        assert idx.count(k) == cross_count_naive(s, t, k)


def test_cross_alphabets_are_matched_by_symbol():
    from shiftmatch.potential import Alphabet

    s = Sequence.from_symbols("abab", Alphabet("ab"))
    t = Sequence.from_symbols("baba", Alphabet("ba"))  # same text, different coding
    assert cross_count(s, t, 2).count == cross_count_naive("abab", "baba", 2)


# suffix index

def brute_sa(codes):
    n = len(codes)
    sa = sorted(range(n), key=lambda i: list(codes[i:]))
    lcp = []
    for a, b in zip(sa, sa[1:]):
        L = 0
        while a + L < n and b + L < n and codes[a + L] == codes[b + L]:
            L += 1
        lcp.append(L)
    return sa, lcp


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=120))
def test_suffix_index_brute_force(codes):
    idx = SuffixIndex(np.array(codes))
    sa, lcp = brute_sa(codes)
    assert idx.sa.tolist() == sa
    assert idx.lcp.tolist() == lcp


def test_suffix_index_rejects_zero():
    with pytest.raises(ValueError):
        SuffixIndex(np.array([0, 1]))


def test_compact_codes_joint_order():
    a, b = compact_codes(np.array([5, 9]), np.array([9, 7]))
    assert a.tolist() == [1, 3] and b.tolist() == [3, 2]


def test_max_match_scales():
    s = sample(build_chain(zero_interaction(2)), 2**18, 5)
    r = max_match(s)
    i, j = r.witness
    assert np.array_equal(s.codes[i : i + r.length], s.codes[j : j + r.length])
    assert count_matches_fast(s, r.length + 1).count == 0
