import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftmatch import rng

MASK = (1 << 64) - 1


def sequential_splitmix(state, count):
    out = []
    for _ in range(count):
        state = (state + rng.GAMMA) & MASK
        out.append(rng.mix64_int(state))
    return out


def test_published_vectors():
    # reference outputs of SplitMix64 seeded with 1234567
    expected = [6457827717110365317, 3203168211198807973, 9817491932198370423,
                4593380528125082431, 16408922859458223821]
    assert sequential_splitmix(1234567, 5) == expected
    assert rng.raw(1234567, 0, 5).tolist() == expected


@settings(max_examples=50, deadline=None)
@given(st.integers(0, MASK), st.integers(0, 10**6), st.integers(1, 40))
def test_counter_blocks_match_sequential(key, start, count):
    full = sequential_splitmix(key, start + count) if start < 50 else None
    block = rng.raw(key, start, count).tolist()
    if full is not None:
        assert block == full[start:]
    assert block[1:] == rng.raw(key, start + 1, count - 1).tolist()


def test_uniforms_range_and_mean():
    u = rng.uniforms(rng.stream_key(7), 0, 200_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / len(u))


def test_streams_are_distinct():
    keys = {rng.stream_key(3, s) for s in (rng.STREAM_SINGLE, rng.STREAM_FIRST, rng.STREAM_SECOND)}
    assert len(keys) == 3
    assert rng.stream_key(3) != rng.stream_key(4)
