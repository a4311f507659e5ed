import numpy as np

from shiftmatch.potential import Alphabet, Interaction


def random_interaction(seed, m=2, R=2, scale_=0.8):
    """Random couplings on offsets {0}, {0,1}, {0,2}, {0,1,2} that fit in range R."""
    rng = np.random.default_rng(seed)
    offsets = [(0,), (0, 1), (0, 2), (0, 1, 2)]
    terms = {S: scale_ * rng.normal(size=(m,) * len(S)) for S in offsets if S[-1] <= R}
    return Interaction(Alphabet.of_size(m), R, terms, name=f"rand{seed}")
