"""Shift-match statistics for one-dimensional finite-range Gibbs sequences."""
from .potential import (Alphabet, Interaction, Window, add, iid_weights, ising, scale,
                        truncate, zero_interaction)
from .thermo import (alpha, alpha_tilde, build_transfer, cylinder_prob, cylinder_probs,
                     entropy, k_star, k_star_tilde, pair_overlap_sum, pattern_power_sum,
                     pressure)
from .sampler import Sequence, build_chain, dirac_sequence, sample, sample_pair
from .matcher import (count_matches_fast, count_matches_naive, cross_count, duality_check,
                      first_occurrence, max_cross_match, max_match)
from .modelfile import load_model

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Interaction",
    "Window",
    "add",
    "iid_weights",
    "ising",
    "scale",
    "truncate",
    "zero_interaction",
    "alpha",
    "alpha_tilde",
    "build_transfer",
    "cylinder_prob",
    "cylinder_probs",
    "entropy",
    "k_star",
    "k_star_tilde",
    "pair_overlap_sum",
    "pattern_power_sum",
    "pressure",
    "Sequence",
    "build_chain",
    "dirac_sequence",
    "sample",
    "sample_pair",
    "count_matches_fast",
    "count_matches_naive",
    "cross_count",
    "duality_check",
    "first_occurrence",
    "max_cross_match",
    "max_match",
    "load_model",
]
