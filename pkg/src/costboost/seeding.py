"""Deterministic random streams derived from one 64-bit seed.

numpy's SeedSequence is a counter-based splitter: a child keyed by a tuple
of integers is statistically independent of every other key, so per-round,
per-fold and per-purpose streams never perturb each other regardless of
evaluation order.
"""

import numpy as np

TREE_STREAM = 0
FOLD_STREAM = 1
DATA_STREAM = 2


def child_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(p) for p in key))


def child_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(child_sequence(seed, *key))


def child_seed(seed: int, *key: int) -> int:
    """A plain integer seed for APIs that take one."""
    return int(child_sequence(seed, *key).generate_state(1)[0])
