"""Counter-based seed derivation.

Every random stream is keyed by a 64-bit ``seed_root`` plus a tuple of
counters, e.g. ``(experiment kind, λ index, trial index)``. String keys are
mapped to 64-bit integers with BLAKE2b, then the tuple becomes the
``spawn_key`` of a ``numpy.random.SeedSequence`` rooted at ``seed_root``.
Any implementation that reproduces these two steps reproduces the streams.
"""

import hashlib

import numpy as np


def key_to_int(key: int | str) -> int:
    if isinstance(key, int):
        if key < 0:
            raise ValueError(f"Seed keys must be nonnegative, got {key}")
        return key
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(seed_root: int, *keys: int | str) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        seed_root, spawn_key=tuple(key_to_int(k) for k in keys)
    )


def derive_seed(seed_root: int, *keys: int | str) -> int:
    """A 64-bit integer seed for the stream named by ``keys``."""
    return int(seed_sequence(seed_root, *keys).generate_state(1, dtype=np.uint64)[0])


def make_rng(seed_root: int, *keys: int | str) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed_root, *keys))
