"""Deterministic seed derivation.

Every random stream in the package is derived from one user seed plus a tuple
of purpose tags, so independent components never share a stream and results
do not depend on call order.
"""

import hashlib

import numpy as np


def derive_seed(seed, *tags):
    """Hash ``(seed, *tags)`` to a 64-bit unsigned integer."""
    text = "\x1f".join([str(int(seed))] + [str(t) for t in tags])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed, *tags):
    return np.random.default_rng(derive_seed(seed, *tags))
