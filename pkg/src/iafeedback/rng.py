"""Seed derivation and reproducible random generators.

All randomness in the package flows from integer seeds through Philox, a
counter-based bit generator whose output stream is fixed by its 128-bit key.
Component seeds are derived from a master seed by hashing a label path, and
Monte Carlo drivers derive per-trial seeds as ``component_seed ^ trial_index``
so that trials are independent of execution order.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed, *labels):
    """Derive a 64-bit sub-seed from `seed` and a path of string/int labels."""
    text = str(int(seed)) + "/" + "/".join(str(x) for x in labels)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") & _MASK64


def trial_seed(component_seed, index):
    """Per-trial seed: component seed XOR trial index (order independent)."""
    return (int(component_seed) ^ int(index)) & _MASK64


def generator(seed):
    """Philox-backed Generator for a 64-bit integer seed.

    Accepts an existing Generator unchanged so library functions can take
    either a seed or a generator.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
