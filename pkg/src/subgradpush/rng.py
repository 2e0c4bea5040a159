"""Seeded, counter-based random streams (Philox) keyed by integer tuples."""

import numpy as np


def philox(seed, *keys):
    """Independent generator for ``(seed, *keys)``; identical across platforms."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))
