"""Counter-based seeded generators keyed by (seed, purpose, batch)."""
import zlib

import numpy as np


def _tag(purpose):
    return zlib.crc32(purpose.encode("utf-8"))


def make_rng(seed, purpose, batch_id=0):
    """Philox generator whose stream depends only on (seed, purpose, batch_id).

    Streams with different keys are independent, so batches can be sampled in
    any order or in parallel without changing results.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence([int(seed), _tag(purpose), int(batch_id)])
    return np.random.Generator(np.random.Philox(ss))
