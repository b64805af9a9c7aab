"""Keyed random streams.

Every random draw in the package comes from a Philox generator (numpy's
counter-based bit generator) whose key is derived from ``(seed, *path)``
through :class:`numpy.random.SeedSequence`. Two streams with different paths
are statistically independent, and a stream never depends on how many draws
other streams made, which is what lets trees grow in any order.
"""

import numpy as np

# stable integer tags for the stream domains
_DOMAINS = {"split": 1, "tree": 2}


def stream(seed: int, domain: str, *path: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = (_DOMAINS[domain], *(int(p) for p in path))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
