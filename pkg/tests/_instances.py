"""Small clumped samples for comparing the search with exhaustive minimization."""

from __future__ import annotations

import numpy as np

FAMILIES = ("bernoulli", "gaussian", "biexp")


def tiny_instance(seed: int, max_distinct: int = 10) -> tuple[str, np.ndarray]:
    """Family by ``seed % 3``; 8 to 40 rounded draws from one to three clumps."""
    rng = np.random.default_rng(seed)
    fam = FAMILIES[seed % 3]
    n = int(rng.integers(8, 41))
    if fam == "bernoulli":
        return fam, (rng.random(n) < rng.random()).astype(float)
    while True:
        k = int(rng.integers(1, 4))
        centres = np.cumsum(rng.uniform(3, 6, size=k))
        x = np.round(centres[rng.integers(0, k, size=n)] + rng.normal(0, 1, size=n))
        if np.unique(x).size <= max_distinct:
            return fam, x
