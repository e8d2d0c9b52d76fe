"""Deterministic random streams.

Every random draw in the package comes from ``stream(seed, purpose, *index)``:
a PCG64 generator keyed by ``SeedSequence([seed, purpose_code, *index])``.
Codebook generation, encoder sampling, source sampling and attack codebooks
therefore never share a stream, and each is reproducible on its own.
"""
import numpy as np

PURPOSES = {
    "codebook": 1,
    "encoder": 2,
    "source": 3,
    "attack": 4,
    "trial": 5,
    "grid": 6,
}

SEED_MAX = (1 << 64) - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return seed


def stream(seed: int, purpose: str, *index: int) -> np.random.Generator:
    try:
        code = PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"unknown stream purpose {purpose!r}") from None
    key = [check_seed(seed), code, *(int(i) for i in index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))
