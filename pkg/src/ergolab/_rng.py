"""Seed discipline.

Every stochastic choice in the package is derived from one 64-bit seed.
Per-cell jitter uses a vectorised splitmix64 hash of ``(seed, stream, index,
k)`` so that construction order never matters; per-point streams use
:class:`numpy.random.SeedSequence` with a spawn key.
"""
from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

# Stream tags. Keep these stable: changing one changes every derived value.
STREAM_JITTER = 1
STREAM_POINTS = 2
STREAM_SENSITIVITY = 3


def _splitmix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def hash_uniform(seed: int, stream: int, index, k: int = 0) -> np.ndarray:
    """Uniform floats in [0, 1) keyed by ``(seed, stream, index, k)``.

    ``index`` may be an integer array; the result has its shape.
    """
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ np.uint64(stream * 0x632BE59BD9B4E019 & 0xFFFFFFFFFFFFFFFF))
        z = _splitmix64(z ^ idx)
        z = _splitmix64(z + np.uint64(k))
    # top 53 bits -> double in [0, 1)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def point_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one worker/point, derived by spawn key."""
    ss = np.random.SeedSequence(entropy=seed & 0xFFFFFFFFFFFFFFFF, spawn_key=(stream, index))
    return np.random.default_rng(ss)


def seeded_points(seed: int, count: int, dim: int = 1) -> np.ndarray:
    """``count`` reproducible initial points in [0, 1)^dim, one stream each."""
    pts = np.array([point_rng(seed, STREAM_POINTS, i).random(dim) for i in range(count)])
    return pts[:, 0] if dim == 1 else pts
