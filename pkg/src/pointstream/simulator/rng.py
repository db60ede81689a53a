"""Counter-based deterministic uniforms for per-ray dropout.

splitmix64 of a key built from (seed, sensor, rotation, ray) gives each
ray an independent uniform that does not depend on evaluation order or
thread count.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)


def splitmix64(x) -> np.ndarray:
    with np.errstate(over="ignore"):  # uint64 wraparound is the algorithm
        z = (np.asarray(x, dtype=np.uint64) + _GAMMA).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def ray_uniforms(seed: int, sensor: int, rotation: int, ray_indices) -> np.ndarray:
    """Uniforms in [0, 1) keyed by (seed, sensor, rotation, ray index)."""
    h = splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    h = splitmix64(h ^ np.uint64((sensor + 1) & 0xFFFFFFFFFFFFFFFF))
    h = splitmix64(h ^ np.uint64((rotation + 1) & 0xFFFFFFFFFFFFFFFF))
    keys = splitmix64(h ^ np.asarray(ray_indices, dtype=np.uint64))
    return (keys >> np.uint64(11)).astype(np.float64) * _INV_2_53
