"""Scene container, ray casting across primitives, illumination variants."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from pointstream.simulator.primitives import Rect


@dataclass
class Scene:
    primitives: list = field(default_factory=list)
    seed: int = 0

    def with_illumination(self, gain, bias, indices=None) -> "Scene":
        """Copy of the scene with colors mapped c' = clip(gain*c + bias).

        ``indices`` restricts the change to a subset of primitives; this
        affine recoloring stands in for a change of sunlight.
        """
        gain = np.asarray(gain, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        targets = set(range(len(self.primitives)) if indices is None else indices)
        prims = []
        for i, prim in enumerate(self.primitives):
            p = copy.deepcopy(prim)
            if i in targets:
                p.color = _affine_color(p.color, gain, bias)
                if isinstance(p, Rect) and p.color2 is not None:
                    p.color2 = _affine_color(p.color2, gain, bias)
            prims.append(p)
        return Scene(prims, self.seed)


def _affine_color(color, gain, bias) -> np.ndarray:
    c = np.asarray(color, dtype=np.float64)
    return np.clip(np.rint(gain * c + bias), 0, 255).astype(np.uint8)


def cast_rays(scene: Scene, origin, dirs, times):
    """Nearest-primitive intersection for a bundle of rays.

    ``times`` is scalar or per-ray. Returns (t, prim_idx) with t = inf
    and prim_idx = -1 where nothing is hit.
    """
    return cast_prims(
        list(enumerate(scene.primitives)), origin, np.atleast_2d(dirs), times
    )


def cast_prims(indexed_prims, origin, dirs, times):
    """cast_rays over an explicit [(original_index, prim), ...] subset."""
    dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    origin = np.asarray(origin, dtype=np.float64).reshape(3)
    n = len(dirs)
    best_t = np.full(n, np.inf)
    best_i = np.full(n, -1, dtype=np.int64)
    for i, prim in indexed_prims:
        t = prim.intersect(origin, dirs, times)
        closer = t < best_t
        best_t[closer] = t[closer]
        best_i[closer] = i
    return best_t, best_i


class StaticCastCache:
    """Reusable intersection of a fixed ray bundle with static primitives.

    Moving primitives are re-intersected per call and merged. Identical
    to :func:`cast_rays` except on exact inter-primitive distance ties,
    where the winner may differ (coincident surfaces only).
    """

    def __init__(self, scene: Scene, origin, dirs):
        self.origin = np.asarray(origin, dtype=np.float64).reshape(3)
        self.dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
        static = [
            (i, p) for i, p in enumerate(scene.primitives) if p.motion is None
        ]
        self.moving = [
            (i, p) for i, p in enumerate(scene.primitives) if p.motion is not None
        ]
        self._t0, self._i0 = cast_prims(static, self.origin, self.dirs, 0.0)

    def cast(self, times):
        if not self.moving:
            return self._t0.copy(), self._i0.copy()
        t, idx = self._t0.copy(), self._i0.copy()
        for i, prim in self.moving:
            tm = prim.intersect(self.origin, self.dirs, times)
            closer = tm < t
            t[closer] = tm[closer]
            idx[closer] = i
        return t, idx


def colors_for_hits(scene: Scene, prim_idx, points, times) -> np.ndarray:
    """Surface colors for hit points returned by :func:`cast_rays`."""
    points = np.atleast_2d(points)
    times = np.asarray(times, dtype=np.float64)
    out = np.zeros((len(points), 3), dtype=np.uint8)
    for i, prim in enumerate(scene.primitives):
        sel = prim_idx == i
        if sel.any():
            t_sel = times[sel] if times.ndim else times
            out[sel] = prim.color_at(points[sel], t_sel)
    return out
