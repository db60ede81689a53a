"""Scene primitives with vectorized analytic ray intersection.

All intersections take a shared ray origin, per-ray unit directions and
per-ray evaluation times (a spinning LiDAR sees a rolling scene), and
return the hit parameter t in meters (inf = miss).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_PLANE_EPS = 1e-12


@dataclass
class LinearMotion:
    """Rigid translation at constant velocity; base geometry is at t = 0."""

    velocity: np.ndarray

    def __post_init__(self):
        self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(3)

    def offset_at(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=np.float64)
        return t[..., None] * self.velocity


def _offsets(motion, times, n):
    if motion is None:
        return np.zeros((1, 3))
    t = np.asarray(times, dtype=np.float64)
    if t.ndim == 0:
        return motion.offset_at(t).reshape(1, 3)
    return motion.offset_at(t)


@dataclass
class Box:
    """Axis-aligned box given by center and full extents."""

    center: np.ndarray
    size: np.ndarray
    color: np.ndarray
    motion: LinearMotion | None = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.size = np.asarray(self.size, dtype=np.float64).reshape(3)
        if np.any(self.size <= 0):
            raise ValueError("box extents must be positive")
        self.color = np.asarray(self.color, dtype=np.uint8).reshape(3)

    def intersect(self, origin, dirs, times) -> np.ndarray:
        dirs = np.atleast_2d(dirs)
        off = _offsets(self.motion, times, len(dirs))
        half = self.size / 2.0
        lo = self.center - half + off - origin
        hi = self.center + half + off - origin
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / dirs
            t1 = lo * inv
            t2 = hi * inv
        near = np.fmax(np.fmax(np.fmin(t1[:, 0], t2[:, 0]), np.fmin(t1[:, 1], t2[:, 1])),
                       np.fmin(t1[:, 2], t2[:, 2]))
        far = np.fmin(np.fmin(np.fmax(t1[:, 0], t2[:, 0]), np.fmax(t1[:, 1], t2[:, 1])),
                      np.fmax(t1[:, 2], t2[:, 2]))
        t = np.where(near > 0.0, near, far)  # inside the box: exit point
        hit = (far >= near) & (t > 0.0)
        return np.where(hit, t, np.inf)

    def color_at(self, points, times) -> np.ndarray:
        return np.broadcast_to(self.color, (len(np.atleast_2d(points)), 3))

    def aabb(self, t: float):
        off = self.motion.offset_at(t) if self.motion else 0.0
        half = self.size / 2.0
        return self.center + off - half, self.center + off + half


@dataclass
class Sphere:
    center: np.ndarray
    radius: float
    color: np.ndarray
    motion: LinearMotion | None = None

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        if not (self.radius > 0):
            raise ValueError("sphere radius must be positive")
        self.color = np.asarray(self.color, dtype=np.uint8).reshape(3)

    def intersect(self, origin, dirs, times) -> np.ndarray:
        dirs = np.atleast_2d(dirs)
        off = _offsets(self.motion, times, len(dirs))
        oc = origin - (self.center + off)
        b = np.einsum("ij,ij->i", np.broadcast_to(oc, dirs.shape), dirs)
        c = np.einsum("ij,ij->i", oc, oc) - self.radius**2
        disc = b * b - c
        with np.errstate(invalid="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
        t_near = -b - sq
        t_far = -b + sq
        t = np.where(t_near > 0.0, t_near, t_far)
        hit = (disc >= 0.0) & (t > 0.0)
        return np.where(hit, t, np.inf)

    def color_at(self, points, times) -> np.ndarray:
        return np.broadcast_to(self.color, (len(np.atleast_2d(points)), 3))

    def aabb(self, t: float):
        off = self.motion.offset_at(t) if self.motion else 0.0
        return self.center + off - self.radius, self.center + off + self.radius


@dataclass
class Rect:
    """Finite plane patch: origin corner plus two edge vectors.

    Optional checker coloring alternates ``color``/``color2`` in squares
    of ``checker_square`` meters measured along the edges.
    """

    origin: np.ndarray
    edge_u: np.ndarray
    edge_v: np.ndarray
    color: np.ndarray
    color2: np.ndarray | None = None
    checker_square: float | None = None
    motion: LinearMotion | None = None

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        self.edge_u = np.asarray(self.edge_u, dtype=np.float64).reshape(3)
        self.edge_v = np.asarray(self.edge_v, dtype=np.float64).reshape(3)
        n = np.cross(self.edge_u, self.edge_v)
        if np.linalg.norm(n) <= 0:
            raise ValueError("rect edges must span a plane")
        self.color = np.asarray(self.color, dtype=np.uint8).reshape(3)
        if self.color2 is not None:
            self.color2 = np.asarray(self.color2, dtype=np.uint8).reshape(3)
        if self.checker_square is not None and not (self.checker_square > 0):
            raise ValueError("checker_square must be positive")

    def intersect(self, origin, dirs, times) -> np.ndarray:
        dirs = np.atleast_2d(dirs)
        off = _offsets(self.motion, times, len(dirs))
        n = np.cross(self.edge_u, self.edge_v)
        denom = dirs @ n
        base = self.origin + off
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.einsum("ij,j->i", base - origin, n) / denom
        hit = (np.abs(denom) > _PLANE_EPS) & (t > 0.0) & np.isfinite(t)
        p = origin + t[:, None] * dirs
        rel = p - base
        uu = self.edge_u @ self.edge_u
        vv = self.edge_v @ self.edge_v
        a = (rel @ self.edge_u) / uu
        b = (rel @ self.edge_v) / vv
        hit &= (a >= 0.0) & (a <= 1.0) & (b >= 0.0) & (b <= 1.0)
        return np.where(hit, t, np.inf)

    def color_at(self, points, times) -> np.ndarray:
        pts = np.atleast_2d(points)
        if self.checker_square is None or self.color2 is None:
            return np.broadcast_to(self.color, (len(pts), 3))
        off = _offsets(self.motion, times, len(pts))
        rel = pts - (self.origin + off)
        lu = np.linalg.norm(self.edge_u)
        lv = np.linalg.norm(self.edge_v)
        au = (rel @ self.edge_u) / lu  # meters along edge_u
        av = (rel @ self.edge_v) / lv
        parity = (
            np.floor(au / self.checker_square).astype(np.int64)
            + np.floor(av / self.checker_square).astype(np.int64)
        ) % 2
        out = np.where(parity[:, None] == 0, self.color, self.color2)
        return out.astype(np.uint8)

    def aabb(self, t: float):
        off = self.motion.offset_at(t) if self.motion else 0.0
        corners = np.stack(
            [
                self.origin,
                self.origin + self.edge_u,
                self.origin + self.edge_v,
                self.origin + self.edge_u + self.edge_v,
            ]
        ) + off
        return corners.min(axis=0), corners.max(axis=0)


Primitive = Box | Sphere | Rect
