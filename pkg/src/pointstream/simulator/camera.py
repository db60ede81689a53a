"""Ideal pinhole ray-cast renderer (flat shading, black background)."""

from __future__ import annotations

import numpy as np

from pointstream.projection import RgbImage, SensorModel, Z_NEAR
from pointstream.simulator.scene import (
    Scene,
    StaticCastCache,
    cast_rays,
    colors_for_hits,
)


def camera_ray_dirs(cam: SensorModel) -> np.ndarray:
    """Unit world-space ray directions through every pixel center (H*W, 3)."""
    intr = cam.intrinsics
    us, vs = np.meshgrid(np.arange(intr.width), np.arange(intr.height))
    x = (us.ravel() - intr.cx) / intr.fx
    y = (vs.ravel() - intr.cy) / intr.fy
    d_cam = np.column_stack([x, y, np.ones(x.size)])
    d_cam /= np.linalg.norm(d_cam, axis=1, keepdims=True)
    return d_cam @ cam.pose.rotation  # R^T applied row-wise: camera -> world


def camera_center(cam: SensorModel) -> np.ndarray:
    return cam.pose.inverse().translation


def camera_frame(scene: Scene, cam: SensorModel, t: float) -> RgbImage:
    """Render the scene at instant ``t`` (global shutter)."""
    intr = cam.intrinsics
    dirs = camera_ray_dirs(cam)
    origin = camera_center(cam)
    t_hit, prim_idx = cast_rays(scene, origin, dirs, float(t))
    img = np.zeros((intr.height * intr.width, 3), dtype=np.uint8)
    hit = np.isfinite(t_hit)
    if hit.any():
        pts = origin + t_hit[hit, None] * dirs[hit]
        img[hit] = colors_for_hits(scene, prim_idx[hit], pts, float(t))
    return RgbImage(img.reshape(intr.height, intr.width, 3))


class CameraRenderer:
    """camera_frame with static geometry rendered once and reused.

    Moving primitives are re-cast per frame, restricted to the screen
    bounds of their AABB corners (full frame if any corner sits behind
    the camera). Pixel-identical to :func:`camera_frame` except on exact
    inter-primitive depth ties.
    """

    _PAD = 2  # pixels around the projected bounds

    def __init__(self, scene: Scene, cam: SensorModel):
        self.scene = scene
        self.cam = cam
        intr = cam.intrinsics
        self._h, self._w = intr.height, intr.width
        self._origin = camera_center(cam)
        dirs = camera_ray_dirs(cam)
        self._dirs = dirs.reshape(self._h, self._w, 3)
        self._cache = StaticCastCache(scene, self._origin, dirs)
        t0, i0 = self._cache._t0, self._cache._i0
        img = np.zeros((self._h * self._w, 3), dtype=np.uint8)
        hit = np.isfinite(t0)
        if hit.any():
            pts = self._origin + t0[hit, None] * dirs[hit]
            img[hit] = colors_for_hits(scene, i0[hit], pts, 0.0)
        self._img0 = img.reshape(self._h, self._w, 3)
        self._tbuf0 = t0.reshape(self._h, self._w)

    def _screen_bounds(self, prim, t: float):
        lo, hi = prim.aabb(t)
        corners = np.array(
            [[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
             for z in (lo[2], hi[2])]
        )
        p_cam = self.cam.pose.apply(corners)
        if np.any(p_cam[:, 2] <= Z_NEAR):
            return 0, self._h, 0, self._w
        intr = self.cam.intrinsics
        u = intr.fx * p_cam[:, 0] / p_cam[:, 2] + intr.cx
        v = intr.fy * p_cam[:, 1] / p_cam[:, 2] + intr.cy
        c0 = max(0, int(np.floor(u.min())) - self._PAD)
        c1 = min(self._w, int(np.ceil(u.max())) + 1 + self._PAD)
        r0 = max(0, int(np.floor(v.min())) - self._PAD)
        r1 = min(self._h, int(np.ceil(v.max())) + 1 + self._PAD)
        return r0, r1, c0, c1

    def render(self, t: float) -> RgbImage:
        if not self._cache.moving:
            return RgbImage(self._img0.copy())
        img = self._img0.copy()
        tbuf = self._tbuf0.copy()
        for _, prim in self._cache.moving:
            r0, r1, c0, c1 = self._screen_bounds(prim, t)
            if r0 >= r1 or c0 >= c1:
                continue
            dirs = self._dirs[r0:r1, c0:c1].reshape(-1, 3)
            tm = prim.intersect(self._origin, dirs, float(t)).reshape(
                r1 - r0, c1 - c0
            )
            sub = tbuf[r0:r1, c0:c1]
            closer = tm < sub
            if not closer.any():
                continue
            flat_closer = closer.reshape(-1)
            pts = self._origin + tm[closer][:, None] * dirs[flat_closer]
            img[r0:r1, c0:c1][closer] = prim.color_at(pts, float(t))
            sub[closer] = tm[closer]
        return RgbImage(img)
