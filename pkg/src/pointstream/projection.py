"""Pinhole camera model: project, colorize, back-project, z-buffer.

Camera frame: right-handed, z forward, x right, y down. Pixel (u, v) has
its center at integer coordinates; u runs along width. Nearest-pixel
lookup rounds half away from the origin (floor(x + 0.5)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pointstream.core.cloud import PointCloud
from pointstream.core.geometry import Pose, rot_y, rot_z

Z_NEAR = 1e-6  # meters; points at or behind this camera depth are "behind"


@dataclass
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass
class SensorModel:
    """Camera intrinsics plus world->camera pose."""

    intrinsics: CameraIntrinsics
    pose: Pose


@dataclass
class RgbImage:
    data: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 3 or d.shape[2] != 3:
            raise ValueError(f"rgb data must be (H, W, 3), got {d.shape}")
        self.data = d.astype(np.uint8) if d.dtype != np.uint8 else d

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass
class DepthImage:
    data: np.ndarray  # (H, W) float64 meters, 0 = invalid / no return

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2:
            raise ValueError(f"depth data must be (H, W), got {d.shape}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("depth values must be finite and >= 0")
        self.data = d

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def valid_mask(self) -> np.ndarray:
        return self.data > 0


def camera_pose(position, yaw_deg: float = 0.0, pitch_deg: float = 0.0) -> Pose:
    """World->camera pose for a camera at ``position`` in a z-up world.

    yaw 0 looks along +x; positive pitch tilts the view up.
    """
    # camera axes in world coordinates for yaw=0, pitch=0
    base = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])
    r_wc = base @ rot_y(-pitch_deg).T @ rot_z(yaw_deg).T
    pos = np.asarray(position, dtype=np.float64)
    return Pose(r_wc, -(r_wc @ pos))


def project_points(points, cam: SensorModel):
    """Vectorized pinhole projection.

    Returns (u, v, z, in_front); u/v are real pixel coordinates, only
    meaningful where ``in_front`` (z > Z_NEAR) holds.
    """
    intr = cam.intrinsics
    p_cam = cam.pose.apply(np.asarray(points, dtype=np.float64).reshape(-1, 3))
    z = p_cam[:, 2]
    in_front = z > Z_NEAR
    zs = np.where(in_front, z, 1.0)
    u = intr.fx * p_cam[:, 0] / zs + intr.cx
    v = intr.fy * p_cam[:, 1] / zs + intr.cy
    return u, v, z, in_front


def project_point(point, cam: SensorModel):
    """Single-point projection; returns (u, v, z) or None when behind camera."""
    u, v, z, ok = project_points(np.asarray(point).reshape(1, 3), cam)
    if not ok[0]:
        return None
    return float(u[0]), float(v[0]), float(z[0])


def nearest_pixel(u, v, intr: CameraIntrinsics):
    """Round projection to pixel indices; returns (col, row, inside)."""
    col = np.floor(np.asarray(u) + 0.5).astype(np.int64)
    row = np.floor(np.asarray(v) + 0.5).astype(np.int64)
    inside = (col >= 0) & (col < intr.width) & (row >= 0) & (row < intr.height)
    return col, row, inside


def render_zbuffer(cloud: PointCloud, cam: SensorModel) -> DepthImage:
    """Nearest-point splat with a 1-pixel footprint; empty pixels stay 0."""
    intr = cam.intrinsics
    zb = np.zeros((intr.height, intr.width))
    if len(cloud) == 0:
        return DepthImage(zb)
    u, v, z, front = project_points(cloud.positions, cam)
    col, row, inside = nearest_pixel(u, v, intr)
    ok = front & inside
    if not ok.any():
        return DepthImage(zb)
    flat = row[ok] * intr.width + col[ok]
    zv = z[ok]
    order = np.lexsort((zv, flat))
    fs = flat[order]
    first = np.ones(len(fs), dtype=bool)
    first[1:] = fs[1:] != fs[:-1]
    zb.reshape(-1)[fs[first]] = zv[order][first]
    return DepthImage(zb)


def colorize(cloud: PointCloud, rgb: RgbImage, cam: SensorModel):
    """Assign each point the color of its nearest pixel.

    Returns (cloud_with_colors, colored_mask). Points behind the camera
    or outside the frustum keep color (0,0,0) and are flagged False in
    the mask; consumers that need color must filter on the mask.
    """
    intr = cam.intrinsics
    if rgb.width != intr.width or rgb.height != intr.height:
        raise ValueError(
            f"rgb size {rgb.width}x{rgb.height} does not match camera "
            f"{intr.width}x{intr.height}"
        )
    u, v, _, front = project_points(cloud.positions, cam)
    col, row, inside = nearest_pixel(u, v, intr)
    ok = front & inside
    colors = np.zeros((len(cloud), 3), dtype=np.uint8)
    colors[ok] = rgb.data[row[ok], col[ok]]
    return cloud.with_colors(colors), ok


def backproject(depth: DepthImage, rgb: RgbImage | None, cam: SensorModel) -> PointCloud:
    """Lift every valid depth pixel to a world-space point."""
    intr = cam.intrinsics
    if depth.width != intr.width or depth.height != intr.height:
        raise ValueError("depth size does not match camera intrinsics")
    if rgb is not None and (rgb.width != intr.width or rgb.height != intr.height):
        raise ValueError("rgb size does not match camera intrinsics")
    vs, us = np.nonzero(depth.data > 0)
    if len(vs) == 0:
        return PointCloud.empty()
    z = depth.data[vs, us]
    x = (us - intr.cx) / intr.fx * z
    y = (vs - intr.cy) / intr.fy * z
    p_cam = np.column_stack([x, y, z])
    world = cam.pose.inverse().apply(p_cam)
    colors = rgb.data[vs, us] if rgb is not None else None
    return PointCloud(world, colors)
