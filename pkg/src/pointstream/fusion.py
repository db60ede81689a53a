"""Scan-window flicker suppression and cross-sensor occlusion culling.

Fusion rule: static-labeled points are unioned across every scan in the
window, dynamic and unobserved points come from the newest scan only.
Taking dynamic geometry from the newest scan is what keeps moving
objects visible at frame rate; unobserved points (outside the camera
frustum) cannot be color-validated, so they follow the same rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from pointstream.core.cloud import PointCloud, concat_clouds
from pointstream.projection import (
    RgbImage,
    SensorModel,
    nearest_pixel,
    project_points,
)


@dataclass
class FusionParams:
    diff_threshold: int = 25       # 8-bit intensity units
    dilation_radius: int = 2       # pixels
    occlusion_margin: float = 0.10  # meters

    def __post_init__(self):
        if self.diff_threshold < 0:
            raise ValueError("diff_threshold must be >= 0")
        if self.dilation_radius < 0:
            raise ValueError("dilation_radius must be >= 0")
        if not (self.occlusion_margin > 0):
            raise ValueError("occlusion_margin must be > 0")


@dataclass
class MotionMask:
    data: np.ndarray  # (H, W) bool, True = dynamic

    def __post_init__(self):
        d = np.asarray(self.data, dtype=bool)
        if d.ndim != 2:
            raise ValueError("mask must be 2-D")
        self.data = d

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @staticmethod
    def all_static(height: int, width: int) -> "MotionMask":
        return MotionMask(np.zeros((height, width), dtype=bool))


@dataclass
class ScanEntry:
    cloud: PointCloud
    timestamp: float
    sensor_id: int


@dataclass
class ScanWindow:
    """Up to the three most recent scans, newest last, one per sensor."""

    entries: list[ScanEntry] = field(default_factory=list)
    capacity: int = 3

    def __post_init__(self):
        self._validate(self.entries)

    def _validate(self, entries):
        if len(entries) > self.capacity:
            raise ValueError(f"window holds at most {self.capacity} scans")
        times = [e.timestamp for e in entries]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("scan timestamps must be strictly increasing")
        sensors = [e.sensor_id for e in entries]
        if len(set(sensors)) != len(sensors):
            raise ValueError("at most one scan per sensor in a window")

    def push(self, entry: ScanEntry) -> None:
        """Append newest scan, evicting the oldest (or same-sensor) entry."""
        kept = [e for e in self.entries if e.sensor_id != entry.sensor_id]
        kept.append(entry)
        if len(kept) > self.capacity:
            kept = kept[-self.capacity:]
        self._validate(kept)
        self.entries = kept

    def __len__(self) -> int:
        return len(self.entries)


def _dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary dilation by a square structuring element (separable max)."""
    out = mask
    for axis in (0, 1):
        acc = out.copy()
        for s in range(1, radius + 1):
            if axis == 0:
                acc[s:, :] |= out[:-s, :]
                acc[:-s, :] |= out[s:, :]
            else:
                acc[:, s:] |= out[:, :-s]
                acc[:, :-s] |= out[:, s:]
        out = acc
    return out


def motion_mask(prev: RgbImage, curr: RgbImage, params: FusionParams) -> MotionMask:
    """Per-pixel dynamic labeling from an inter-frame color difference.

    A pixel is dynamic iff the max-channel absolute difference exceeds
    ``diff_threshold``; the raw mask is then dilated by a square element
    of ``dilation_radius`` pixels.
    """
    if prev.data.shape != curr.data.shape:
        raise ValueError("frame dimensions must match")
    # |a - b| without widening: max(a,b) - min(a,b) stays uint8
    diff = (
        np.maximum(curr.data, prev.data) - np.minimum(curr.data, prev.data)
    ).max(axis=2)
    raw = diff > params.diff_threshold
    return MotionMask(_dilate(raw, params.dilation_radius))


@dataclass
class PointClasses:
    static_ids: np.ndarray
    dynamic_ids: np.ndarray
    unobserved_ids: np.ndarray


def classify_points(scan: PointCloud, mask: MotionMask, cam: SensorModel) -> PointClasses:
    """Partition scan points into static / dynamic / unobserved.

    Dynamic: projects into a dynamic mask pixel. Static: projects into a
    static pixel. Unobserved: behind the camera or outside the frustum.
    """
    intr = cam.intrinsics
    if mask.width != intr.width or mask.height != intr.height:
        raise ValueError("mask dimensions must match camera intrinsics")
    ids = np.arange(len(scan), dtype=np.int64)
    if len(scan) == 0:
        return PointClasses(ids, ids.copy(), ids.copy())
    u, v, _, front = project_points(scan.positions, cam)
    col, row, inside = nearest_pixel(u, v, intr)
    observed = front & inside
    dyn = np.zeros(len(scan), dtype=bool)
    dyn[observed] = mask.data[row[observed], col[observed]]
    return PointClasses(
        static_ids=ids[observed & ~dyn],
        dynamic_ids=ids[observed & dyn],
        unobserved_ids=ids[~observed],
    )


def fuse_window(
    window: ScanWindow,
    masks: list[MotionMask],
    cams: SensorModel | Mapping[int, SensorModel],
) -> PointCloud:
    """Fuse a scan window into one flicker-free cloud.

    ``masks`` is parallel to ``window.entries`` (each scan's mask comes
    from its synchronized frame pair). ``cams`` is a single camera or a
    mapping from sensor_id; the rig shares one camera, the mapping form
    exists for multi-unit setups.
    """
    if len(window) == 0:
        raise ValueError("cannot fuse an empty window")
    if len(masks) != len(window):
        raise ValueError("need one mask per scan in the window")

    def cam_for(sensor_id: int) -> SensorModel:
        if isinstance(cams, Mapping):
            return cams[sensor_id]
        return cams

    parts = []
    newest = len(window.entries) - 1
    for i, (entry, mask) in enumerate(zip(window.entries, masks)):
        cls = classify_points(entry.cloud, mask, cam_for(entry.sensor_id))
        if i == newest:
            keep = np.sort(
                np.concatenate([cls.static_ids, cls.dynamic_ids, cls.unobserved_ids])
            )
        else:
            keep = cls.static_ids
        parts.append(entry.cloud.select(keep))
    return concat_clouds(parts)


def occlusion_keep_mask(cloud: PointCloud, cam: SensorModel, margin: float) -> np.ndarray:
    """True for points within ``margin`` of their pixel's nearest depth.

    Behind-camera and out-of-frustum points are False: they cannot be
    validated against the camera and would inherit wrong colors.
    """
    if not (margin > 0):
        raise ValueError("occlusion margin must be > 0")
    if len(cloud) == 0:
        return np.zeros(0, dtype=bool)
    intr = cam.intrinsics
    u, v, z, front = project_points(cloud.positions, cam)
    col, row, inside = nearest_pixel(u, v, intr)
    ok = front & inside
    keep = np.zeros(len(cloud), dtype=bool)
    if not ok.any():
        return keep
    # single projection pass: per-pixel minimum via sort, then compare
    flat = row[ok] * intr.width + col[ok]
    zv = z[ok]
    order = np.lexsort((zv, flat))
    fs = flat[order]
    first = np.ones(len(fs), dtype=bool)
    first[1:] = fs[1:] != fs[:-1]
    # propagate each pixel's minimum to all its points
    seg = np.cumsum(first) - 1
    per_point_min = zv[order][first][seg]
    keep_sorted = zv[order] <= per_point_min + margin
    ok_idx = np.nonzero(ok)[0]
    keep[ok_idx[order]] = keep_sorted
    return keep


def occlusion_cull(cloud: PointCloud, cam: SensorModel, margin: float) -> PointCloud:
    """Drop points hidden behind foreground surfaces as seen by ``cam``."""
    return cloud.select(occlusion_keep_mask(cloud, cam, margin))
