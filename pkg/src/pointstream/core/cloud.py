"""Point cloud container shared by every geometry stage."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from pointstream.core.geometry import Pose


@dataclass
class PointCloud:
    """Positions plus optional per-point color / provenance attributes.

    ``positions`` is (N, 3) float64 in meters. Optional arrays are
    parallel to it: ``colors`` (N, 3) uint8 sRGB, ``sensor_id`` (N,)
    int32 rig-member ids, ``timestamp_ns`` (N,) int64 capture times.
    Arrays are treated as immutable once handed to a cloud.
    """

    positions: np.ndarray
    colors: np.ndarray | None = None
    sensor_id: np.ndarray | None = None
    timestamp_ns: np.ndarray | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.size == 0:
            pos = pos.reshape(0, 3)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must be (N, 3), got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite (no NaN/Inf)")
        self.positions = pos
        n = len(pos)
        if self.colors is not None:
            col = np.asarray(self.colors)
            if col.shape != (n, 3):
                raise ValueError(f"colors must be ({n}, 3), got {col.shape}")
            if col.dtype != np.uint8:
                if np.any(col < 0) or np.any(col > 255):
                    raise ValueError("color channels must lie in [0, 255]")
                col = col.astype(np.uint8)
            self.colors = col
        if self.sensor_id is not None:
            sid = np.asarray(self.sensor_id, dtype=np.int32).reshape(-1)
            if len(sid) != n:
                raise ValueError("sensor_id length mismatch")
            self.sensor_id = sid
        if self.timestamp_ns is not None:
            ts = np.asarray(self.timestamp_ns, dtype=np.int64).reshape(-1)
            if len(ts) != n:
                raise ValueError("timestamp_ns length mismatch")
            self.timestamp_ns = ts

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def has_colors(self) -> bool:
        return self.colors is not None

    @staticmethod
    def empty() -> "PointCloud":
        return PointCloud(np.zeros((0, 3)))

    def select(self, ids) -> "PointCloud":
        """Subset cloud by point ids / boolean mask, keeping all attributes."""
        return PointCloud(
            self.positions[ids],
            None if self.colors is None else self.colors[ids],
            None if self.sensor_id is None else self.sensor_id[ids],
            None if self.timestamp_ns is None else self.timestamp_ns[ids],
        )

    def with_colors(self, colors) -> "PointCloud":
        return replace(self, colors=colors)


def transform(cloud: PointCloud, pose: Pose) -> PointCloud:
    """Apply a rigid transform to every point; other attributes pass through."""
    return replace(cloud, positions=pose.apply(cloud.positions))


def concat_clouds(clouds) -> PointCloud:
    """Concatenate clouds in order.

    An optional attribute is present in the result only when present in
    every input.
    """
    clouds = list(clouds)
    if not clouds:
        return PointCloud.empty()
    pos = np.concatenate([c.positions for c in clouds])

    def _cat(field):
        parts = [getattr(c, field) for c in clouds]
        if any(p is None for p in parts):
            return None
        return np.concatenate(parts)

    return PointCloud(pos, _cat("colors"), _cat("sensor_id"), _cat("timestamp_ns"))
