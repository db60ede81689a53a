"""Uniform voxel-hash spatial index, cell size = query radius.

The index answers the single-radius workload of the overlap search: a
radius query only ever needs the 27 cells around the query point, so a
flat sorted table of hashed cell keys beats a tree here. Hash collisions
merely add candidates that the exact distance filter discards, so
results are identical to a brute-force scan.
"""

from __future__ import annotations

import numpy as np

_HA = np.uint64(0x9E3779B185EBCA87)
_HB = np.uint64(0xC2B2AE3D27D4EB4F)
_HC = np.uint64(0x165667B19E3779F9)

# cell coordinates must stay well inside int64 for floor() to be exact
_MAX_CELL = 2.0**62


def _as_positions(cloud_or_points) -> np.ndarray:
    pts = getattr(cloud_or_points, "positions", cloud_or_points)
    pts = np.asarray(pts, dtype=np.float64)
    if pts.size == 0:
        return pts.reshape(0, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must be (N, 3), got {pts.shape}")
    return pts


def _cells(points: np.ndarray, radius: float) -> np.ndarray:
    scaled = points / radius
    if scaled.size and np.abs(scaled).max() >= _MAX_CELL:
        raise ValueError("cloud extent too large for this cell size")
    return np.floor(scaled).astype(np.int64)


def _keys(cells: np.ndarray) -> np.ndarray:
    c = cells.astype(np.uint64)
    return (c[..., 0] * _HA) ^ (c[..., 1] * _HB) ^ (c[..., 2] * _HC)


# 3x3x3 neighborhood offsets, fixed order.
_OFFSETS = np.array(
    [[dx, dy, dz] for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)],
    dtype=np.int64,
)


class NeighborIndex:
    """Immutable after construction; safe for concurrent queries."""

    def __init__(self, cloud_or_points, radius: float):
        if not (radius > 0.0):
            raise ValueError(f"radius must be > 0, got {radius}")
        self.radius = float(radius)
        self._points = _as_positions(cloud_or_points)
        if len(self._points) == 0:
            self._sorted_keys = np.empty(0, dtype=np.uint64)
            self._order = np.empty(0, dtype=np.int64)
            return
        keys = _keys(_cells(self._points, self.radius))
        self._order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[self._order]

    def query_radius(self, point) -> np.ndarray:
        """Ids of all points within ``radius`` of ``point`` (inclusive), sorted."""
        if len(self._points) == 0:
            return np.empty(0, dtype=np.int64)
        p = np.asarray(point, dtype=np.float64).reshape(3)
        cell = _cells(p.reshape(1, 3), self.radius)[0]
        keys = _keys(cell + _OFFSETS)
        found = []
        for key in np.unique(keys):  # dedup hash-colliding neighbor cells
            lo = np.searchsorted(self._sorted_keys, key, side="left")
            hi = np.searchsorted(self._sorted_keys, key, side="right")
            if hi > lo:
                found.append(self._order[lo:hi])
        if not found:
            return np.empty(0, dtype=np.int64)
        cand = np.concatenate(found)
        d2 = np.sum((self._points[cand] - p) ** 2, axis=1)
        return np.sort(cand[d2 <= self.radius * self.radius])

    def nearest_within(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Nearest indexed point within ``radius`` for each query point.

        Returns (ids, distances); id -1 and distance inf where no indexed
        point lies within the radius. Ties break to the smallest id.
        """
        q = _as_positions(points)
        m = len(q)
        best_d2 = np.full(m, np.inf)
        best_id = np.full(m, -1, dtype=np.int64)
        if m == 0 or len(self._points) == 0:
            return best_id, np.sqrt(best_d2)
        r2 = self.radius * self.radius
        qcells = _cells(q, self.radius)
        qrows_all = np.arange(m, dtype=np.int64)
        for off in _OFFSETS:
            keys = _keys(qcells + off)
            lo = np.searchsorted(self._sorted_keys, keys, side="left")
            hi = np.searchsorted(self._sorted_keys, keys, side="right")
            counts = hi - lo
            total = int(counts.sum())
            if total == 0:
                continue
            cum = np.concatenate(([0], np.cumsum(counts)[:-1]))
            flat = np.arange(total, dtype=np.int64) + np.repeat(lo - cum, counts)
            cand = self._order[flat]
            qrows = np.repeat(qrows_all, counts)
            diff = self._points[cand] - q[qrows]
            d2 = np.einsum("ij,ij->i", diff, diff)
            keep = d2 <= r2
            if not keep.any():
                continue
            cand, qrows, d2 = cand[keep], qrows[keep], d2[keep]
            # per-query min for this cell offset; ties to smallest id
            srt = np.lexsort((cand, d2, qrows))
            qs = qrows[srt]
            first = np.ones(len(qs), dtype=bool)
            first[1:] = qs[1:] != qs[:-1]
            qf, df, cf = qs[first], d2[srt][first], cand[srt][first]
            upd = (df < best_d2[qf]) | ((df == best_d2[qf]) & (cf < best_id[qf]))
            tgt = qf[upd]
            best_d2[tgt] = df[upd]
            best_id[tgt] = cf[upd]
        return best_id, np.sqrt(best_d2)


def build_index(cloud_or_points, radius: float) -> NeighborIndex:
    return NeighborIndex(cloud_or_points, radius)
