"""Adaptive recoloring of a static cloud toward live dynamic colors.

Statistics are trusted only on overlap pairs (nearest dynamic neighbor
within a threshold distance of each static point); the global per-channel
CIELAB moment transfer is blended with per-cluster transfers computed on
a positional k-means partition of the static cloud.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pointstream.core.cloud import PointCloud
from pointstream.core.color import lab_to_srgb, srgb_to_lab
from pointstream.core.neighbors import NeighborIndex

STD_FLOOR = 1e-6  # below this, a channel is monochrome: pure mean shift


class InsufficientOverlapError(ValueError):
    def __init__(self, pair_count: int, required: int):
        super().__init__(
            f"insufficient overlap: {pair_count} pairs, need >= {required}"
        )
        self.pair_count = pair_count
        self.required = required


class InsufficientSamplesError(ValueError):
    pass


@dataclass
class ChannelStats:
    """Population mean/std per CIELAB channel, order (L, a, b)."""

    mean: np.ndarray
    std: np.ndarray


@dataclass
class TransferParams:
    overlap_threshold: float = 0.15  # meters
    clusters: int = 16
    alpha: float = 0.5               # blend weight of the local correction
    min_pairs: int = 100
    kmeans_seed: int = 0
    kmeans_max_iter: int = 50

    def __post_init__(self):
        if not (self.overlap_threshold > 0):
            raise ValueError("overlap_threshold must be > 0")
        if self.clusters < 1:
            raise ValueError("clusters must be >= 1")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must lie in [0, 1]")
        if self.min_pairs < 1:
            raise ValueError("min_pairs must be >= 1")
        if self.kmeans_max_iter < 1:
            raise ValueError("kmeans_max_iter must be >= 1")


@dataclass
class OverlapPairs:
    """One pair per matched static point: its nearest dynamic neighbor."""

    static_ids: np.ndarray
    dynamic_ids: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.static_ids)


def find_overlap_pairs(
    static: PointCloud,
    dynamic: PointCloud,
    threshold: float,
    *,
    dynamic_exclude: np.ndarray | None = None,
) -> OverlapPairs:
    """Nearest dynamic neighbor within ``threshold`` for each static point.

    ``dynamic_exclude`` marks dynamic points (e.g. ones labeled moving by
    the fusion stage) that must not participate in pairing.
    """
    if not static.has_colors or not dynamic.has_colors:
        raise ValueError("both clouds must carry colors")
    if not (threshold > 0):
        raise ValueError("overlap threshold must be > 0")
    dyn_pos = dynamic.positions
    id_map = None
    if dynamic_exclude is not None:
        keep = ~np.asarray(dynamic_exclude, dtype=bool)
        id_map = np.nonzero(keep)[0]
        dyn_pos = dyn_pos[keep]
    if len(dyn_pos) == 0 or len(static) == 0:
        e = np.empty(0, dtype=np.int64)
        return OverlapPairs(e, e.copy(), np.empty(0))
    index = NeighborIndex(dyn_pos, threshold)
    nn, dist = index.nearest_within(static.positions)
    hit = nn >= 0
    static_ids = np.nonzero(hit)[0].astype(np.int64)
    dyn_ids = nn[hit]
    if id_map is not None:
        dyn_ids = id_map[dyn_ids]
    return OverlapPairs(static_ids, dyn_ids, dist[hit])


def _population_stats(lab: np.ndarray) -> ChannelStats:
    return ChannelStats(mean=lab.mean(axis=0), std=lab.std(axis=0))


def lab_stats(cloud: PointCloud, ids) -> ChannelStats:
    """Population mean/std per Lab channel over the selected points."""
    if not cloud.has_colors:
        raise ValueError("cloud must carry colors")
    ids = np.asarray(ids, dtype=np.int64)
    if len(ids) == 0:
        raise InsufficientSamplesError("lab_stats needs at least one point")
    return _population_stats(srgb_to_lab(cloud.colors[ids]))


def global_transfer(lab: np.ndarray, src: ChannelStats, dst: ChannelStats) -> np.ndarray:
    """Per-channel affine map taking src moments onto dst moments.

    c' = (c - mean_src) * (std_dst / std_src) + mean_dst, with the scale
    defined as 1 (pure mean shift) for channels whose source std is at or
    below STD_FLOOR.
    """
    scale = np.where(src.std > STD_FLOOR, dst.std / np.maximum(src.std, STD_FLOOR), 1.0)
    return (np.asarray(lab, dtype=np.float64) - src.mean) * scale + dst.mean


def kmeans(points: np.ndarray, k: int, seed: int, max_iter: int):
    """Lloyd's algorithm on 3-D positions with k-means++ seeding.

    Deterministic for a fixed seed. Empty clusters are re-seeded from the
    point farthest from its assigned center. Returns (labels, centers).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k = {k} exceeds point count {n}")
    rng = np.random.default_rng(seed)

    centers = np.empty((k, 3))
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[j] = pts[idx]
        d2 = np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        dist = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = dist.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        assigned_d2 = dist[np.arange(n), labels]
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = pts[members].mean(axis=0)
            else:
                far = int(assigned_d2.argmax())
                centers[j] = pts[far]
                labels[far] = j
                assigned_d2[far] = 0.0
    return labels, centers


def cluster_static(static: PointCloud, k: int, seed: int, max_iter: int) -> np.ndarray:
    labels, _ = kmeans(static.positions, k, seed, max_iter)
    return labels


@dataclass
class TransferReport:
    pair_count: int
    src_stats: ChannelStats
    dst_stats: ChannelStats
    cluster_labels: np.ndarray
    cluster_pair_counts: np.ndarray
    cluster_src_stats: list[ChannelStats | None]
    cluster_dst_stats: list[ChannelStats | None]
    out_lab: np.ndarray  # pre-quantization transferred Lab colors
    stats_before: ChannelStats | None = None
    stats_after: ChannelStats | None = None


def transfer_colors_lab(
    static_positions: np.ndarray,
    static_lab: np.ndarray,
    dynamic_lab_pairs_src,
    pairs: OverlapPairs,
    params: TransferParams,
):
    """Core transfer on Lab arrays; quantization-free.

    ``dynamic_lab_pairs_src`` holds the Lab colors of the dynamic members
    of ``pairs`` (parallel to the pair list). Returns (out_lab, report).
    """
    if len(pairs) < params.min_pairs:
        raise InsufficientOverlapError(len(pairs), params.min_pairs)
    static_lab = np.asarray(static_lab, dtype=np.float64)
    dyn_lab = np.asarray(dynamic_lab_pairs_src, dtype=np.float64)
    src = _population_stats(static_lab[pairs.static_ids])
    dst = _population_stats(dyn_lab)
    c_glob = global_transfer(static_lab, src, dst)

    k = params.clusters
    labels, _ = kmeans(static_positions, k, params.kmeans_seed, params.kmeans_max_iter)
    pair_labels = labels[pairs.static_ids]

    c_loc = c_glob.copy()
    counts = np.zeros(k, dtype=np.int64)
    src_list: list[ChannelStats | None] = [None] * k
    dst_list: list[ChannelStats | None] = [None] * k
    for j in range(k):
        sel = pair_labels == j
        counts[j] = int(sel.sum())
        if counts[j] >= params.min_pairs:
            src_j = _population_stats(static_lab[pairs.static_ids[sel]])
            dst_j = _population_stats(dyn_lab[sel])
            src_list[j] = src_j
            dst_list[j] = dst_j
            members = labels == j
            c_loc[members] = global_transfer(static_lab[members], src_j, dst_j)

    out_lab = params.alpha * c_loc + (1.0 - params.alpha) * c_glob
    report = TransferReport(
        pair_count=len(pairs),
        src_stats=src,
        dst_stats=dst,
        cluster_labels=labels,
        cluster_pair_counts=counts,
        cluster_src_stats=src_list,
        cluster_dst_stats=dst_list,
        out_lab=out_lab,
    )
    return out_lab, report


def transfer_colors(
    static: PointCloud,
    dynamic: PointCloud,
    params: TransferParams,
    *,
    dynamic_exclude: np.ndarray | None = None,
    static_lab: np.ndarray | None = None,
):
    """Recolor ``static`` toward the illumination of ``dynamic``.

    Returns (recolored cloud, TransferReport). Geometry and provenance
    are unchanged; only colors move. ``static_lab`` optionally overrides
    the static colors with exact Lab values (chained recoloring without
    quantization loss); the report always carries the pre-quantization
    Lab result in ``out_lab``.
    """
    if not static.has_colors or not dynamic.has_colors:
        raise ValueError("both clouds must carry colors")
    pairs = find_overlap_pairs(
        static, dynamic, params.overlap_threshold, dynamic_exclude=dynamic_exclude
    )
    if static_lab is None:
        static_lab = srgb_to_lab(static.colors)
    else:
        static_lab = np.asarray(static_lab, dtype=np.float64)
        if static_lab.shape != (len(static), 3):
            raise ValueError("static_lab must be (N, 3)")
    if len(pairs) < params.min_pairs:
        raise InsufficientOverlapError(len(pairs), params.min_pairs)
    dyn_pair_lab = srgb_to_lab(dynamic.colors[pairs.dynamic_ids])
    out_lab, report = transfer_colors_lab(
        static.positions, static_lab, dyn_pair_lab, pairs, params
    )
    report.stats_before = _population_stats(static_lab[pairs.static_ids])
    report.stats_after = _population_stats(out_lab[pairs.static_ids])
    return static.with_colors(lab_to_srgb(out_lab)), report
