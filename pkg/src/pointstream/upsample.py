"""RGB-guided joint bilateral upsampling of sparse depth.

For each output pixel p:

    D(p) = sum_q ws(|p-q|) * wr(|I(p)-I(q)|) * V(q) * D(q)
           ------------------------------------------------
           sum_q ws(|p-q|) * wr(|I(p)-I(q)|) * V(q)

over the square window q in p + [-r, r]^2, with Gaussian spatial and
range kernels and V the validity indicator. Pixels whose weight sum
falls below ``min_weight`` stay invalid (0) rather than extrapolating.

Two execution strategies are used depending on input density: a dense
shifted-slice accumulation and a sparse scatter over valid samples.
Both sum the same terms in the same window-offset order, so the result
is bit-identical regardless of which one runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pointstream.core.cloud import PointCloud
from pointstream.projection import DepthImage, RgbImage, SensorModel, render_zbuffer

# guide colors are 8-bit, so squared color distances are integers in
# [0, 3*255^2]; the range kernel is a lookup over that domain
_LUT_SIZE = 3 * 255 * 255 + 1
_range_lut_cache: dict[float, np.ndarray] = {}

_SCATTER_COVERAGE = 0.25  # below this valid-pixel fraction, scatter wins


@dataclass
class BilateralParams:
    sigma_spatial: float = 4.0    # pixels
    sigma_range: float = 20.0     # 8-bit intensity units; inf disables the guide
    window_radius: int = 8        # pixels
    min_weight: float = 1e-4

    def __post_init__(self):
        if not (self.sigma_spatial > 0):
            raise ValueError("sigma_spatial must be > 0")
        if not (self.sigma_range > 0):
            raise ValueError("sigma_range must be > 0")
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.min_weight < 0:
            raise ValueError("min_weight must be >= 0")


def _range_lut(sigma_range: float) -> np.ndarray:
    lut = _range_lut_cache.get(sigma_range)
    if lut is None:
        if np.isinf(sigma_range):
            lut = np.ones(_LUT_SIZE)
        else:
            lut = np.exp(-np.arange(_LUT_SIZE, dtype=np.float64) / (2.0 * sigma_range**2))
        if len(_range_lut_cache) > 16:
            _range_lut_cache.clear()
        _range_lut_cache[sigma_range] = lut
    return lut


def _offsets(radius: int):
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            yield dy, dx


def joint_bilateral_upsample(
    sparse: DepthImage, guide: RgbImage, params: BilateralParams
) -> DepthImage:
    if sparse.width != guide.width or sparse.height != guide.height:
        raise ValueError("sparse depth and guide dimensions must match")
    h, w = sparse.height, sparse.width
    depth = sparse.data
    valid = depth > 0
    n_valid = int(valid.sum())
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    if n_valid:
        guide_i = guide.data.astype(np.int32)
        lut = _range_lut(params.sigma_range)
        inv_2s2 = 1.0 / (2.0 * params.sigma_spatial**2)
        r = params.window_radius
        if n_valid < _SCATTER_COVERAGE * h * w:
            _accumulate_scatter(num, den, depth, valid, guide_i, lut, inv_2s2, r)
        else:
            _accumulate_slices(num, den, depth, valid, guide_i, lut, inv_2s2, r)
    ok = (den >= params.min_weight) & (den > 0)
    out = np.zeros((h, w))
    out[ok] = num[ok] / den[ok]
    return DepthImage(out)


def _accumulate_slices(num, den, depth, valid, guide_i, lut, inv_2s2, r):
    h, w = depth.shape
    vd = np.where(valid, depth, 0.0)
    vf = valid.astype(np.float64)
    for dy, dx in _offsets(r):
        ws = np.exp(-(dy * dy + dx * dx) * inv_2s2)
        ty0, ty1 = max(0, -dy), h - max(0, dy)
        tx0, tx1 = max(0, -dx), w - max(0, dx)
        if ty0 >= ty1 or tx0 >= tx1:
            continue
        sy0, sy1 = ty0 + dy, ty1 + dy
        sx0, sx1 = tx0 + dx, tx1 + dx
        dg = guide_i[sy0:sy1, sx0:sx1] - guide_i[ty0:ty1, tx0:tx1]
        d2 = np.einsum("ijk,ijk->ij", dg, dg)
        wgt = ws * lut[d2] * vf[sy0:sy1, sx0:sx1]
        num[ty0:ty1, tx0:tx1] += wgt * vd[sy0:sy1, sx0:sx1]
        den[ty0:ty1, tx0:tx1] += wgt
    return num, den


def _accumulate_scatter(num, den, depth, valid, guide_i, lut, inv_2s2, r):
    h, w = depth.shape
    sy, sx = np.nonzero(valid)
    n = len(sy)
    sd = depth[sy, sx]
    sg = guide_i[sy, sx]
    gflat = guide_i.reshape(-1, 3)
    offs = np.array(list(_offsets(r)), dtype=np.int64)  # (K, 2), row-major
    ws = np.exp(-(offs[:, 0] ** 2 + offs[:, 1] ** 2) * inv_2s2)
    ty = sy[None, :] - offs[:, 0:1]  # (K, n)
    tx = sx[None, :] - offs[:, 1:2]
    oi, si = np.nonzero((ty >= 0) & (ty < h) & (tx >= 0) & (tx < w))
    tgt = (sy[si] - offs[oi, 0]) * w + (sx[si] - offs[oi, 1])
    dg = sg[si] - gflat[tgt]
    d2 = dg[:, 0] * dg[:, 0] + dg[:, 1] * dg[:, 1] + dg[:, 2] * dg[:, 2]
    wgt = ws[oi] * lut[d2]
    # each target sees at most one sample per offset and pairs are laid
    # out offset-major, so one bincount accumulates per-target terms in
    # exactly the window-offset order of the dense path
    num.reshape(-1)[:] += np.bincount(tgt, weights=wgt * sd[si], minlength=h * w)
    den.reshape(-1)[:] += np.bincount(tgt, weights=wgt, minlength=h * w)
    return num, den


def densify_frame(
    cloud: PointCloud,
    rgb: RgbImage,
    cam: SensorModel,
    params: BilateralParams,
    *,
    capture_ts_ns: int | None = None,
    camera_id: int = 0,
    frame_seq: int = 0,
):
    """Project a cloud, densify its depth and bundle an RGB-D frame."""
    from pointstream.stream.frame import RgbdFrame

    intr = cam.intrinsics
    if rgb.width != intr.width or rgb.height != intr.height:
        raise ValueError("rgb size does not match camera intrinsics")
    sparse = render_zbuffer(cloud, cam)
    dense = joint_bilateral_upsample(sparse, rgb, params)
    if capture_ts_ns is None:
        if cloud.timestamp_ns is not None and len(cloud) > 0:
            capture_ts_ns = int(cloud.timestamp_ns.max())
        else:
            capture_ts_ns = 0
    return RgbdFrame(
        rgb=rgb,
        depth=dense,
        capture_ts_ns=capture_ts_ns,
        camera_id=camera_id,
        frame_seq=frame_seq,
    )
