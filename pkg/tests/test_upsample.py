import math

import numpy as np
import pytest

from pointstream.core.cloud import PointCloud
from pointstream.projection import DepthImage, RgbImage
from pointstream.upsample import (
    BilateralParams,
    _accumulate_scatter,
    _accumulate_slices,
    joint_bilateral_upsample,
    densify_frame,
)

from oracles import gaussian_scatter_reference, jbu_reference


def _random_sparse(rng, h, w, coverage=0.1, lo=1.0, hi=8.0):
    d = np.zeros((h, w))
    mask = rng.random((h, w)) < coverage
    d[mask] = rng.uniform(lo, hi, int(mask.sum()))
    return d


def test_constant_depth_preserved(rng):
    h, w = 24, 32
    depth = np.full((h, w), 3.5)
    guide = RgbImage(rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8))
    out = joint_bilateral_upsample(DepthImage(depth), guide, BilateralParams(window_radius=3))
    assert np.abs(out.data - 3.5).max() < 1e-9


def test_all_invalid_stays_invalid(rng):
    h, w = 16, 16
    guide = RgbImage(rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8))
    out = joint_bilateral_upsample(
        DepthImage(np.zeros((h, w))), guide, BilateralParams(window_radius=2)
    )
    assert np.all(out.data == 0)


def test_edge_preserving_across_guide_step():
    h, w = 20, 30
    mid = w // 2
    depth = np.zeros((h, w))
    depth[:, 0:mid:2] = 2.0  # sparse samples left of the edge
    depth[:, mid::2] = 5.0
    guide_arr = np.zeros((h, w, 3), dtype=np.uint8)
    guide_arr[:, mid:] = 255
    params = BilateralParams(sigma_spatial=3.0, sigma_range=10.0, window_radius=4)
    out = joint_bilateral_upsample(DepthImage(depth), RgbImage(guide_arr), params)
    valid = out.data > 0
    left = out.data[:, :mid][valid[:, :mid]]
    right = out.data[:, mid:][valid[:, mid:]]
    assert np.abs(left - 2.0).max() < 1e-6
    assert np.abs(right - 5.0).max() < 1e-6


def test_matches_direct_summation_reference(rng):
    for trial in range(5):
        h, w = 20, 26
        depth = _random_sparse(rng, h, w, coverage=0.15)
        guide = rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)
        params = BilateralParams(
            sigma_spatial=float(rng.uniform(1.0, 4.0)),
            sigma_range=float(rng.uniform(5.0, 40.0)),
            window_radius=int(rng.integers(1, 5)),
            min_weight=1e-4,
        )
        out = joint_bilateral_upsample(DepthImage(depth), RgbImage(guide), params)
        ref = jbu_reference(
            depth, guide, params.sigma_spatial, params.sigma_range,
            params.window_radius, params.min_weight,
        )
        assert np.abs(out.data - ref).max() < 1e-6


def test_slice_and_scatter_paths_bit_identical(rng):
    h, w = 24, 30
    depth = _random_sparse(rng, h, w, coverage=0.4)
    guide = rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)
    params = BilateralParams(sigma_spatial=2.0, sigma_range=15.0, window_radius=3)
    valid = depth > 0
    guide_i = guide.astype(np.int64)
    from pointstream.upsample import _range_lut

    lut = _range_lut(params.sigma_range)
    inv = 1.0 / (2.0 * params.sigma_spatial**2)
    n1, d1 = np.zeros((h, w)), np.zeros((h, w))
    _accumulate_slices(n1, d1, depth, valid, guide_i, lut, inv, params.window_radius)
    n2, d2 = np.zeros((h, w)), np.zeros((h, w))
    _accumulate_scatter(n2, d2, depth, valid, guide_i, lut, inv, params.window_radius)
    assert np.array_equal(n1, n2)
    assert np.array_equal(d1, d2)


def test_convex_combination_bound(rng):
    h, w = 18, 22
    depth = _random_sparse(rng, h, w, coverage=0.2, lo=1.0, hi=9.0)
    guide = rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)
    r = 3
    out = joint_bilateral_upsample(
        DepthImage(depth), RgbImage(guide), BilateralParams(window_radius=r)
    ).data
    for y, x in zip(*np.nonzero(out > 0)):
        window = depth[max(0, y - r) : y + r + 1, max(0, x - r) : x + r + 1]
        vals = window[window > 0]
        assert vals.min() - 1e-9 <= out[y, x] <= vals.max() + 1e-9


def test_validity_monotone(rng):
    h, w = 16, 20
    depth = _random_sparse(rng, h, w, coverage=0.1)
    guide = RgbImage(rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8))
    params = BilateralParams(window_radius=3)
    before = joint_bilateral_upsample(DepthImage(depth), guide, params).data > 0
    d2 = depth.copy()
    empty = np.argwhere(depth == 0)
    y, x = empty[len(empty) // 2]
    d2[y, x] = 4.2
    after = joint_bilateral_upsample(DepthImage(d2), guide, params).data > 0
    assert np.all(after[before])  # adding a sample never invalidates a pixel


def test_infinite_sigma_range_equals_gaussian_scatter(rng):
    h, w = 16, 20
    depth = _random_sparse(rng, h, w, coverage=0.15)
    guide = RgbImage(rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8))
    params = BilateralParams(sigma_spatial=2.5, sigma_range=math.inf, window_radius=3)
    out = joint_bilateral_upsample(DepthImage(depth), guide, params).data
    ref = gaussian_scatter_reference(depth, 2.5, 3, params.min_weight)
    assert np.abs(out - ref).max() < 1e-9


def test_single_point_support_disk(identity_camera):
    intr = identity_camera.intrinsics
    r = 3
    cloud = PointCloud(np.array([[0.0, 0.0, 4.0]]))
    guide = RgbImage(np.zeros((intr.height, intr.width, 3), dtype=np.uint8))
    frame = densify_frame(
        cloud, guide, identity_camera, BilateralParams(window_radius=r)
    )
    valid = frame.depth.data > 0
    ys, xs = np.nonzero(valid)
    assert valid.any()
    assert np.all(np.abs(ys - intr.cy) <= r)
    assert np.all(np.abs(xs - intr.cx) <= r)


def test_densify_empty_cloud(identity_camera):
    intr = identity_camera.intrinsics
    guide = RgbImage(np.zeros((intr.height, intr.width, 3), dtype=np.uint8))
    frame = densify_frame(
        PointCloud.empty(), guide, identity_camera, BilateralParams(window_radius=2)
    )
    assert np.all(frame.depth.data == 0)


def test_densify_plane_every_4th_pixel(identity_camera):
    intr = identity_camera.intrinsics
    z_plane = 4.0
    cols, rows = np.meshgrid(np.arange(0, intr.width, 4), np.arange(0, intr.height, 4))
    cols, rows = cols.ravel(), rows.ravel()
    pts = np.column_stack(
        [
            (cols - intr.cx) / intr.fx * z_plane,
            (rows - intr.cy) / intr.fy * z_plane,
            np.full(cols.size, z_plane),
        ]
    )
    guide = RgbImage(np.full((intr.height, intr.width, 3), 128, dtype=np.uint8))
    frame = densify_frame(
        PointCloud(pts), guide, identity_camera, BilateralParams()
    )
    valid = frame.depth.data > 0
    assert valid.mean() >= 0.99
    assert np.abs(frame.depth.data[valid] - z_plane).max() < 0.01


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        joint_bilateral_upsample(
            DepthImage(np.zeros((4, 4))),
            RgbImage(np.zeros((5, 4, 3), dtype=np.uint8)),
            BilateralParams(),
        )


def test_params_validation():
    with pytest.raises(ValueError):
        BilateralParams(sigma_spatial=0.0)
    with pytest.raises(ValueError):
        BilateralParams(window_radius=0)
