import numpy as np
import pytest

from pointstream.core.cloud import PointCloud
from pointstream.core.geometry import Pose
from pointstream.projection import (
    CameraIntrinsics,
    DepthImage,
    RgbImage,
    SensorModel,
    backproject,
    camera_pose,
    colorize,
    nearest_pixel,
    project_point,
    project_points,
    render_zbuffer,
)

from oracles import pixel_of, project_scalar, zbuffer_brute


def test_optical_axis_hits_principal_point(identity_camera):
    u, v, z = project_point([0.0, 0.0, 5.0], identity_camera)
    intr = identity_camera.intrinsics
    assert (u, v, z) == (intr.cx, intr.cy, 5.0)


def test_pinhole_arithmetic():
    intr = CameraIntrinsics(fx=100.0, fy=100.0, cx=320.0, cy=240.0, width=640, height=480)
    cam = SensorModel(intr, Pose.identity())
    u, v, z = project_point([1.0, 0.0, 1.0], cam)
    assert u == 420.0  # u = fx*x/z + cx = 100*1/1 + 320
    assert v == 240.0
    assert z == 1.0


def test_behind_camera_marker(identity_camera):
    assert project_point([0.0, 0.0, -1.0], identity_camera) is None


def test_camera_pose_convention():
    # camera at origin looking along +x in a z-up world
    cam_pose = camera_pose((0.0, 0.0, 0.0))
    p_cam = cam_pose.apply(np.array([5.0, 0.0, 0.0]))
    assert np.allclose(p_cam, [0.0, 0.0, 5.0])  # ahead -> +z
    p_cam = cam_pose.apply(np.array([5.0, 0.0, 1.0]))
    assert p_cam[1] < 0  # up in world -> -y (image up)


def test_zbuffer_empty_cloud(identity_camera):
    z = render_zbuffer(PointCloud.empty(), identity_camera)
    assert np.all(z.data == 0)


def test_zbuffer_min_rule(identity_camera):
    cloud = PointCloud(np.array([[0.0, 0.0, 2.0], [0.0, 0.0, 5.0]]))
    z = render_zbuffer(cloud, identity_camera)
    intr = identity_camera.intrinsics
    assert z.data[int(intr.cy), int(intr.cx)] == 2.0


def test_zbuffer_matches_brute_force(rng, small_camera):
    pts = np.column_stack(
        [
            rng.uniform(0.5, 10.0, 10_000),   # ahead of the camera (+x world)
            rng.uniform(-4.0, 4.0, 10_000),
            rng.uniform(-3.0, 3.0, 10_000),
        ]
    )
    cloud = PointCloud(pts)
    z = render_zbuffer(cloud, small_camera)
    want = zbuffer_brute(pts, small_camera)
    got = {
        (r, c): z.data[r, c]
        for r, c in zip(*np.nonzero(z.data > 0))
    }
    assert got.keys() == want.keys()
    for key in want:
        assert got[key] == want[key]


def test_zbuffer_permutation_invariant(rng, small_camera):
    pts = np.column_stack(
        [rng.uniform(1, 8, 500), rng.uniform(-2, 2, 500), rng.uniform(-2, 2, 500)]
    )
    z1 = render_zbuffer(PointCloud(pts), small_camera)
    z2 = render_zbuffer(PointCloud(pts[rng.permutation(500)]), small_camera)
    assert np.array_equal(z1.data, z2.data)


def test_colorize_uniform_image(identity_camera):
    intr = identity_camera.intrinsics
    img = RgbImage(np.full((intr.height, intr.width, 3), [255, 0, 0], dtype=np.uint8))
    cloud = PointCloud(np.array([[0.0, 0.0, 3.0], [0.1, -0.05, 5.0]]))
    colored, mask = colorize(cloud, img, identity_camera)
    assert mask.all()
    assert np.array_equal(colored.colors, [[255, 0, 0], [255, 0, 0]])


def test_colorize_behind_camera_uncolored(identity_camera):
    intr = identity_camera.intrinsics
    img = RgbImage(np.full((intr.height, intr.width, 3), 200, dtype=np.uint8))
    cloud = PointCloud(np.array([[0.0, 0.0, -3.0]]))
    _, mask = colorize(cloud, img, identity_camera)
    assert not mask.any()


def test_colorize_split_image_matches_oracle(rng, identity_camera):
    intr = identity_camera.intrinsics
    img = np.zeros((intr.height, intr.width, 3), dtype=np.uint8)
    img[:, : intr.width // 2] = [0, 255, 0]
    img[:, intr.width // 2 :] = [0, 0, 255]
    rgb = RgbImage(img)
    pts = np.column_stack(
        [rng.uniform(-1, 1, 300), rng.uniform(-0.7, 0.7, 300), rng.uniform(1, 6, 300)]
    )
    cloud = PointCloud(pts)
    colored, mask = colorize(cloud, rgb, identity_camera)
    r = identity_camera.pose.rotation.tolist()
    t = identity_camera.pose.translation.tolist()
    for i, p in enumerate(pts):
        res = project_scalar(p, r, t, intr.fx, intr.fy, intr.cx, intr.cy)
        px = pixel_of(res[0], res[1], intr.width, intr.height) if res else None
        if px is None:
            assert not mask[i]
        else:
            assert mask[i]
            assert np.array_equal(colored.colors[i], img[px[1], px[0]])


def test_colorize_dimension_mismatch(identity_camera):
    img = RgbImage(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        colorize(PointCloud.empty(), img, identity_camera)


def test_backproject_all_invalid(identity_camera):
    intr = identity_camera.intrinsics
    depth = DepthImage(np.zeros((intr.height, intr.width)))
    assert len(backproject(depth, None, identity_camera)) == 0


def test_backproject_principal_point(identity_camera):
    intr = identity_camera.intrinsics
    d = np.zeros((intr.height, intr.width))
    d[int(intr.cy), int(intr.cx)] = 3.0
    cloud = backproject(DepthImage(d), None, identity_camera)
    assert np.allclose(cloud.positions, [[0.0, 0.0, 3.0]])


def test_backproject_zbuffer_roundtrip(rng, small_camera):
    # one point per pixel: backproject(render_zbuffer(c)) recovers c
    intr = small_camera.intrinsics
    cols = rng.permutation(intr.width)[:30]
    rows = rng.permutation(intr.height)[:30]
    z = rng.uniform(1.0, 9.0, 30)
    x_cam = (cols - intr.cx) / intr.fx * z
    y_cam = (rows - intr.cy) / intr.fy * z
    p_cam = np.column_stack([x_cam, y_cam, z])
    world = small_camera.pose.inverse().apply(p_cam)
    zbuf = render_zbuffer(PointCloud(world), small_camera)
    back = backproject(zbuf, None, small_camera)
    assert len(back) == 30
    got = back.positions[np.lexsort(back.positions.T)]
    want = world[np.lexsort(world.T)]
    assert np.abs(got - want).max() < 1e-6


def test_project_backproject_pixel_center_roundtrip(rng, small_camera):
    intr = small_camera.intrinsics
    for _ in range(200):
        col = int(rng.integers(0, intr.width))
        row = int(rng.integers(0, intr.height))
        z = float(rng.uniform(0.01, 50.0))
        p_cam = np.array([(col - intr.cx) / intr.fx * z, (row - intr.cy) / intr.fy * z, z])
        world = small_camera.pose.inverse().apply(p_cam)
        u, v, z2, front = project_points(world.reshape(1, 3), small_camera)
        assert front[0]
        assert abs(u[0] - col) < 1e-9
        assert abs(v[0] - row) < 1e-9
        assert abs(z2[0] - z) < 1e-9


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        CameraIntrinsics(fx=0.0, fy=1.0, cx=0.0, cy=0.0, width=10, height=10)
    with pytest.raises(ValueError):
        CameraIntrinsics(fx=1.0, fy=1.0, cx=20.0, cy=0.0, width=10, height=10)


def test_nearest_pixel_rounding():
    intr = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=10, height=10)
    col, row, inside = nearest_pixel(np.array([2.4, 2.5, -0.4]), np.array([0.0, 0.0, 0.0]), intr)
    assert col.tolist() == [2, 3, 0]  # floor(x + 0.5)
    assert inside.tolist() == [True, True, True]
