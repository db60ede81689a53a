import numpy as np
import pytest

from pointstream.core.cloud import PointCloud
from pointstream.core.plyio import (
    PlyBodyError,
    PlyError,
    PlyHeaderError,
    PlyLayoutError,
    read_ply,
    write_ply,
)

ASCII_TWO_POINTS = """ply
format ascii 1.0
comment hand-written fixture
element vertex 2
property float x
property float y
property float z
property uchar red
property uchar green
property uchar blue
end_header
1.5 -2.25 3.125 255 0 10
-0.5 0.0 100.0 1 2 3
"""


def test_empty_cloud_roundtrip(tmp_path):
    path = tmp_path / "empty.ply"
    write_ply(PointCloud.empty(), path)
    back = read_ply(path)
    assert len(back) == 0


def test_colored_roundtrip_binary(tmp_path):
    cloud = PointCloud(
        np.array([[1.0, 2.0, 3.0], [-4.5, 0.25, 9.0], [0.1, 0.2, 0.3]]),
        colors=np.array([[255, 0, 0], [0, 255, 0], [1, 2, 3]], dtype=np.uint8),
    )
    path = tmp_path / "c.ply"
    write_ply(cloud, path)
    back = read_ply(path)
    # positions round-trip bit-exactly as float32
    assert np.array_equal(
        back.positions.astype(np.float32), cloud.positions.astype(np.float32)
    )
    assert np.array_equal(back.colors, cloud.colors)


def test_uncolored_roundtrip_binary(tmp_path, rng):
    cloud = PointCloud(rng.normal(size=(100, 3)) * 50)
    path = tmp_path / "u.ply"
    write_ply(cloud, path)
    back = read_ply(path)
    assert back.colors is None
    assert np.array_equal(
        back.positions.astype(np.float32), cloud.positions.astype(np.float32)
    )


def test_ascii_roundtrip(tmp_path, rng):
    cloud = PointCloud(
        rng.normal(size=(20, 3)),
        colors=rng.integers(0, 256, size=(20, 3)).astype(np.uint8),
    )
    path = tmp_path / "a.ply"
    write_ply(cloud, path, binary=False)
    back = read_ply(path)
    assert np.array_equal(
        back.positions.astype(np.float32), cloud.positions.astype(np.float32)
    )
    assert np.array_equal(back.colors, cloud.colors)


def test_ascii_fixture_exact_values(tmp_path):
    path = tmp_path / "fixture.ply"
    path.write_text(ASCII_TWO_POINTS)
    cloud = read_ply(path)
    assert len(cloud) == 2
    assert np.array_equal(cloud.positions[0], [1.5, -2.25, 3.125])
    assert np.array_equal(cloud.positions[1], [-0.5, 0.0, 100.0])
    assert np.array_equal(cloud.colors, [[255, 0, 10], [1, 2, 3]])


def test_generator_comment_written(tmp_path):
    path = tmp_path / "g.ply"
    write_ply(PointCloud.empty(), path)
    header = path.read_bytes().split(b"end_header")[0]
    assert b"comment generator pointstream " in header


def test_malformed_header_offset(tmp_path):
    path = tmp_path / "bad.ply"
    path.write_bytes(b"not a ply\nmore\n")
    with pytest.raises(PlyHeaderError) as exc:
        read_ply(path)
    assert exc.value.offset == 0


def test_unsupported_layout(tmp_path):
    path = tmp_path / "layout.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 1\n"
        "property double x\nproperty double y\nproperty double z\nend_header\n0 0 0\n"
    )
    with pytest.raises(PlyLayoutError):
        read_ply(path)


def test_unsupported_element(tmp_path):
    path = tmp_path / "face.ply"
    path.write_text("ply\nformat ascii 1.0\nelement face 5\nend_header\n")
    with pytest.raises(PlyLayoutError):
        read_ply(path)


def test_big_endian_rejected(tmp_path):
    path = tmp_path / "be.ply"
    path.write_text(
        "ply\nformat binary_big_endian 1.0\nelement vertex 0\n"
        "property float x\nproperty float y\nproperty float z\nend_header\n"
    )
    with pytest.raises(PlyLayoutError):
        read_ply(path)


def test_truncated_binary_body(tmp_path):
    cloud = PointCloud(np.ones((4, 3)))
    path = tmp_path / "t.ply"
    write_ply(cloud, path)
    data = path.read_bytes()
    path.write_bytes(data[:-5])
    with pytest.raises(PlyBodyError) as exc:
        read_ply(path)
    assert exc.value.offset > 0


def test_truncated_ascii_body(tmp_path):
    path = tmp_path / "ta.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\nend_header\n"
        "0 0 0\n1 1 1\n"
    )
    with pytest.raises(PlyBodyError):
        read_ply(path)


def test_errors_are_distinct_types():
    assert issubclass(PlyHeaderError, PlyError)
    assert issubclass(PlyLayoutError, PlyError)
    assert issubclass(PlyBodyError, PlyError)
    assert not issubclass(PlyLayoutError, PlyHeaderError)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_ply(tmp_path / "nope.ply")
