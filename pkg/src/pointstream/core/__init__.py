from pointstream.core.cloud import PointCloud, concat_clouds, transform
from pointstream.core.color import lab_to_srgb, srgb_to_lab
from pointstream.core.geometry import Pose, rot_x, rot_y, rot_z
from pointstream.core.neighbors import NeighborIndex
from pointstream.core.plyio import (
    PlyBodyError,
    PlyError,
    PlyHeaderError,
    PlyLayoutError,
    read_ply,
    write_ply,
)

__all__ = [
    "PointCloud",
    "Pose",
    "NeighborIndex",
    "srgb_to_lab",
    "lab_to_srgb",
    "read_ply",
    "write_ply",
    "transform",
    "concat_clouds",
    "rot_x",
    "rot_y",
    "rot_z",
    "PlyError",
    "PlyHeaderError",
    "PlyLayoutError",
    "PlyBodyError",
]
