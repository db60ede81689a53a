"""Live point-cloud capture, cleanup, streaming and recoloring at desk scale."""

__version__ = "0.1.0"

from pointstream.core.cloud import PointCloud, concat_clouds, transform
from pointstream.core.color import lab_to_srgb, srgb_to_lab
from pointstream.core.geometry import Pose
from pointstream.core.neighbors import NeighborIndex
from pointstream.core.plyio import read_ply, write_ply

__all__ = [
    "__version__",
    "PointCloud",
    "Pose",
    "NeighborIndex",
    "srgb_to_lab",
    "lab_to_srgb",
    "read_ply",
    "write_ply",
    "transform",
    "concat_clouds",
]
