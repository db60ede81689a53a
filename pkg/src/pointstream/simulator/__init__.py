from pointstream.simulator.camera import camera_frame
from pointstream.simulator.experiments import (
    CheckerboardResult,
    build_checkerboard_scene,
    checkerboard_experiment,
)
from pointstream.simulator.lidar import (
    LidarConfig,
    lidar_azimuth_deg,
    lidar_scan,
    scan_ray_grid,
)
from pointstream.simulator.primitives import Box, LinearMotion, Rect, Sphere
from pointstream.simulator.rig import RigConfig, RigEvent, default_rig, run_rig
from pointstream.simulator.scene import Scene, cast_rays, colors_for_hits
from pointstream.simulator.scenefile import (
    SceneFileError,
    load_scene,
    save_scene,
    scene_from_dict,
    scene_to_dict,
)

__all__ = [
    "Scene",
    "Box",
    "Sphere",
    "Rect",
    "LinearMotion",
    "LidarConfig",
    "RigConfig",
    "RigEvent",
    "lidar_scan",
    "lidar_azimuth_deg",
    "scan_ray_grid",
    "camera_frame",
    "run_rig",
    "default_rig",
    "cast_rays",
    "colors_for_hits",
    "build_checkerboard_scene",
    "checkerboard_experiment",
    "CheckerboardResult",
    "SceneFileError",
    "load_scene",
    "save_scene",
    "scene_from_dict",
    "scene_to_dict",
]
