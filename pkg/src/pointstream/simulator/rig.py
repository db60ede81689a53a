"""Capture unit: three phase-offset LiDARs and one trigger-coupled camera.

The camera fires whenever a LiDAR beam sweeps across its optical axis;
with 120 degree offsets and 10 Hz rotation that is 30 frames per second.
Each event pairs the camera frame at the trigger instant with the full
rotation of the LiDAR that triggered it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from pointstream.core.cloud import PointCloud
from pointstream.core.geometry import Pose, rot_z
from pointstream.projection import CameraIntrinsics, RgbImage, SensorModel, camera_pose
from pointstream.simulator.camera import CameraRenderer
from pointstream.simulator.lidar import LidarConfig, ScanCaster
from pointstream.simulator.scene import Scene

_Z_AXIS_TOL = 1e-9


@dataclass
class RigConfig:
    lidars: list[LidarConfig]
    camera: SensorModel
    camera_fps: float = 30.0

    def __post_init__(self):
        if len(self.lidars) != 3:
            raise ValueError("a capture unit integrates exactly three LiDARs")
        phases = [l.phase_offset_deg % 360.0 for l in self.lidars]
        if len(set(phases)) != 3:
            raise ValueError("LiDAR phase offsets must be distinct")
        for l in self.lidars:
            up = l.pose.rotation @ np.array([0.0, 0.0, 1.0])
            if abs(up[0]) > _Z_AXIS_TOL or abs(up[1]) > _Z_AXIS_TOL or up[2] < 0:
                raise ValueError("LiDAR mounts must be upright (yaw-only rotation)")


@dataclass
class RigEvent:
    t: float
    seq: int
    sensor_id: int
    scan: PointCloud
    frame: RgbImage


def lidar_yaw_deg(cfg: LidarConfig) -> float:
    r = cfg.pose.rotation
    return math.degrees(math.atan2(r[1, 0], r[0, 0]))


def camera_azimuth_deg(cam: SensorModel) -> float:
    fwd = cam.pose.rotation.T @ np.array([0.0, 0.0, 1.0])
    return math.degrees(math.atan2(fwd[1], fwd[0]))


def run_rig(scene: Scene, rig: RigConfig, duration: float | None) -> Iterator[RigEvent]:
    """Yield trigger events in time order; ``duration=None`` never stops.

    Event times are (k + frac_i) / rate where frac_i is the rotation
    fraction at which LiDAR i crosses the camera axis, so the cadence is
    exact (no accumulation drift).
    """
    if duration is not None and not (duration > 0):
        raise ValueError("duration must be > 0")
    cam_az = camera_azimuth_deg(rig.camera)
    rate = rig.lidars[0].rotation_rate_hz
    fracs = []
    for cfg in rig.lidars:
        if cfg.rotation_rate_hz != rate:
            raise ValueError("all LiDARs in a rig must share a rotation rate")
        base = cfg.phase_offset_deg + lidar_yaw_deg(cfg)
        fracs.append(((cam_az - base) % 360.0) / 360.0)
    order = sorted(range(3), key=lambda i: (fracs[i], i))
    casters = [ScanCaster(scene, cfg) for cfg in rig.lidars]
    renderer = CameraRenderer(scene, rig.camera)

    seq = 0
    k = 0
    while True:
        for i in order:
            t = (k + fracs[i]) / rate
            if duration is not None and t >= duration:
                return
            yield RigEvent(
                t=t,
                seq=seq,
                sensor_id=rig.lidars[i].sensor_id,
                scan=casters[i].scan(k / rate),
                frame=renderer.render(t),
            )
            seq += 1
        k += 1


def default_rig(
    *,
    width: int = 640,
    height: int = 360,
    hfov_deg: float = 90.0,
    camera_position=(0.0, 0.0, 1.5),
    lidar_spread: float = 0.3,
    channels: int = 64,
    horizontal_step_deg: float = 0.5,
    rotation_rate_hz: float = 10.0,
    range_min: float = 0.5,
    range_max: float = 200.0,
    panel_transmittance: float = 1.0,
) -> RigConfig:
    """A desk-scale unit: camera at the center, LiDARs on a small triangle.

    The slight LiDAR baseline is what makes the three sensors sample a
    surface differently, which is the raw flicker the fusion stage must
    remove.
    """
    fx = width / (2.0 * math.tan(math.radians(hfov_deg) / 2.0))
    intr = CameraIntrinsics(
        fx=fx, fy=fx, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
        width=width, height=height,
    )
    cam = SensorModel(intr, camera_pose(camera_position))
    cx, cy, cz = camera_position
    lidars = []
    for i, phase in enumerate((0.0, 120.0, 240.0)):
        ang = math.radians(90.0 + i * 120.0)
        pos = np.array([cx + lidar_spread * math.cos(ang),
                        cy + lidar_spread * math.sin(ang), cz])
        lidars.append(
            LidarConfig(
                channels=channels,
                horizontal_step_deg=horizontal_step_deg,
                rotation_rate_hz=rotation_rate_hz,
                range_min=range_min,
                range_max=range_max,
                phase_offset_deg=phase,
                pose=Pose(rot_z(0.0), pos),
                panel_transmittance=panel_transmittance,
                sensor_id=i,
            )
        )
    return RigConfig(lidars=lidars, camera=cam, camera_fps=3.0 * rotation_rate_hz)
