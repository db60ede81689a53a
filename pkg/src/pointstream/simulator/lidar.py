"""Spinning LiDAR model: full-rotation scans with per-firing scene times."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pointstream.core.cloud import PointCloud
from pointstream.core.geometry import Pose
from pointstream.simulator.rng import ray_uniforms
from pointstream.simulator.scene import Scene, cast_rays, colors_for_hits


@dataclass
class LidarConfig:
    channels: int = 128
    vertical_fov_deg: float = 45.0
    rotation_rate_hz: float = 10.0
    horizontal_step_deg: float = 0.2
    range_min: float = 1.0
    range_max: float = 200.0
    phase_offset_deg: float = 0.0
    pose: Pose = field(default_factory=Pose.identity)  # lidar -> world
    panel_transmittance: float = 1.0
    sensor_id: int = 0

    def __post_init__(self):
        if self.channels < 1:
            raise ValueError("channels must be >= 1")
        if not (0 < self.range_min < self.range_max):
            raise ValueError("need 0 < range_min < range_max")
        if not (self.rotation_rate_hz > 0):
            raise ValueError("rotation_rate_hz must be > 0")
        if not (0.0 <= self.panel_transmittance <= 1.0):
            raise ValueError("panel_transmittance must lie in [0, 1]")
        steps = 360.0 / self.horizontal_step_deg
        if abs(steps - round(steps)) > 1e-9 or steps < 1:
            raise ValueError("horizontal_step_deg must divide 360")

    @property
    def azimuth_steps(self) -> int:
        return int(round(360.0 / self.horizontal_step_deg))

    @property
    def rays_per_scan(self) -> int:
        return self.azimuth_steps * self.channels


def lidar_azimuth_deg(cfg: LidarConfig, t: float) -> float:
    """Instantaneous beam azimuth (lidar frame) of the continuous spin."""
    return (cfg.phase_offset_deg + 360.0 * cfg.rotation_rate_hz * t) % 360.0


def scan_ray_grid(cfg: LidarConfig):
    """Unit ray directions (lidar frame) and per-ray firing offsets.

    Rays are azimuth-major: all channels of one azimuth column share a
    firing time. Elevations span the vertical FOV symmetrically.
    """
    s = cfg.azimuth_steps
    az = np.deg2rad(cfg.phase_offset_deg + np.arange(s) * cfg.horizontal_step_deg)
    if cfg.channels == 1:
        el = np.zeros(1)
    else:
        el = np.deg2rad(
            np.linspace(-cfg.vertical_fov_deg / 2.0, cfg.vertical_fov_deg / 2.0, cfg.channels)
        )
    az_g = np.repeat(az, cfg.channels)
    el_g = np.tile(el, s)
    ce = np.cos(el_g)
    dirs = np.column_stack([ce * np.cos(az_g), ce * np.sin(az_g), np.sin(el_g)])
    dt = np.repeat(np.arange(s) / (cfg.rotation_rate_hz * s), cfg.channels)
    return dirs, dt


def rotation_index(cfg: LidarConfig, t0: float) -> int:
    return int(round(t0 * cfg.rotation_rate_hz))


def _cloud_from_hits(scene, cfg, t0, origin, dirs_w, times, t_hit, prim_idx):
    keep = (t_hit >= cfg.range_min) & (t_hit <= cfg.range_max)
    if cfg.panel_transmittance < 1.0:
        u = ray_uniforms(
            scene.seed, cfg.sensor_id, rotation_index(cfg, t0), np.arange(len(dirs_w))
        )
        keep &= u < cfg.panel_transmittance
    idx = np.nonzero(keep)[0]
    if len(idx) == 0:
        return PointCloud.empty()
    pts = origin + t_hit[idx, None] * dirs_w[idx]
    colors = colors_for_hits(scene, prim_idx[idx], pts, times[idx])
    return PointCloud(
        pts,
        colors=colors,
        sensor_id=np.full(len(idx), cfg.sensor_id, dtype=np.int32),
        timestamp_ns=np.rint(times[idx] * 1e9).astype(np.int64),
    )


def lidar_scan(scene: Scene, cfg: LidarConfig, t0: float) -> PointCloud:
    """One full rotation starting at azimuth = phase offset at time t0.

    Each firing evaluates the scene at its own time, so moving objects
    smear across the 1/rate rotation exactly as a real spinning sensor
    sees them. Points carry ground-truth surface colors, the sensor id
    and their exact firing time. Returns survive the protective panel
    with probability ``panel_transmittance`` via a counter-based RNG
    keyed on (scene seed, sensor, rotation index, ray index).
    """
    dirs_l, dt = scan_ray_grid(cfg)
    dirs_w = dirs_l @ cfg.pose.rotation.T
    origin = cfg.pose.translation
    times = t0 + dt
    t_hit, prim_idx = cast_rays(scene, origin, dirs_w, times)
    return _cloud_from_hits(scene, cfg, t0, origin, dirs_w, times, t_hit, prim_idx)


class ScanCaster:
    """lidar_scan with static geometry intersected once and reused.

    Bit-identical to :func:`lidar_scan` except on exact inter-primitive
    distance ties (coincident surfaces).
    """

    def __init__(self, scene: Scene, cfg: LidarConfig):
        from pointstream.simulator.scene import StaticCastCache

        self.scene = scene
        self.cfg = cfg
        dirs_l, self._dt = scan_ray_grid(cfg)
        self._dirs_w = dirs_l @ cfg.pose.rotation.T
        self._origin = cfg.pose.translation
        self._cache = StaticCastCache(scene, self._origin, self._dirs_w)

    def scan(self, t0: float) -> PointCloud:
        times = t0 + self._dt
        t_hit, prim_idx = self._cache.cast(times)
        return _cloud_from_hits(
            self.scene, self.cfg, t0, self._origin, self._dirs_w, times,
            t_hit, prim_idx,
        )
