"""Checkerboard panel-loss harness.

A board target in front of a LiDAR is scanned repeatedly under a given
panel transmittance; the loss fraction is measured against the
transmittance-1 baseline count. This validates the dropout accounting,
not any optics: the transmittance values themselves are inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from pointstream.simulator.lidar import LidarConfig, lidar_scan
from pointstream.simulator.primitives import Rect
from pointstream.simulator.scene import Scene

BOARD_WIDTH = 1.6     # meters
BOARD_HEIGHT = 1.2
BOARD_SQUARE = 0.12
BOARD_DISTANCE = 1.5


def build_checkerboard_scene(
    *,
    distance: float = BOARD_DISTANCE,
    width: float = BOARD_WIDTH,
    height: float = BOARD_HEIGHT,
    square: float = BOARD_SQUARE,
    seed: int = 0,
) -> Scene:
    """Checkerboard target facing the sensor at ``distance`` along +x."""
    board = Rect(
        origin=(distance, -width / 2.0, -height / 2.0),
        edge_u=(0.0, width, 0.0),
        edge_v=(0.0, 0.0, height),
        color=(245, 245, 245),
        color2=(15, 15, 15),
        checker_square=square,
    )
    return Scene([board], seed=seed)


@dataclass
class CheckerboardResult:
    transmittance: float
    trials: int
    baseline_points: int
    mean_captured: float
    mean_loss: float
    ci95: tuple[float, float]
    per_trial_counts: list[int]


def checkerboard_experiment(
    transmittance: float,
    trials: int,
    seed: int,
    *,
    cfg: LidarConfig | None = None,
    scene: Scene | None = None,
) -> CheckerboardResult:
    """Scan the board ``trials`` times and report the loss accounting.

    Each trial is one full rotation (trial k starts at t = k / rate so
    the dropout counter advances per trial). The 95% CI is the normal
    approximation of the binomial over all kept/lost decisions.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not (0.0 <= transmittance <= 1.0):
        raise ValueError("transmittance must lie in [0, 1]")
    base_cfg = cfg if cfg is not None else LidarConfig(range_min=1.0, range_max=200.0)
    scn = scene if scene is not None else build_checkerboard_scene(seed=seed)
    scn = Scene(scn.primitives, seed=seed)

    baseline_cfg = _with_transmittance(base_cfg, 1.0)
    baseline = len(lidar_scan(scn, baseline_cfg, 0.0))
    trial_cfg = _with_transmittance(base_cfg, transmittance)
    counts = [
        len(lidar_scan(scn, trial_cfg, k / trial_cfg.rotation_rate_hz))
        for k in range(trials)
    ]
    mean_captured = sum(counts) / trials
    mean_loss = 1.0 - mean_captured / baseline if baseline else 0.0
    n_total = baseline * trials
    p = mean_loss
    half = 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / n_total) if n_total else 0.0
    return CheckerboardResult(
        transmittance=transmittance,
        trials=trials,
        baseline_points=baseline,
        mean_captured=mean_captured,
        mean_loss=mean_loss,
        ci95=(mean_loss - half, mean_loss + half),
        per_trial_counts=counts,
    )


def _with_transmittance(cfg: LidarConfig, transmittance: float) -> LidarConfig:
    return LidarConfig(
        channels=cfg.channels,
        vertical_fov_deg=cfg.vertical_fov_deg,
        rotation_rate_hz=cfg.rotation_rate_hz,
        horizontal_step_deg=cfg.horizontal_step_deg,
        range_min=cfg.range_min,
        range_max=cfg.range_max,
        phase_offset_deg=cfg.phase_offset_deg,
        pose=cfg.pose,
        panel_transmittance=transmittance,
        sensor_id=cfg.sensor_id,
    )
