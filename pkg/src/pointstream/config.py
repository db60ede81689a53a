"""Pipeline configuration file: one JSON document for every knob.

Schema (version 1), all keys optional unless noted:

    {
      "version": 1,
      "scene": "scenes/static_park.json",        # path, simulate/pipeline
      "rig": {
        "camera": {"width": 640, "height": 360, "hfov_deg": 90.0,
                   "position": [0,0,1.5], "yaw_deg": 0.0, "pitch_deg": 0.0},
        "lidar": {"channels": 64, "horizontal_step_deg": 0.5,
                  "rotation_rate_hz": 10.0, "range_min": 0.5,
                  "range_max": 200.0, "panel_transmittance": 1.0},
        "lidar_spread": 0.3
      },
      "fusion":   {"diff_threshold": 25, "dilation_radius": 2,
                   "occlusion_margin": 0.10},
      "bilateral": {"sigma_spatial": 4.0, "sigma_range": 20.0,
                    "window_radius": 8, "min_weight": 1e-4},
      "transfer": {"overlap_threshold": 0.15, "clusters": 16, "alpha": 0.5,
                   "min_pairs": 100, "kmeans_seed": 0, "kmeans_max_iter": 50},
      "stream":   {"fps": 30.0, "defocus_radius": 2, "codec_id": 1,
                   "zlib_level": 6, "endpoint": "127.0.0.1:9760",
                   "queue_capacity": 4},
      "recolor_interval_s": 900.0,
      "snapshot_interval_frames": 30,
      "output_dir": "out"
    }

The rig block describes one capture unit: the camera at ``position``
looking along yaw/pitch and three identical LiDARs (phases 0/120/240)
on a triangle of radius ``lidar_spread`` around it.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from pointstream.colorxfer import TransferParams
from pointstream.fusion import FusionParams
from pointstream.simulator.rig import RigConfig, default_rig
from pointstream.upsample import BilateralParams

CONFIG_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class CameraConfig:
    width: int = 640
    height: int = 360
    hfov_deg: float = 90.0
    position: tuple[float, float, float] = (0.0, 0.0, 1.5)
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0


@dataclass
class LidarSection:
    channels: int = 64
    horizontal_step_deg: float = 0.5
    rotation_rate_hz: float = 10.0
    range_min: float = 0.5
    range_max: float = 200.0
    panel_transmittance: float = 1.0


@dataclass
class RigSection:
    camera: CameraConfig = field(default_factory=CameraConfig)
    lidar: LidarSection = field(default_factory=LidarSection)
    lidar_spread: float = 0.3


@dataclass
class StreamSection:
    fps: float = 30.0
    defocus_radius: int = 2
    codec_id: int = 1
    zlib_level: int = 6
    endpoint: str = "127.0.0.1:9760"
    queue_capacity: int = 4


@dataclass
class PipelineConfig:
    scene: str | None = None
    rig: RigSection = field(default_factory=RigSection)
    fusion: FusionParams = field(default_factory=FusionParams)
    bilateral: BilateralParams = field(default_factory=BilateralParams)
    transfer: TransferParams = field(default_factory=TransferParams)
    stream: StreamSection = field(default_factory=StreamSection)
    recolor_interval_s: float = 900.0
    snapshot_interval_frames: int = 30
    output_dir: str = "out"

    def __post_init__(self):
        if not (self.recolor_interval_s > 0):
            raise ConfigError("recolor_interval_s must be > 0")
        if self.snapshot_interval_frames < 1:
            raise ConfigError("snapshot_interval_frames must be >= 1")

    def build_rig(self) -> RigConfig:
        from pointstream.projection import SensorModel, camera_pose

        r = self.rig
        rig = default_rig(
            width=r.camera.width,
            height=r.camera.height,
            hfov_deg=r.camera.hfov_deg,
            camera_position=r.camera.position,
            lidar_spread=r.lidar_spread,
            channels=r.lidar.channels,
            horizontal_step_deg=r.lidar.horizontal_step_deg,
            rotation_rate_hz=r.lidar.rotation_rate_hz,
            range_min=r.lidar.range_min,
            range_max=r.lidar.range_max,
            panel_transmittance=r.lidar.panel_transmittance,
        )
        if r.camera.yaw_deg or r.camera.pitch_deg:
            rig.camera = SensorModel(
                rig.camera.intrinsics,
                camera_pose(r.camera.position, r.camera.yaw_deg, r.camera.pitch_deg),
            )
        return rig


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}")


def config_from_dict(d: dict) -> PipelineConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    if d.get("version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version {d.get('version')!r}")
    body = {k: v for k, v in d.items() if k != "version"}
    rig_d = body.pop("rig", {})
    rig = RigSection(
        camera=_build(CameraConfig, rig_d.get("camera", {}), "rig.camera"),
        lidar=_build(LidarSection, rig_d.get("lidar", {}), "rig.lidar"),
        lidar_spread=rig_d.get("lidar_spread", 0.3),
    )
    cam = rig.camera
    if isinstance(cam.position, list):
        if len(cam.position) != 3:
            raise ConfigError("rig.camera.position must have 3 components")
        cam.position = tuple(float(v) for v in cam.position)
    kwargs = dict(
        scene=body.pop("scene", None),
        rig=rig,
        fusion=_build(FusionParams, body.pop("fusion", {}), "fusion"),
        bilateral=_build(BilateralParams, body.pop("bilateral", {}), "bilateral"),
        transfer=_build(TransferParams, body.pop("transfer", {}), "transfer"),
        stream=_build(StreamSection, body.pop("stream", {}), "stream"),
    )
    for key in ("recolor_interval_s", "snapshot_interval_frames", "output_dir"):
        if key in body:
            kwargs[key] = body.pop(key)
    if body:
        raise ConfigError(f"unknown top-level keys {sorted(body)}")
    try:
        return PipelineConfig(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e))


def config_to_dict(cfg: PipelineConfig) -> dict:
    d = {
        "version": CONFIG_SCHEMA_VERSION,
        "rig": {
            "camera": asdict(cfg.rig.camera) | {"position": list(cfg.rig.camera.position)},
            "lidar": asdict(cfg.rig.lidar),
            "lidar_spread": cfg.rig.lidar_spread,
        },
        "fusion": asdict(cfg.fusion),
        "bilateral": asdict(cfg.bilateral),
        "transfer": asdict(cfg.transfer),
        "stream": asdict(cfg.stream),
        "recolor_interval_s": cfg.recolor_interval_s,
        "snapshot_interval_frames": cfg.snapshot_interval_frames,
        "output_dir": cfg.output_dir,
    }
    if cfg.scene is not None:
        d["scene"] = cfg.scene
    return d


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path}: invalid JSON ({e})")
    return config_from_dict(data)


def save_config(cfg: PipelineConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_to_dict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")
