import pytest

from pointstream.config import (
    ConfigError,
    PipelineConfig,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
)


def test_default_roundtrip(tmp_path):
    cfg = PipelineConfig()
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    back = load_config(path)
    assert config_to_dict(back) == config_to_dict(cfg)


def test_roundtrip_with_overrides(tmp_path):
    d = {
        "version": 1,
        "scene": "scenes/static_park.json",
        "rig": {
            "camera": {"width": 320, "height": 180, "hfov_deg": 70.0,
                       "position": [1.0, 2.0, 1.4], "yaw_deg": 15.0,
                       "pitch_deg": -5.0},
            "lidar": {"channels": 32, "horizontal_step_deg": 1.0,
                      "rotation_rate_hz": 10.0, "range_min": 0.5,
                      "range_max": 100.0, "panel_transmittance": 0.9},
            "lidar_spread": 0.2,
        },
        "fusion": {"diff_threshold": 30, "dilation_radius": 1,
                   "occlusion_margin": 0.2},
        "bilateral": {"sigma_spatial": 3.0, "sigma_range": 25.0,
                      "window_radius": 5, "min_weight": 0.001},
        "transfer": {"overlap_threshold": 0.2, "clusters": 8, "alpha": 0.7,
                     "min_pairs": 50, "kmeans_seed": 2, "kmeans_max_iter": 40},
        "stream": {"fps": 30.0, "defocus_radius": 3, "codec_id": 0,
                   "zlib_level": 1, "endpoint": "127.0.0.1:9999",
                   "queue_capacity": 8},
        "recolor_interval_s": 600.0,
        "snapshot_interval_frames": 15,
        "output_dir": "artifacts",
    }
    cfg = config_from_dict(d)
    assert config_to_dict(cfg) == d
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    assert config_to_dict(load_config(path)) == d


def test_build_rig_uses_camera_section():
    cfg = config_from_dict(
        {"version": 1, "rig": {"camera": {"width": 100, "height": 80}}}
    )
    rig = cfg.build_rig()
    assert rig.camera.intrinsics.width == 100
    assert rig.camera.intrinsics.height == 80
    assert len(rig.lidars) == 3


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"version": 1, "bogus": 1})
    with pytest.raises(ConfigError):
        config_from_dict({"version": 1, "fusion": {"nope": 2}})


def test_bad_version():
    with pytest.raises(ConfigError):
        config_from_dict({"version": 2})


def test_invalid_nested_value():
    with pytest.raises(ConfigError):
        config_from_dict({"version": 1, "transfer": {"alpha": 3.0}})


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.json")


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    with pytest.raises(ConfigError):
        load_config(p)
