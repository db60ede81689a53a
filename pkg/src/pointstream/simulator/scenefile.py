"""Scene description files: versioned JSON listing primitives and seed.

Schema (version 1):

    {
      "version": 1,
      "seed": 42,
      "primitives": [
        {"type": "box", "center": [x,y,z], "size": [sx,sy,sz],
         "color": [r,g,b], "motion": {"type": "linear", "velocity": [vx,vy,vz]}},
        {"type": "sphere", "center": [...], "radius": r, "color": [...]},
        {"type": "rect", "origin": [...], "edge_u": [...], "edge_v": [...],
         "color": [...], "color2": [...], "checker_square": s}
      ]
    }

``motion`` is optional everywhere; ``color2``/``checker_square`` are
optional and only meaningful together on rects.
"""

from __future__ import annotations

import json

from pointstream.simulator.primitives import Box, LinearMotion, Rect, Sphere
from pointstream.simulator.scene import Scene

SCENE_SCHEMA_VERSION = 1


class SceneFileError(ValueError):
    pass


def _vec(obj, key, d, n=3):
    try:
        v = [float(x) for x in d[key]]
    except (KeyError, TypeError, ValueError):
        raise SceneFileError(f"{obj}: missing or bad {key!r}")
    if len(v) != n:
        raise SceneFileError(f"{obj}: {key!r} must have {n} components")
    return v


def _motion(obj, d):
    m = d.get("motion")
    if m is None:
        return None
    if not isinstance(m, dict) or m.get("type") != "linear":
        raise SceneFileError(f"{obj}: unsupported motion {m!r}")
    return LinearMotion(_vec(obj, "velocity", m))


def scene_from_dict(d: dict) -> Scene:
    if not isinstance(d, dict):
        raise SceneFileError("scene file must hold a JSON object")
    if d.get("version") != SCENE_SCHEMA_VERSION:
        raise SceneFileError(
            f"unsupported scene schema version {d.get('version')!r}"
        )
    seed = d.get("seed", 0)
    if not isinstance(seed, int):
        raise SceneFileError("seed must be an integer")
    prims = []
    for i, p in enumerate(d.get("primitives", [])):
        name = f"primitive {i}"
        if not isinstance(p, dict):
            raise SceneFileError(f"{name}: must be an object")
        kind = p.get("type")
        try:
            if kind == "box":
                prims.append(
                    Box(_vec(name, "center", p), _vec(name, "size", p),
                        _vec(name, "color", p), motion=_motion(name, p))
                )
            elif kind == "sphere":
                prims.append(
                    Sphere(_vec(name, "center", p), float(p["radius"]),
                           _vec(name, "color", p), motion=_motion(name, p))
                )
            elif kind == "rect":
                prims.append(
                    Rect(
                        _vec(name, "origin", p), _vec(name, "edge_u", p),
                        _vec(name, "edge_v", p), _vec(name, "color", p),
                        color2=_vec(name, "color2", p) if "color2" in p else None,
                        checker_square=(
                            float(p["checker_square"]) if "checker_square" in p else None
                        ),
                        motion=_motion(name, p),
                    )
                )
            else:
                raise SceneFileError(f"{name}: unknown type {kind!r}")
        except (KeyError, TypeError) as e:
            raise SceneFileError(f"{name}: {e}")
        except ValueError as e:
            raise SceneFileError(f"{name}: {e}")
    return Scene(prims, seed=seed)


def scene_to_dict(scene: Scene) -> dict:
    prims = []
    for p in scene.primitives:
        d: dict = {}
        if isinstance(p, Box):
            d = {"type": "box", "center": list(p.center), "size": list(p.size)}
        elif isinstance(p, Sphere):
            d = {"type": "sphere", "center": list(p.center), "radius": p.radius}
        elif isinstance(p, Rect):
            d = {
                "type": "rect",
                "origin": list(p.origin),
                "edge_u": list(p.edge_u),
                "edge_v": list(p.edge_v),
            }
            if p.color2 is not None:
                d["color2"] = [int(v) for v in p.color2]
            if p.checker_square is not None:
                d["checker_square"] = p.checker_square
        else:
            raise SceneFileError(f"cannot serialize primitive {type(p).__name__}")
        d["color"] = [int(v) for v in p.color]
        if p.motion is not None:
            d["motion"] = {"type": "linear", "velocity": list(p.motion.velocity)}
        prims.append(d)
    return {"version": SCENE_SCHEMA_VERSION, "seed": scene.seed, "primitives": prims}


def load_scene(path) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise SceneFileError(f"scene file not found: {path}")
    except json.JSONDecodeError as e:
        raise SceneFileError(f"scene file {path}: invalid JSON ({e})")
    return scene_from_dict(data)


def save_scene(scene: Scene, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scene_to_dict(scene), f, indent=2, sort_keys=True)
        f.write("\n")
