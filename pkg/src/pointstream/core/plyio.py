"""PLY reader/writer for vertex clouds.

Written flavor: binary little-endian, positions float32, optional
red/green/blue uchar, header comment ``generator pointstream <version>``.
ASCII 1.0 is accepted on read. Anything else (big-endian, doubles, extra
elements or reordered properties) is rejected with an error naming the
byte offset of the offending construct.
"""

from __future__ import annotations

import numpy as np

import pointstream
from pointstream.core.cloud import PointCloud


class PlyError(ValueError):
    """Base PLY parse error; ``offset`` is the byte offset in the file."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class PlyHeaderError(PlyError):
    pass


class PlyLayoutError(PlyError):
    pass


class PlyBodyError(PlyError):
    pass


_XYZ = [("x", "float"), ("y", "float"), ("z", "float")]
_RGB = [("red", "uchar"), ("green", "uchar"), ("blue", "uchar")]


def write_ply(cloud: PointCloud, path, *, binary: bool = True) -> None:
    n = len(cloud)
    lines = [
        "ply",
        f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
        f"comment generator pointstream {pointstream.__version__}",
        f"element vertex {n}",
        "property float x",
        "property float y",
        "property float z",
    ]
    if cloud.has_colors:
        lines += ["property uchar red", "property uchar green", "property uchar blue"]
    lines.append("end_header")
    header = ("\n".join(lines) + "\n").encode("ascii")

    pos32 = cloud.positions.astype("<f4")
    with open(path, "wb") as f:
        f.write(header)
        if binary:
            if cloud.has_colors:
                rec = np.empty(
                    n, dtype=[("p", "<f4", 3), ("c", "u1", 3)]
                )
                rec["p"] = pos32
                rec["c"] = cloud.colors
                f.write(rec.tobytes())
            else:
                f.write(pos32.tobytes())
        else:
            rows = []
            for i in range(n):
                coords = " ".join(f"{v:.9g}" for v in pos32[i])
                if cloud.has_colors:
                    coords += " " + " ".join(str(int(v)) for v in cloud.colors[i])
                rows.append(coords)
            f.write(("\n".join(rows) + ("\n" if rows else "")).encode("ascii"))


def _parse_header(data: bytes):
    pos = 0
    fmt = None
    n_vertex = None
    props: list[tuple[str, str]] = []
    element_open = None
    first = True
    while True:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise PlyHeaderError("header not terminated by end_header", pos)
        line = data[pos:nl].decode("ascii", errors="replace").strip()
        line_off = pos
        pos = nl + 1
        if first:
            if line != "ply":
                raise PlyHeaderError("missing 'ply' magic line", line_off)
            first = False
            continue
        if line.startswith("comment") or line.startswith("obj_info") or line == "":
            continue
        if line.startswith("format"):
            parts = line.split()
            if len(parts) != 3 or parts[2] != "1.0":
                raise PlyHeaderError(f"bad format line: {line!r}", line_off)
            if parts[1] not in ("ascii", "binary_little_endian"):
                raise PlyLayoutError(f"unsupported format {parts[1]!r}", line_off)
            fmt = parts[1]
            continue
        if line.startswith("element"):
            parts = line.split()
            if len(parts) != 3:
                raise PlyHeaderError(f"bad element line: {line!r}", line_off)
            if parts[1] != "vertex" or element_open is not None:
                raise PlyLayoutError(f"unsupported element {parts[1]!r}", line_off)
            try:
                n_vertex = int(parts[2])
            except ValueError:
                raise PlyHeaderError(f"bad vertex count {parts[2]!r}", line_off)
            if n_vertex < 0:
                raise PlyHeaderError("negative vertex count", line_off)
            element_open = "vertex"
            continue
        if line.startswith("property"):
            parts = line.split()
            if element_open != "vertex" or len(parts) != 3:
                raise PlyLayoutError(f"unsupported property line: {line!r}", line_off)
            typ, name = parts[1], parts[2]
            if typ == "float32":
                typ = "float"
            if typ == "uint8":
                typ = "uchar"
            props.append((name, typ))
            continue
        if line == "end_header":
            break
        raise PlyHeaderError(f"unrecognized header line: {line!r}", line_off)
    if fmt is None:
        raise PlyHeaderError("header missing format line", 0)
    if n_vertex is None:
        raise PlyLayoutError("header missing vertex element", 0)
    if props != _XYZ and props != _XYZ + _RGB:
        raise PlyLayoutError(
            "unsupported vertex layout (need float x,y,z then optional uchar red,green,blue)",
            0,
        )
    return fmt, n_vertex, len(props) == 6, pos


def read_ply(path) -> PointCloud:
    with open(path, "rb") as f:
        data = f.read()
    fmt, n, has_rgb, body_off = _parse_header(data)
    body = data[body_off:]
    if fmt == "binary_little_endian":
        stride = 12 + (3 if has_rgb else 0)
        need = n * stride
        if len(body) < need:
            raise PlyBodyError(
                f"truncated body: need {need} bytes, have {len(body)}",
                body_off + len(body),
            )
        if has_rgb:
            rec = np.frombuffer(body[:need], dtype=[("p", "<f4", 3), ("c", "u1", 3)])
            return PointCloud(rec["p"].astype(np.float64), rec["c"].copy())
        pos = np.frombuffer(body[:need], dtype="<f4").reshape(n, 3)
        return PointCloud(pos.astype(np.float64))

    # ascii body
    text = body.decode("ascii", errors="replace")
    ncols = 6 if has_rgb else 3
    pos = np.zeros((n, 3), dtype=np.float64)
    col = np.zeros((n, 3), dtype=np.uint8) if has_rgb else None
    offset = body_off
    lines = text.split("\n")
    row = 0
    for line in lines:
        stripped = line.strip()
        if stripped:
            if row >= n:
                break  # trailing junk tolerated after the declared rows
            parts = stripped.split()
            if len(parts) != ncols:
                raise PlyBodyError(
                    f"vertex row {row}: expected {ncols} values, got {len(parts)}",
                    offset,
                )
            try:
                pos[row] = [float(parts[0]), float(parts[1]), float(parts[2])]
                if has_rgb:
                    c = [int(parts[3]), int(parts[4]), int(parts[5])]
                    if any(v < 0 or v > 255 for v in c):
                        raise ValueError
                    col[row] = c
            except ValueError:
                raise PlyBodyError(f"vertex row {row}: bad value", offset)
            row += 1
        offset += len(line.encode("ascii", errors="replace")) + 1
    if row < n:
        raise PlyBodyError(f"truncated body: {row} of {n} vertex rows", len(data))
    return PointCloud(pos, col)
