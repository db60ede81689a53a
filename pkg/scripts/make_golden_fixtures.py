#!/usr/bin/env python3
"""Regenerate the golden wire-format fixtures in tests/golden/.

The byte layouts are frozen; regenerating must be a no-op unless the
wire format version changes deliberately.
"""

import json
from pathlib import Path

import numpy as np

from pointstream.projection import DepthImage, RgbImage
from pointstream.stream import EncodeOptions, RgbdFrame, encode_frame, wrap_frame

OUT = Path(__file__).resolve().parent.parent / "tests" / "golden"


def reference_frame() -> RgbdFrame:
    h, w = 3, 4
    rgb = np.arange(h * w * 3, dtype=np.uint8).reshape(h, w, 3)
    depth = np.array(
        [
            [0.0, 1.0, 2.5, 65.534],
            [0.001, 0.0005, 70.0, 3.25],
            [12.345, 0.0, 0.25, 59.999],
        ]
    )
    return RgbdFrame(
        rgb=RgbImage(rgb),
        depth=DepthImage(depth),
        capture_ts_ns=1_234_567_890_123,
        camera_id=2,
        frame_seq=42,
    )


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    frame = reference_frame()
    store = wrap_frame(encode_frame(frame, EncodeOptions(codec_id=0, defocused=True)))
    (OUT / "frame_store_v1.bin").write_bytes(store)
    zl = wrap_frame(
        encode_frame(frame, EncodeOptions(codec_id=1, zlib_level=6))
    )
    (OUT / "frame_zlib_v1.bin").write_bytes(zl)
    meta = {
        "width": 4,
        "height": 3,
        "camera_id": 2,
        "frame_seq": 42,
        "capture_ts_ns": 1234567890123,
        "store_bytes": len(store),
        "depth_decoded_row0": [0.0, 1.0, 2.5, 65.534],
    }
    (OUT / "frame_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    print(f"wrote {OUT / 'frame_store_v1.bin'} ({len(store)} bytes)")
    print(f"wrote {OUT / 'frame_zlib_v1.bin'} ({len(zl)} bytes)")


if __name__ == "__main__":
    main()
