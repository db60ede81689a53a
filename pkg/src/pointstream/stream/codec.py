"""Frame codec: privacy defocus, depth quantization, lossless payloads."""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from pointstream.projection import DepthImage, RgbImage
from pointstream.stream.frame import (
    FLAG_DEFOCUSED,
    FLAG_DEPTH_PRESENT,
    FLAG_QUARTER_MM,
    DEPTH_SCALE_MM,
    DEPTH_SCALE_QUARTER_MM,
    HEADER_SIZE,
    CrcMismatchError,
    FrameHeader,
    PayloadError,
    RgbdFrame,
    TruncatedPayloadError,
    UnknownCodecError,
    WIRE_VERSION,
    dequantize_depth,
    quantize_depth,
)

CODEC_STORE = 0
CODEC_ZLIB = 1


@dataclass
class EncodeOptions:
    codec_id: int = CODEC_ZLIB
    zlib_level: int = 6
    defocused: bool = False
    quarter_mm: bool = False

    def __post_init__(self):
        if self.codec_id not in (CODEC_STORE, CODEC_ZLIB):
            raise ValueError(f"unknown codec id {self.codec_id}")


def defocus(rgb: RgbImage, radius: int) -> RgbImage:
    """Edge-clamped box blur, kernel side 2*radius + 1, floor rounding.

    radius 0 is the identity. The integer rule is floor(window_sum / n^2)
    with the window always full thanks to edge clamping.
    """
    if radius < 0:
        raise ValueError("defocus radius must be >= 0")
    if radius == 0:
        return RgbImage(rgb.data.copy())
    side = 2 * radius + 1
    padded = np.pad(rgb.data, ((radius, radius), (radius, radius), (0, 0)), mode="edge")
    # int32 is enough while the total image sum fits; 8K frames fall back
    acc = np.int32 if padded[..., 0].size * 255 < 2**31 else np.int64
    s = padded.astype(acc).cumsum(axis=0, dtype=acc).cumsum(axis=1, dtype=acc)
    s = np.pad(s, ((1, 0), (1, 0), (0, 0)))
    h, w = rgb.height, rgb.width
    total = (
        s[side : side + h, side : side + w]
        - s[:h, side : side + w]
        - s[side : side + h, :w]
        + s[:h, :w]
    )
    return RgbImage((total // (side * side)).astype(np.uint8))


def _compress(raw: bytes, opts: EncodeOptions) -> bytes:
    if opts.codec_id == CODEC_STORE:
        return bytes([CODEC_STORE]) + raw
    return bytes([CODEC_ZLIB]) + zlib.compress(raw, opts.zlib_level)


def _decompress(payload: bytes, expected_size: int, what: str) -> bytes:
    if len(payload) < 1:
        raise TruncatedPayloadError(f"{what} payload empty")
    codec = payload[0]
    body = payload[1:]
    if codec == CODEC_STORE:
        raw = body
    elif codec == CODEC_ZLIB:
        try:
            raw = zlib.decompress(body)
        except zlib.error as e:
            raise PayloadError(f"{what} payload corrupt: {e}")
    else:
        raise UnknownCodecError(f"{what} payload has unknown codec id {codec}")
    if len(raw) != expected_size:
        raise PayloadError(
            f"{what} payload decodes to {len(raw)} bytes, expected {expected_size}"
        )
    return raw


def encode_frame(frame: RgbdFrame, opts: EncodeOptions | None = None) -> bytes:
    """Serialize a frame to header + payload bytes (no length prefix)."""
    opts = opts or EncodeOptions()
    scale = DEPTH_SCALE_QUARTER_MM if opts.quarter_mm else DEPTH_SCALE_MM
    rgb_payload = _compress(frame.rgb.data.tobytes(), opts)
    depth_q = quantize_depth(frame.depth.data, scale)
    depth_payload = _compress(depth_q.astype("<u2").tobytes(), opts)
    flags = FLAG_DEPTH_PRESENT
    if opts.defocused:
        flags |= FLAG_DEFOCUSED
    if opts.quarter_mm:
        flags |= FLAG_QUARTER_MM
    crc = zlib.crc32(depth_payload, zlib.crc32(rgb_payload))
    header = FrameHeader(
        version=WIRE_VERSION,
        camera_id=frame.camera_id,
        flags=flags,
        frame_seq=frame.frame_seq,
        capture_ts_ns=frame.capture_ts_ns,
        width=frame.rgb.width,
        height=frame.rgb.height,
        rgb_len=len(rgb_payload),
        depth_len=len(depth_payload),
        crc32=crc,
    )
    return header.pack() + rgb_payload + depth_payload


def decode_frame(blob: bytes) -> tuple[RgbdFrame, FrameHeader]:
    """Inverse of :func:`encode_frame` up to depth quantization.

    Raises a distinct FrameDecodeError subclass for bad magic, version,
    CRC mismatch, truncation and payload corruption.
    """
    header = FrameHeader.unpack(blob)
    expected = HEADER_SIZE + header.rgb_len + header.depth_len
    if len(blob) != expected:
        raise TruncatedPayloadError(
            f"frame is {len(blob)} bytes, header implies {expected}"
        )
    rgb_payload = blob[HEADER_SIZE : HEADER_SIZE + header.rgb_len]
    depth_payload = blob[HEADER_SIZE + header.rgb_len :]
    crc = zlib.crc32(depth_payload, zlib.crc32(rgb_payload))
    if crc != header.crc32:
        raise CrcMismatchError(
            f"payload crc {crc:#010x} != header crc {header.crc32:#010x}"
        )
    w, h = header.width, header.height
    if w < 1 or h < 1 or w * h > 64_000_000:
        raise PayloadError(f"implausible frame size {w}x{h}")
    rgb_raw = _decompress(rgb_payload, w * h * 3, "rgb")
    rgb = RgbImage(np.frombuffer(rgb_raw, dtype=np.uint8).reshape(h, w, 3).copy())
    if header.flags & FLAG_DEPTH_PRESENT:
        depth_raw = _decompress(depth_payload, w * h * 2, "depth")
        q = np.frombuffer(depth_raw, dtype="<u2").reshape(h, w)
        depth = DepthImage(dequantize_depth(q, header.depth_scale))
    else:
        depth = DepthImage(np.zeros((h, w)))
    frame = RgbdFrame(
        rgb=rgb,
        depth=depth,
        capture_ts_ns=header.capture_ts_ns,
        camera_id=header.camera_id,
        frame_seq=header.frame_seq,
    )
    return frame, header
