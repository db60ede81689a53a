"""RGB-D frame and its fixed wire header.

Wire layout of one encoded frame (everything little-endian):

    magic 'PSF1' (4) | version u8 | camera_id u8 | flags u16 |
    frame_seq u64 | capture_ts_ns u64 | width u32 | height u32 |
    rgb_len u32 | depth_len u32 | crc32 u32
    -> 44 header bytes, then the rgb payload, then the depth payload.

Each payload starts with a one-byte codec id. The CRC covers both
payloads (codec bytes included), not the header; header fields are
validated structurally. Depth is quantized to u16 millimeters (0 =
invalid, 65535 = saturated at 65.535 m); a quarter-millimeter mode is
available behind a flag for near-field scenes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from pointstream.projection import DepthImage, RgbImage

MAGIC = b"PSF1"
WIRE_VERSION = 1

FLAG_DEFOCUSED = 0x0001
FLAG_DEPTH_PRESENT = 0x0002
FLAG_QUARTER_MM = 0x0004

_HEADER = struct.Struct("<4sBBHQQIIIII")
HEADER_SIZE = _HEADER.size  # 44

DEPTH_SCALE_MM = 1e-3
DEPTH_SCALE_QUARTER_MM = 0.25e-3
DEPTH_MAX_QUANT = 65535


class FrameDecodeError(ValueError):
    """Base class for wire/codec decode failures."""


class BadMagicError(FrameDecodeError):
    pass


class UnsupportedVersionError(FrameDecodeError):
    pass


class UnknownCodecError(FrameDecodeError):
    pass


class CrcMismatchError(FrameDecodeError):
    pass


class TruncatedPayloadError(FrameDecodeError):
    pass


class PayloadError(FrameDecodeError):
    """Payload decompressed to garbage (wrong size or corrupt stream)."""


@dataclass
class RgbdFrame:
    rgb: RgbImage
    depth: DepthImage
    capture_ts_ns: int
    camera_id: int = 0
    frame_seq: int = 0

    def __post_init__(self):
        if (self.rgb.width, self.rgb.height) != (self.depth.width, self.depth.height):
            raise ValueError("rgb and depth dimensions must match")


@dataclass
class FrameHeader:
    version: int
    camera_id: int
    flags: int
    frame_seq: int
    capture_ts_ns: int
    width: int
    height: int
    rgb_len: int
    depth_len: int
    crc32: int

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC,
            self.version,
            self.camera_id,
            self.flags,
            self.frame_seq,
            self.capture_ts_ns,
            self.width,
            self.height,
            self.rgb_len,
            self.depth_len,
            self.crc32,
        )

    @staticmethod
    def unpack(buf: bytes) -> "FrameHeader":
        if len(buf) < HEADER_SIZE:
            raise TruncatedPayloadError(
                f"header needs {HEADER_SIZE} bytes, have {len(buf)}"
            )
        magic, ver, cam, flags, seq, ts, w, h, rl, dl, crc = _HEADER.unpack_from(buf)
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}")
        if ver != WIRE_VERSION:
            raise UnsupportedVersionError(f"unsupported wire version {ver}")
        return FrameHeader(ver, cam, flags, seq, ts, w, h, rl, dl, crc)

    @property
    def depth_scale(self) -> float:
        return DEPTH_SCALE_QUARTER_MM if self.flags & FLAG_QUARTER_MM else DEPTH_SCALE_MM


def quantize_depth(depth: np.ndarray, scale: float = DEPTH_SCALE_MM) -> np.ndarray:
    """Depth meters -> u16 steps of ``scale``; 0 stays the invalid sentinel.

    Values beyond the representable range saturate to 65535. Valid depths
    under half a step collapse to 0 (invalid); at these scales that is
    sub-millimeter range, well inside any LiDAR's minimum.
    """
    q = np.rint(np.asarray(depth, dtype=np.float64) / scale)
    return np.clip(q, 0, DEPTH_MAX_QUANT).astype(np.uint16)


def dequantize_depth(q: np.ndarray, scale: float = DEPTH_SCALE_MM) -> np.ndarray:
    return np.asarray(q, dtype=np.float64) * scale


def depth_saturation_m(scale: float = DEPTH_SCALE_MM) -> float:
    """Decoded value marking a saturated (out-of-range) depth sample."""
    return DEPTH_MAX_QUANT * scale
