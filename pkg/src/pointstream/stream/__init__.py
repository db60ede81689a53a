from pointstream.stream.clock import FakeClock, SystemClock
from pointstream.stream.codec import (
    CODEC_STORE,
    CODEC_ZLIB,
    EncodeOptions,
    decode_frame,
    defocus,
    encode_frame,
)
from pointstream.stream.frame import (
    BadMagicError,
    CrcMismatchError,
    FrameDecodeError,
    FrameHeader,
    PayloadError,
    RgbdFrame,
    TruncatedPayloadError,
    UnknownCodecError,
    UnsupportedVersionError,
    depth_saturation_m,
    dequantize_depth,
    quantize_depth,
)
from pointstream.stream.latency import (
    LatencyDataError,
    LatencyRecord,
    LatencyReport,
    StatSummary,
    latency_report,
)
from pointstream.stream.wire import (
    LoopbackTransport,
    ReceivedFrame,
    ReceiveError,
    SendReport,
    SocketTransport,
    StreamParser,
    frame_deadline_ns,
    receive_frames,
    send_frames,
    wrap_frame,
)

__all__ = [
    "FakeClock",
    "SystemClock",
    "EncodeOptions",
    "encode_frame",
    "decode_frame",
    "defocus",
    "CODEC_STORE",
    "CODEC_ZLIB",
    "RgbdFrame",
    "FrameHeader",
    "FrameDecodeError",
    "BadMagicError",
    "UnsupportedVersionError",
    "UnknownCodecError",
    "CrcMismatchError",
    "TruncatedPayloadError",
    "PayloadError",
    "quantize_depth",
    "dequantize_depth",
    "depth_saturation_m",
    "LatencyRecord",
    "LatencyReport",
    "LatencyDataError",
    "StatSummary",
    "latency_report",
    "LoopbackTransport",
    "SocketTransport",
    "StreamParser",
    "ReceivedFrame",
    "ReceiveError",
    "SendReport",
    "send_frames",
    "receive_frames",
    "frame_deadline_ns",
    "wrap_frame",
]
