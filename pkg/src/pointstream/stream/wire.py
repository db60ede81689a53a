"""Length-prefixed frame transport with pacing and corruption recovery.

Wire stream: repeated [u32 LE total length][frame blob] records, where
the blob is the output of ``encode_frame`` (44-byte header + payloads).

The receiver trusts the framing only while the length prefix and the
header-implied length agree. On disagreement (or bad magic / implausible
length) it rescans for the next plausible frame start, so a single
corrupted byte costs at most the frame it landed in; CRC-level damage is
confined to one frame by construction.
"""

from __future__ import annotations

import socket
import struct
from collections import deque
from dataclasses import dataclass, field

from pointstream.stream.clock import SystemClock
from pointstream.stream.codec import EncodeOptions, decode_frame, encode_frame
from pointstream.stream.frame import (
    HEADER_SIZE,
    MAGIC,
    BadMagicError,
    FrameDecodeError,
    FrameHeader,
    RgbdFrame,
    TruncatedPayloadError,
)

_PREFIX = struct.Struct("<I")
DEFAULT_MAX_FRAME_BYTES = 64 * 1024 * 1024
DEFAULT_QUEUE_CAPACITY = 4


class LoopbackTransport:
    """In-memory byte pipe; optionally stalls a clock on every write.

    read() returns b'' once drained, which the receiver treats as end of
    stream, so write everything before reading (single-threaded use).
    """

    def __init__(self, *, clock=None, write_stall_ns: int = 0):
        self._buf = bytearray()
        self._clock = clock
        self._stall = int(write_stall_ns)

    def write(self, data: bytes) -> None:
        if self._stall and self._clock is not None:
            self._clock.sleep_ns(self._stall)
        self._buf.extend(data)

    def read(self, n: int) -> bytes:
        take = self._buf[:n]
        del self._buf[: len(take)]
        return bytes(take)

    def close(self) -> None:
        pass

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)


class SocketTransport:
    """Reliable ordered byte stream over a connected socket."""

    def __init__(self, sock: socket.socket):
        self._sock = sock

    def write(self, data: bytes) -> None:
        self._sock.sendall(data)

    def read(self, n: int) -> bytes:
        return self._sock.recv(n)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


@dataclass
class ReceivedFrame:
    frame: RgbdFrame
    header: FrameHeader
    received_ns: int
    decoded_ns: int


@dataclass
class ReceiveError:
    error: FrameDecodeError
    received_ns: int


class StreamParser:
    """Incremental wire parser; feed bytes, collect frames and errors."""

    def __init__(self, *, clock=None, max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES):
        self._buf = bytearray()
        self._clock = clock or SystemClock()
        self._max = max_frame_bytes

    def feed(self, data: bytes) -> list[ReceivedFrame | ReceiveError]:
        self._buf.extend(data)
        return self._drain(eof=False)

    def finish(self) -> list[ReceivedFrame | ReceiveError]:
        return self._drain(eof=True)

    def _error(self, exc: FrameDecodeError) -> ReceiveError:
        return ReceiveError(error=exc, received_ns=self._clock.now_ns())

    def _resync(self) -> bool:
        """Drop bytes up to the next plausible frame start.

        Looks for the magic at least one byte past the current position
        and rewinds 4 bytes for its length prefix. Returns False when no
        candidate is in the buffer (all but a prefix-sized tail is
        discarded so a magic split across feeds is not lost).
        """
        pos = self._buf.find(MAGIC, 5)
        if pos < 0:
            if len(self._buf) > 8:
                del self._buf[: len(self._buf) - 8]
            else:
                del self._buf[:1]
            return False
        del self._buf[: pos - 4]
        return True

    def _frame_at_head(self):
        """(length, blob) if a complete, consistently-framed record is
        buffered; None if more bytes are needed; raises on bad framing."""
        if len(self._buf) < 4:
            return None
        (length,) = _PREFIX.unpack_from(self._buf)
        if length < HEADER_SIZE or length > self._max:
            raise BadMagicError(f"implausible frame length {length}")
        if len(self._buf) < 4 + HEADER_SIZE:
            return None
        header = FrameHeader.unpack(bytes(self._buf[4 : 4 + HEADER_SIZE]))
        implied = HEADER_SIZE + header.rgb_len + header.depth_len
        if implied != length:
            raise BadMagicError(
                f"length prefix {length} disagrees with header ({implied})"
            )
        if len(self._buf) < 4 + length:
            return None
        return length, bytes(self._buf[4 : 4 + length])

    def _drain(self, eof: bool) -> list[ReceivedFrame | ReceiveError]:
        out: list[ReceivedFrame | ReceiveError] = []
        while self._buf:
            try:
                got = self._frame_at_head()
            except FrameDecodeError as exc:
                out.append(self._error(exc))
                if not self._resync():
                    if eof:
                        self._buf.clear()
                    break
                continue
            if got is None:
                if not eof:
                    break
                # Incomplete tail at end of stream: either a truncated
                # final frame or the wreckage of a corrupted prefix.
                out.append(
                    self._error(
                        TruncatedPayloadError(
                            f"stream ended with {len(self._buf)} leftover bytes"
                        )
                    )
                )
                if not self._resync():
                    self._buf.clear()
                    break
                continue
            length, blob = got
            received_ns = self._clock.now_ns()
            del self._buf[: 4 + length]
            try:
                frame, header = decode_frame(blob)
            except FrameDecodeError as exc:
                out.append(self._error(exc))
                continue
            out.append(
                ReceivedFrame(
                    frame=frame,
                    header=header,
                    received_ns=received_ns,
                    decoded_ns=self._clock.now_ns(),
                )
            )
        return out


def wrap_frame(blob: bytes) -> bytes:
    return _PREFIX.pack(len(blob)) + blob


@dataclass
class SendReport:
    sent: int = 0
    dropped: int = 0
    deadlines_ns: list[int] = field(default_factory=list)
    sent_ns: list[int] = field(default_factory=list)
    sent_seqs: list[int] = field(default_factory=list)
    dropped_seqs: list[int] = field(default_factory=list)


def frame_deadline_ns(start_ns: int, n: int, fps: float) -> int:
    return start_ns + round(n * 1e9 / fps)


def send_frames(
    frames,
    transport,
    fps: float,
    *,
    clock=None,
    queue_capacity: int = DEFAULT_QUEUE_CAPACITY,
    encode_opts: EncodeOptions | None = None,
    start_ns: int | None = None,
    on_sent=None,
) -> SendReport:
    """Write frames as length-prefixed blobs paced at ``fps``.

    Frame n is enqueued at deadline start + n/fps; the writer drains the
    queue greedily. If the transport cannot keep up, the queue caps at
    ``queue_capacity`` and the OLDEST queued frame is dropped, keeping
    the stream fresh. Fully deterministic under a fake clock.
    """
    if not (fps > 0):
        raise ValueError("fps must be > 0")
    if queue_capacity < 1:
        raise ValueError("queue_capacity must be >= 1")
    clock = clock or SystemClock()
    opts = encode_opts or EncodeOptions()
    report = SendReport()
    start = clock.now_ns() if start_ns is None else start_ns

    it = iter(frames)
    n = 0
    nxt = next(it, None)
    queue: deque[tuple[int, bytes]] = deque()

    def _enqueue(frame):
        nonlocal n, nxt
        report.deadlines_ns.append(frame_deadline_ns(start, n, fps))
        queue.append((frame.frame_seq, wrap_frame(encode_frame(frame, opts))))
        if len(queue) > queue_capacity:
            seq, _ = queue.popleft()
            report.dropped += 1
            report.dropped_seqs.append(seq)
        n += 1
        nxt = next(it, None)

    while True:
        if nxt is not None:
            deadline = frame_deadline_ns(start, n, fps)
            if deadline <= clock.now_ns():
                _enqueue(nxt)
                continue
            if not queue:
                clock.sleep_until_ns(deadline)
                _enqueue(nxt)
                continue
        if not queue:
            break  # only reachable once the source is exhausted
        seq, blob = queue.popleft()
        transport.write(blob)
        now = clock.now_ns()
        report.sent += 1
        report.sent_ns.append(now)
        report.sent_seqs.append(seq)
        if on_sent is not None:
            on_sent(seq, now)
    return report


def receive_frames(
    transport,
    *,
    clock=None,
    max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES,
    chunk_size: int = 65536,
):
    """Yield ReceivedFrame/ReceiveError items until the transport closes.

    Decode failures are surfaced per frame; the stream keeps going.
    """
    parser = StreamParser(clock=clock, max_frame_bytes=max_frame_bytes)
    while True:
        data = transport.read(chunk_size)
        if not data:
            yield from parser.finish()
            return
        yield from parser.feed(data)
