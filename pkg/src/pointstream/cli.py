"""Operator command suite.

Subcommands: simulate, pipeline, receive, recolor, bench,
config validate. Exit codes: 0 success, 1 runtime failure,
2 usage / file / parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
import time
from pathlib import Path

import numpy as np

import pointstream
from pointstream.colorxfer import (
    InsufficientOverlapError,
    TransferParams,
    transfer_colors,
)
from pointstream.config import ConfigError, PipelineConfig, load_config
from pointstream.core.plyio import PlyError, read_ply, write_ply
from pointstream.pipeline import (
    CaptureProcessor,
    ReceiverConfig,
    ReceiverSession,
    StageDelaysMs,
    run_loopback_pipeline,
)
from pointstream.simulator.rig import run_rig
from pointstream.simulator.scenefile import SceneFileError, load_scene
from pointstream.stream.clock import FakeClock, SystemClock
from pointstream.stream.codec import EncodeOptions
from pointstream.stream.latency import latency_report
from pointstream.stream.wire import (
    ReceiveError,
    SocketTransport,
    receive_frames,
    send_frames,
)

log = logging.getLogger("pointstream")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _write_ppm(path, rgb) -> None:
    with open(path, "wb") as f:
        f.write(f"P6\n{rgb.width} {rgb.height}\n255\n".encode("ascii"))
        f.write(rgb.data.tobytes())


def _make_clock(args):
    return FakeClock() if args.fake_clock else SystemClock()


def _load_config_or_default(args) -> PipelineConfig:
    if args.config:
        return load_config(args.config)
    return PipelineConfig()


def _scene_for(cfg: PipelineConfig, args, scene_path=None):
    path = scene_path or cfg.scene
    if path is None:
        raise SceneFileError("no scene file given (config 'scene' or argument)")
    scene = load_scene(path)
    if args.seed is not None:
        scene.seed = args.seed
    return scene


def cmd_simulate(args) -> int:
    cfg = _load_config_or_default(args)
    scene = _scene_for(cfg, args, args.scene)
    rig = cfg.build_rig()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    events = []
    for event in run_rig(scene, rig, args.duration):
        scan_file = f"scan_{event.seq:04d}.ply"
        frame_file = f"frame_{event.seq:04d}.ppm"
        write_ply(event.scan, out / scan_file)
        _write_ppm(out / frame_file, event.frame)
        events.append(
            {
                "seq": event.seq,
                "t": event.t,
                "sensor_id": event.sensor_id,
                "points": len(event.scan),
                "scan": scan_file,
                "frame": frame_file,
            }
        )
    manifest = {
        "generator": f"pointstream {pointstream.__version__}",
        "scene": str(args.scene or cfg.scene),
        "seed": scene.seed,
        "duration_s": args.duration,
        "events": events,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"simulate: wrote {len(events)} events to {out}")
    return EXIT_OK


def _parse_delays(text: str | None) -> StageDelaysMs:
    if not text:
        return StageDelaysMs()
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError("stage delays need 4 comma-separated values (ms)")
    return StageDelaysMs(*parts)


def cmd_pipeline(args) -> int:
    cfg = _load_config_or_default(args)
    scene = _scene_for(cfg, args)
    rig = cfg.build_rig()
    clock = _make_clock(args)
    delays = _parse_delays(args.inject_stage_delays)
    opts = EncodeOptions(
        codec_id=cfg.stream.codec_id,
        zlib_level=cfg.stream.zlib_level,
        defocused=cfg.stream.defocus_radius > 0,
    )
    if args.endpoint:
        return _pipeline_to_endpoint(args, cfg, scene, rig, clock, opts)
    result = run_loopback_pipeline(
        scene,
        rig,
        frames=args.frames,
        fusion=cfg.fusion,
        bilateral=cfg.bilateral,
        encode_opts=opts,
        defocus_radius=cfg.stream.defocus_radius,
        clock=clock,
        stage_delays=delays,
    )
    print(
        f"pipeline: sent {result.frames_sent}, decoded {result.frames_decoded}, "
        f"drops {result.frames_dropped}, decode errors {result.decode_errors}"
    )
    if result.records:
        print(latency_report(result.records).format())
    return EXIT_OK


def _pipeline_to_endpoint(args, cfg, scene, rig, clock, opts) -> int:
    host, _, port = cfg.stream.endpoint.rpartition(":")
    retries = 4
    sock = None
    for attempt in range(retries):
        try:
            sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=5)
            break
        except OSError as e:
            log.warning("connect attempt %d failed: %s", attempt + 1, e)
            time.sleep(min(0.1 * 2**attempt, 1.0))
    if sock is None:
        print(f"pipeline: cannot reach {cfg.stream.endpoint}", file=sys.stderr)
        return EXIT_RUNTIME
    transport = SocketTransport(sock)
    proc = CaptureProcessor(
        rig.camera,
        cfg.fusion,
        cfg.bilateral,
        defocus_radius=cfg.stream.defocus_radius,
    )
    start_ns = clock.now_ns()

    def frames():
        duration = args.frames / rig.camera_fps + 1.0 / rig.camera_fps
        for event in run_rig(scene, rig, duration):
            if event.seq >= args.frames:
                return
            capture_ns = start_ns + round(event.t * 1e9)
            yield proc.process(event, capture_ns)

    try:
        report = send_frames(
            frames(),
            transport,
            cfg.stream.fps,
            clock=clock,
            queue_capacity=cfg.stream.queue_capacity,
            encode_opts=opts,
            start_ns=start_ns,
        )
    finally:
        transport.close()
    print(f"pipeline: sent {report.sent}, drops {report.dropped}")
    return EXIT_OK


def cmd_receive(args) -> int:
    cfg = _load_config_or_default(args)
    rig = cfg.build_rig()
    static_cloud = read_ply(args.static)
    if not static_cloud.has_colors:
        print("receive: static PLY must carry colors", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    def writer(n, cloud):
        path = out / f"snapshot_{n:04d}.ply"
        write_ply(cloud, path)
        log.info("wrote %s (%d points)", path, len(cloud))

    session = ReceiverSession(
        static_cloud,
        ReceiverConfig(
            cam=rig.camera,
            snapshot_interval_frames=cfg.snapshot_interval_frames,
            recolor_interval_s=cfg.recolor_interval_s,
        ),
        cfg.transfer,
        snapshot_writer=writer,
    )
    clock = _make_clock(args)
    errors = 0
    if args.input:
        class _FileTransport:
            def __init__(self, path):
                self._f = open(path, "rb")

            def read(self, n):
                return self._f.read(n)

        source = receive_frames(_FileTransport(args.input), clock=clock)
        for item in source:
            if isinstance(item, ReceiveError):
                errors += 1
                log.warning("decode error: %s", item.error)
                continue
            session.handle_frame(item.frame)
    else:
        host, _, port = (args.listen or cfg.stream.endpoint).rpartition(":")
        srv = socket.create_server((host or "127.0.0.1", int(port)))
        conn, peer = srv.accept()
        log.info("connection from %s", peer)
        transport = SocketTransport(conn)
        try:
            for item in receive_frames(transport, clock=clock):
                if isinstance(item, ReceiveError):
                    errors += 1
                    log.warning("decode error: %s", item.error)
                    continue
                session.handle_frame(item.frame)
        finally:
            transport.close()
            srv.close()
    print(
        f"receive: {session.frames_seen} frames, {errors} decode errors, "
        f"{session.snapshots} snapshots, {session.recolors} recolors"
    )
    return EXIT_OK


def cmd_recolor(args) -> int:
    static_cloud = read_ply(args.static)
    dynamic_cloud = read_ply(args.dynamic)
    params = TransferParams(
        overlap_threshold=args.threshold,
        clusters=args.clusters,
        alpha=args.alpha,
        min_pairs=args.min_pairs,
        kmeans_seed=args.seed if args.seed is not None else 0,
    )
    try:
        recolored, report = transfer_colors(static_cloud, dynamic_cloud, params)
    except InsufficientOverlapError as e:
        print(f"recolor: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    write_ply(recolored, args.out)
    if args.dump_lab:
        np.save(args.dump_lab, report.out_lab)
    print(f"recolor: {report.pair_count} overlap pairs")
    counts = ", ".join(str(int(c)) for c in report.cluster_pair_counts)
    print(f"recolor: per-cluster pair counts: [{counts}]")

    def fmt(stats):
        m, s = stats.mean, stats.std
        return (
            f"L {m[0]:.3f}/{s[0]:.3f} a {m[1]:.3f}/{s[1]:.3f} b {m[2]:.3f}/{s[2]:.3f}"
        )

    print(f"recolor: static pair stats before (mean/std): {fmt(report.stats_before)}")
    print(f"recolor: dynamic pair stats          : {fmt(report.dst_stats)}")
    print(f"recolor: static pair stats after     : {fmt(report.stats_after)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load_config_or_default(args)
    scene = _scene_for(cfg, args)
    rig = cfg.build_rig()
    clock = _make_clock(args)
    opts = EncodeOptions(
        codec_id=args.codec if args.codec is not None else cfg.stream.codec_id,
        zlib_level=cfg.stream.zlib_level,
        defocused=cfg.stream.defocus_radius > 0,
    )
    wall0 = time.perf_counter()
    result = run_loopback_pipeline(
        scene,
        rig,
        frames=args.frames,
        fusion=cfg.fusion,
        bilateral=cfg.bilateral,
        encode_opts=opts,
        defocus_radius=cfg.stream.defocus_radius,
        clock=clock,
        pace=not args.no_pacing,
    )
    wall = time.perf_counter() - wall0
    fps = result.frames_sent / wall if wall > 0 else float("inf")
    ratio = result.raw_bytes / result.wire_bytes if result.wire_bytes else 0.0
    records = []
    for trace, rec in zip(result.traces, result.records):
        records.append(
            {
                "type": "frame",
                "seq": trace.seq,
                "points_in": trace.points_in,
                "raw_bytes": trace.raw_bytes,
                "wire_bytes": trace.wire_bytes,
                "wall_process_ms": (rec.processed_ns - rec.capture_ns) / 1e6,
                "wall_send_ms": (rec.sent_ns - rec.processed_ns) / 1e6,
                "wall_decode_ms": (rec.decoded_ns - rec.received_ns) / 1e6,
            }
        )
    summary = {
        "type": "summary",
        "resolution": f"{rig.camera.intrinsics.width}x{rig.camera.intrinsics.height}",
        "frames": result.frames_sent,
        "decoded": result.frames_decoded,
        "drops": result.frames_dropped,
        "decode_errors": result.decode_errors,
        "codec_id": opts.codec_id,
        "compression_ratio": ratio,
        "wall_elapsed_s": wall,
        "wall_fps": fps,
        "timing_fields": ["wall_elapsed_s", "wall_fps"],
    }
    lines = [json.dumps(r, sort_keys=True) for r in records]
    lines.append(json.dumps(summary, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(
        f"bench: {result.frames_sent} frames at {fps:.1f} fps, "
        f"ratio {ratio:.2f}, drops {result.frames_dropped}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_config_validate(args) -> int:
    cfg = load_config(args.path)
    cfg.build_rig()
    if cfg.scene:
        scene_path = Path(cfg.scene)
        if not scene_path.is_absolute():
            scene_path = Path(args.path).parent / scene_path
        if scene_path.exists():
            load_scene(scene_path)
    print(f"config validate: {args.path} OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pointstream",
        description="Desk-scale live point-cloud pipeline toolkit",
    )
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--seed", type=int, default=None, help="override scene seed")
    p.add_argument("--fake-clock", action="store_true", help="deterministic virtual time")
    p.add_argument("--log-level", default="warning")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a deterministic scan/frame dataset")
    s.add_argument("scene", help="scene JSON file")
    s.add_argument("--duration", type=float, default=1.0, help="seconds of capture")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(fn=cmd_simulate)

    s = sub.add_parser("pipeline", help="run capture -> stream (loopback or TCP)")
    s.add_argument("--frames", type=int, default=90)
    s.add_argument("--endpoint", action="store_true",
                   help="connect to config stream.endpoint instead of loopback")
    s.add_argument("--inject-stage-delays", metavar="P,S,N,D",
                   help="artificial per-stage delays in ms")
    s.set_defaults(fn=cmd_pipeline)

    s = sub.add_parser("receive", help="receive frames, snapshot and recolor")
    s.add_argument("--static", required=True, help="pre-captured static PLY")
    s.add_argument("--input", help="read wire bytes from file instead of listening")
    s.add_argument("--listen", help="host:port override")
    s.add_argument("--out", help="snapshot directory (default: config output_dir)")
    s.set_defaults(fn=cmd_receive)

    s = sub.add_parser("recolor", help="one-shot static-cloud color transfer")
    s.add_argument("--static", required=True)
    s.add_argument("--dynamic", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=float, default=0.15, help="overlap distance (m)")
    s.add_argument("--clusters", type=int, default=16)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--min-pairs", type=int, default=100, dest="min_pairs")
    s.add_argument("--dump-lab", help="write pre-quantization Lab colors (.npy)")
    s.set_defaults(fn=cmd_recolor)

    s = sub.add_parser("bench", help="loopback throughput/codec metrics")
    s.add_argument("--frames", type=int, default=300)
    s.add_argument("--codec", type=int, choices=(0, 1), default=None)
    s.add_argument("--no-pacing", action="store_true",
                   help="run flat out instead of pacing to the rig cadence")
    s.add_argument("--out", help="metrics JSONL file (default: stdout)")
    s.set_defaults(fn=cmd_bench)

    s = sub.add_parser("config", help="config file tools")
    csub = s.add_subparsers(dest="config_command", required=True)
    v = csub.add_parser("validate", help="parse and check a config file")
    v.add_argument("path")
    v.set_defaults(fn=cmd_config_validate)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())
    try:
        return args.fn(args)
    except (ConfigError, SceneFileError, PlyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
