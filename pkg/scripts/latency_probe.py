#!/usr/bin/env python3
"""End-to-end latency probe over the in-process loopback pipeline.

With --fake-clock plus injected stage delays, the report reproduces the
injected values exactly; without, it measures real compute time per stage.
"""

import argparse

from pointstream.pipeline import StageDelaysMs, run_loopback_pipeline
from pointstream.simulator import Rect, Scene, default_rig
from pointstream.stream import FakeClock, SystemClock, latency_report
from pointstream.upsample import BilateralParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=30)
    ap.add_argument("--fake-clock", action="store_true")
    ap.add_argument(
        "--delays", metavar="P,S,N,D", default=None,
        help="inject per-stage delays in ms (process,send,network,decode)",
    )
    args = ap.parse_args()

    scene = Scene(
        [Rect(origin=(5.0, -2.5, 0.2), edge_u=(0.0, 5.0, 0.0),
              edge_v=(0.0, 0.0, 2.6), color=(130, 140, 150))],
        seed=1,
    )
    rig = default_rig(width=320, height=180, channels=32, horizontal_step_deg=1.0)
    delays = StageDelaysMs()
    if args.delays:
        p, s, n, d = (float(x) for x in args.delays.split(","))
        delays = StageDelaysMs(process=p, send=s, network=n, decode=d)
    clock = FakeClock() if args.fake_clock else SystemClock()
    result = run_loopback_pipeline(
        scene, rig, frames=args.frames,
        bilateral=BilateralParams(window_radius=3),
        clock=clock, stage_delays=delays, pace=args.fake_clock,
    )
    print(latency_report(result.records).format())


if __name__ == "__main__":
    main()
