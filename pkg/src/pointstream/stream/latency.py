"""Per-frame latency records and capture-to-render statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

_STAGES = (
    ("process", "capture_ns", "processed_ns"),
    ("send", "processed_ns", "sent_ns"),
    ("network", "sent_ns", "received_ns"),
    ("decode", "received_ns", "decoded_ns"),
)


class LatencyDataError(ValueError):
    pass


@dataclass
class LatencyRecord:
    capture_ns: int
    processed_ns: int
    sent_ns: int
    received_ns: int
    decoded_ns: int
    frame_seq: int = 0

    def __post_init__(self):
        order = [self.capture_ns, self.processed_ns, self.sent_ns,
                 self.received_ns, self.decoded_ns]
        if any(b < a for a, b in zip(order, order[1:])):
            raise LatencyDataError(
                f"frame {self.frame_seq}: timestamps decrease along the pipeline"
            )

    @property
    def end_to_end_ns(self) -> int:
        return self.decoded_ns - self.capture_ns


@dataclass
class StatSummary:
    mean_ms: float
    sd_ms: float
    min_ms: float
    max_ms: float
    p99_ms: float

    def format(self) -> str:
        return f"mean {self.mean_ms:.2f} ms (SD: {self.sd_ms:.2f})"


@dataclass
class LatencyReport:
    count: int
    end_to_end: StatSummary
    stages: dict[str, StatSummary]

    def format(self) -> str:
        lines = [f"latency over {self.count} frames:"]
        lines.append(
            f"  end_to_end {self.end_to_end.format()} "
            f"min {self.end_to_end.min_ms:.2f} max {self.end_to_end.max_ms:.2f} "
            f"p99 {self.end_to_end.p99_ms:.2f}"
        )
        for name, s in self.stages.items():
            lines.append(f"  stage {name} {s.format()}")
        return "\n".join(lines)


def _summary(values_ms: list[float]) -> StatSummary:
    n = len(values_ms)
    mean = sum(values_ms) / n
    var = sum((v - mean) ** 2 for v in values_ms) / n  # population
    ordered = sorted(values_ms)
    p99 = ordered[max(0, math.ceil(0.99 * n) - 1)]  # nearest-rank
    return StatSummary(
        mean_ms=mean,
        sd_ms=math.sqrt(var),
        min_ms=ordered[0],
        max_ms=ordered[-1],
        p99_ms=p99,
    )


def latency_report(records: list[LatencyRecord]) -> LatencyReport:
    """Population statistics of end-to-end latency and each stage delta.

    Records must be well ordered (the LatencyRecord constructor enforces
    it); an empty list is a parameter error. Stage deltas always sum to
    the end-to-end value since the stages tile the pipeline.
    """
    if not records:
        raise ValueError("latency_report needs at least one record")
    e2e = [r.end_to_end_ns / 1e6 for r in records]
    stages = {}
    for name, a, b in _STAGES:
        stages[name] = _summary(
            [(getattr(r, b) - getattr(r, a)) / 1e6 for r in records]
        )
    return LatencyReport(count=len(records), end_to_end=_summary(e2e), stages=stages)
