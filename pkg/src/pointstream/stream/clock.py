"""Clock abstraction so pacing and interval logic are testable.

All times are integer nanoseconds. The system clock is monotonic; the
fake clock only moves when slept, which makes every deadline and
injected delay exact in tests.
"""

from __future__ import annotations

import time


class SystemClock:
    def now_ns(self) -> int:
        return time.monotonic_ns()

    def sleep_ns(self, duration_ns: int) -> None:
        if duration_ns > 0:
            time.sleep(duration_ns / 1e9)

    def sleep_until_ns(self, deadline_ns: int) -> None:
        self.sleep_ns(deadline_ns - self.now_ns())


class FakeClock:
    def __init__(self, start_ns: int = 0):
        self._now = int(start_ns)

    def now_ns(self) -> int:
        return self._now

    def sleep_ns(self, duration_ns: int) -> None:
        if duration_ns > 0:
            self._now += int(duration_ns)

    def sleep_until_ns(self, deadline_ns: int) -> None:
        if deadline_ns > self._now:
            self._now = int(deadline_ns)
