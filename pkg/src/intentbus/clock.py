"""Injectable clocks.

All timestamps in the system are integer nanoseconds since the scenario
epoch.  Scenario runs use LogicalClock for full determinism; live gateway
runs use WallClock (monotonic, zeroed at construction).
"""

from __future__ import annotations

import time

from .errors import ClockError


class LogicalClock:
    """Manually advanced clock; never moves backwards."""

    def __init__(self, start_ns: int = 0):
        self._now_ns = start_ns

    def now_ns(self) -> int:
        return self._now_ns

    def advance_to(self, t_ns: int) -> None:
        if t_ns < self._now_ns:
            raise ClockError(f"advance_to {t_ns} < current {self._now_ns}")
        self._now_ns = t_ns

    def advance_by(self, dt_ns: int) -> None:
        self.advance_to(self._now_ns + dt_ns)


class WallClock:
    """Monotonic wall clock reporting nanoseconds since construction."""

    def __init__(self):
        self._epoch = time.monotonic_ns()

    def now_ns(self) -> int:
        return time.monotonic_ns() - self._epoch


Clock = LogicalClock | WallClock


def seconds_to_ns(seconds: float) -> int:
    return int(round(seconds * 1e9))


def ns_to_seconds(t_ns: int) -> float:
    return t_ns / 1e9
