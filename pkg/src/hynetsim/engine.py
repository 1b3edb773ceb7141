"""Single-queue discrete-event engine on an integer-nanosecond clock."""

from __future__ import annotations

import heapq
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable

NS_PER_SECOND = 1_000_000_000


def seconds_to_ns(seconds: float) -> int:
    """Convert seconds to integer nanoseconds, rounding to nearest."""
    return round(seconds * NS_PER_SECOND)


def ns_to_seconds(ns: int) -> float:
    return ns / NS_PER_SECOND


@dataclass
class EventHandle:
    """Token for a scheduled event, usable for cancellation.

    Canceling twice (or after firing) is a no-op that returns False.
    """

    id: int
    fire_time_ns: int
    canceled: bool = False
    fired: bool = False

    @property
    def pending(self) -> bool:
        return not (self.canceled or self.fired)


@dataclass
class RunStats:
    """Result of one run_until call."""

    events_processed: int
    final_time_s: float


class Simulator:
    """Event queue plus simulated clock.

    Events with equal fire time run in scheduling (FIFO) order via a
    monotonically increasing sequence counter. The clock is kept in integer
    nanoseconds so multi-hour runs accumulate no floating-point drift.

    Handler wall time is accumulated per category (see ``schedule``) so a
    run can attribute its cost to mobility vs. network processing.

    Single-threaded: one engine instance must not be shared across threads
    during a run; independent replications use independent instances.
    """

    def __init__(self) -> None:
        # heap entries: (fire_ns, seq, handle, handler, category)
        self._heap: list[tuple[int, int, EventHandle, Callable[[], None], str]] = []
        self._seq = 0
        self._now_ns = 0
        self.events_processed = 0
        self.handler_seconds: dict[str, float] = defaultdict(float)
        self.handler_counts: dict[str, int] = defaultdict(int)

    @property
    def now(self) -> float:
        """Current simulated time in seconds."""
        return self._now_ns / NS_PER_SECOND

    @property
    def now_ns(self) -> int:
        return self._now_ns

    def schedule(self, delay_s: float, handler: Callable[[], None],
                 category: str = "general") -> EventHandle:
        """Schedule ``handler`` to fire ``delay_s`` seconds from now.

        A zero delay fires at the current time, after the running event
        completes. Negative delays are rejected.
        """
        if delay_s < 0:
            raise ValueError(f"cannot schedule into the past (delay={delay_s!r})")
        return self.schedule_at_ns(self._now_ns + seconds_to_ns(delay_s),
                                   handler, category)

    def schedule_at_ns(self, fire_ns: int, handler: Callable[[], None],
                       category: str = "general") -> EventHandle:
        """Schedule at an absolute integer-nanosecond time."""
        if fire_ns < self._now_ns:
            raise ValueError(
                f"cannot schedule into the past (t={fire_ns} < now={self._now_ns})")
        handle = EventHandle(self._seq, fire_ns)
        heapq.heappush(self._heap, (fire_ns, self._seq, handle, handler, category))
        self._seq += 1
        return handle

    def cancel(self, handle: EventHandle) -> bool:
        """Cancel a pending event. Returns False if already fired/canceled."""
        if handle.canceled or handle.fired:
            return False
        handle.canceled = True
        return True

    def run_until(self, end_s: float) -> RunStats:
        """Process every event with fire time <= ``end_s``.

        The clock finishes exactly at ``end_s`` (events at the boundary are
        included). Returns statistics for this call only; cumulative counters
        live on the instance.
        """
        end_ns = seconds_to_ns(end_s)
        if end_ns < self._now_ns:
            raise ValueError(f"end {end_s} s lies before current time {self.now} s")
        processed = 0
        heap = self._heap
        seconds = self.handler_seconds
        counts = self.handler_counts
        while heap and heap[0][0] <= end_ns:
            fire_ns, _, handle, handler, category = heapq.heappop(heap)
            if handle.canceled:
                continue
            self._now_ns = fire_ns
            handle.fired = True
            t0 = time.perf_counter()
            handler()
            seconds[category] += time.perf_counter() - t0
            counts[category] += 1
            processed += 1
        self._now_ns = end_ns
        self.events_processed += processed
        return RunStats(processed, ns_to_seconds(end_ns))

    def busy_seconds(self) -> float:
        """Total wall time spent inside event handlers so far."""
        return sum(self.handler_seconds.values())

    def pending_count(self) -> int:
        return sum(1 for entry in self._heap if entry[2].pending)
