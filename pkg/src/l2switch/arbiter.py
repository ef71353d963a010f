"""Arbiters for the shared single-port resources.

Round-robin grants cover the memory read port, the memory write port,
the release bus and the learn-table port.  Block allocation uses a FIFO
queue instead: requesters are served strictly in the order they first
asked, so a port that has been waiting longest gets the next free block
and cannot be starved by later arrivals.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence


class RoundRobinArbiter:
    """Classic rotating-priority arbiter over a fixed set of slots.

    The scan starts one past the previous grantee, so consecutive
    conflicting requesters take turns.  With no requests the pointer
    holds still.
    """

    def __init__(self, slots: int):
        if slots < 1:
            raise ValueError("need at least one slot")
        self.slots = slots
        self._last = slots - 1  # first grant scans from slot 0

    def grant(self, requests: Sequence[bool]) -> int | None:
        if len(requests) != self.slots:
            raise ValueError(f"expected {self.slots} request lines")
        for offset in range(1, self.slots + 1):
            slot = (self._last + offset) % self.slots
            if requests[slot]:
                self._last = slot
                return slot
        return None


class AllocationQueue:
    """FIFO ordering for free-block allocation requests.

    At most one outstanding entry per requester.  Entries whose
    requester has stopped asking are dropped from the head.  The head
    is granted only when the caller reports a block is available.
    """

    def __init__(self):
        self._queue: deque[int] = deque()
        self._queued: set[int] = set()

    def update(self, requesters: Iterable[int]):
        """Enqueue new requesters (ascending id among same-cycle arrivals)."""
        for port in sorted(requesters):
            if port not in self._queued:
                self._queue.append(port)
                self._queued.add(port)

    def grant(self, still_wanting: set[int], available: bool) -> int | None:
        while self._queue and self._queue[0] not in still_wanting:
            self._queued.discard(self._queue.popleft())
        if available and self._queue:
            port = self._queue.popleft()
            self._queued.discard(port)
            return port
        return None

    def __len__(self) -> int:
        return len(self._queue)
