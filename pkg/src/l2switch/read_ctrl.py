"""Read path: walks a frame's block chain out of shared memory.

One controller per egress port.  Given a chain's start index it fetches
one block at a time through the shared read port, hands each block to
the transmitter, and queues the visited index for release so the free
list sees the reference count drop once per delivery.  Fetching is
paced by the transmitter (one block outstanding); release draining can
overlap the next fetch.  A chain that does not terminate within the
block count is a corrupted linked list and trips an invariant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, auto

from .errors import InvariantViolation
from .sram import MemoryBlock


class RcMode(Enum):
    IDLE = auto()
    FETCH = auto()  # cursor valid, waiting for a read-port grant
    AWAIT = auto()  # read issued, data arrives next cycle


@dataclass
class RcOutput:
    read_issue: int | None = None
    block_out: tuple[MemoryBlock, bool] | None = None  # (block, last)
    release_issue: int | None = None


class ReadController:
    def __init__(self, blocks: int = 64):
        self.blocks = blocks
        self.mode = RcMode.IDLE
        self._cursor: int | None = None
        self._hops = 0
        self._pending_release: deque[int] = deque()

    def tick(
        self,
        start: int | None,
        read_grant: bool,
        read_data: MemoryBlock | None,
        release_grant: bool,
    ) -> RcOutput:
        out = RcOutput()
        if release_grant and self._pending_release:
            out.release_issue = self._pending_release.popleft()
        if read_data is not None:
            self._deliver(read_data, out)
        if read_grant and self.mode == RcMode.FETCH:
            out.read_issue = self._cursor
            self.mode = RcMode.AWAIT
        if start is not None:
            if self.mode != RcMode.IDLE:
                raise InvariantViolation("chain start while previous one active")
            self._cursor = start
            self._hops = 0
            self.mode = RcMode.FETCH
        return out

    def _deliver(self, block: MemoryBlock, out: RcOutput):
        if self.mode != RcMode.AWAIT:
            raise InvariantViolation("read data with no read outstanding")
        out.block_out = (block, block.footer.eop)
        self._pending_release.append(self._cursor)
        self._hops += 1
        if block.footer.eop:
            self._cursor = None
            self.mode = RcMode.IDLE
        else:
            if self._hops >= self.blocks:
                raise InvariantViolation("block chain does not terminate")
            self._cursor = block.footer.next
            self.mode = RcMode.FETCH

    @property
    def wants_read(self) -> bool:
        return self.mode == RcMode.FETCH

    @property
    def wants_release(self) -> bool:
        return bool(self._pending_release)

    @property
    def busy(self) -> bool:
        return self.mode != RcMode.IDLE or bool(self._pending_release)
