"""Egress path: turns a stored frame back into a GMII byte stream.

The transmitter pulls a frame descriptor from its virtual output
queue, asks the read path for the chain, and trickles bytes into a
small output queue that drains one byte per GMII boundary (a quarter
of the switch clock).  The preamble is deliberately not emitted until
the first data block has arrived, so the line never starts a frame it
could underrun.  Stored bytes, FCS included, are replayed verbatim;
only preamble and SFD are regenerated.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, auto

from .errors import InvariantViolation
from .frame import INTERFRAME_GAP, PREAMBLE_BYTE, PREAMBLE_LEN, SFD_BYTE, GmiiSymbol
from .sram import MemoryBlock
from .voq import VoqEntry

OUT_QUEUE_DEPTH = 16
PREAMBLE_TOTAL = PREAMBLE_LEN + 1


class TxMode(Enum):
    IDLE = auto()
    WAIT_FIRST = auto()  # descriptor taken, first block not here yet
    PREAMBLE = auto()
    BODY = auto()
    GAP = auto()  # frame drained, enforcing the inter-frame gap


@dataclass
class TxOutput:
    symbol: GmiiSymbol | None = None  # present only on GMII boundaries
    start_read: int | None = None  # chain start for the read path


class TxPort:
    def __init__(self):
        self.mode = TxMode.IDLE
        self._queue: deque[int] = deque()
        self._block_buf: deque[int] = deque()
        self._remaining_push = 0  # stored bytes not yet queued
        self._wire_remaining = 0  # bytes not yet on the wire
        self._preamble_left = 0
        self._gap_left = 0

    def tick(
        self,
        popped: VoqEntry | None,
        block_in: tuple[MemoryBlock, bool] | None,
        boundary: bool,
    ) -> TxOutput:
        out = TxOutput()
        if boundary:
            out.symbol = self._drain()
        if popped is not None:
            self._start_frame(popped, out)
        if block_in is not None:
            self._load_block(block_in[0])
        self._push()
        return out

    def _drain(self) -> GmiiSymbol:
        if self._queue:
            self._wire_remaining -= 1
            return GmiiSymbol(data=self._queue.popleft(), dv=True)
        if self._wire_remaining and self.mode in (TxMode.PREAMBLE, TxMode.BODY):
            raise InvariantViolation("egress underrun mid-frame")
        if self.mode == TxMode.GAP and self._wire_remaining == 0:
            self._gap_left -= 1
            if self._gap_left <= 0:
                self.mode = TxMode.IDLE
        return GmiiSymbol(dv=False)

    def _start_frame(self, entry: VoqEntry, out: TxOutput):
        if self.mode != TxMode.IDLE:
            raise InvariantViolation("frame pop while transmitter busy")
        self.mode = TxMode.WAIT_FIRST
        self._remaining_push = entry.length
        self._wire_remaining = PREAMBLE_TOTAL + entry.length
        self._preamble_left = PREAMBLE_TOTAL
        out.start_read = entry.start

    def _load_block(self, block: MemoryBlock):
        if self.mode not in (TxMode.WAIT_FIRST, TxMode.BODY):
            raise InvariantViolation("block delivered to idle transmitter")
        if self._block_buf:
            raise InvariantViolation("block delivered before previous drained")
        take = min(len(block.payload), self._remaining_push)
        self._block_buf.extend(block.payload[:take])
        if self.mode == TxMode.WAIT_FIRST:
            self.mode = TxMode.PREAMBLE

    def _push(self):
        if len(self._queue) >= OUT_QUEUE_DEPTH:
            return
        if self.mode == TxMode.PREAMBLE:
            self._preamble_left -= 1
            self._queue.append(
                SFD_BYTE if self._preamble_left == 0 else PREAMBLE_BYTE
            )
            if self._preamble_left == 0:
                self.mode = TxMode.BODY
        elif self.mode == TxMode.BODY and self._block_buf:
            self._queue.append(self._block_buf.popleft())
            self._remaining_push -= 1
            if self._remaining_push == 0:
                self.mode = TxMode.GAP
                self._gap_left = INTERFRAME_GAP

    @property
    def voq_ready(self) -> bool:
        return self.mode == TxMode.IDLE

    @property
    def block_ready(self) -> bool:
        """Asks the read path for (an)other block."""
        if self.mode == TxMode.WAIT_FIRST:
            return True
        return (
            self.mode == TxMode.BODY
            and not self._block_buf
            and self._remaining_push > 0
        )

    @property
    def busy(self) -> bool:
        return self.mode != TxMode.IDLE
