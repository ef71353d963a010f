"""Write path: assembles ingress bytes into chained memory blocks.

One controller per port.  Bytes stream into a 63-byte staging buffer
backed by a pre-allocated block; when the buffer is full and one more
byte arrives, the block is flushed with a footer pointing at the next
pre-allocated block and assembly continues there.  The footer decision
is deliberately deferred until that extra byte (or end of frame) is
seen, so a frame whose length is an exact multiple of the block payload
gets end-of-packet on its last full block instead of an empty trailer
block.

On a clean end of frame the finished chain is handed up for routing.
The spare pre-allocated block, and every block of an errored frame, go
back to the free list through the controller's return queue.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum, auto

from .errors import InvariantViolation
from .rx import RxOutput
from .sram import BLOCK_PAYLOAD, BlockFooter, MemoryBlock


class WcMode(Enum):
    IDLE = auto()
    WRITE_PAYLOAD = auto()
    WAIT = auto()  # flush blocked on block allocation
    FOOTER = auto()  # flush waiting for the memory write port


@dataclass(frozen=True)
class FrameDone:
    """A finished ingress frame: verdict plus its block chain."""

    error: bool
    start: int | None
    blocks: tuple[int, ...]
    length: int


@dataclass
class WcOutput:
    write_issue: tuple[int, MemoryBlock] | None = None
    frame_done: FrameDone | None = None
    return_issue: int | None = None


class WriteController:
    def __init__(self, block_payload: int = BLOCK_PAYLOAD):
        self.block_payload = block_payload
        self.mode = WcMode.IDLE
        self._buffer = bytearray()
        self._spill: int | None = None  # byte that overflowed the buffer
        self._current: int | None = None
        self._next: int | None = None
        self._frame_blocks: list[int] = []
        self._frame_len = 0
        self._pending_eof = False
        self._pending_error = False
        self._pending_write: tuple[int, MemoryBlock, bool] | None = None
        self._return_queue: deque[int] = deque()

    def tick(
        self,
        rx_out: RxOutput | None,
        alloc_grant: int | None,
        write_grant: bool,
        return_grant: bool,
    ) -> WcOutput:
        out = WcOutput()
        if return_grant and self._return_queue:
            out.return_issue = self._return_queue.popleft()
        if alloc_grant is not None:
            self._take_block(alloc_grant)
        if write_grant and self._pending_write is not None:
            self._issue_write(out)
        if rx_out is not None:
            if rx_out.byte_valid:
                self._take_byte(rx_out)
            if rx_out.eof:
                self._pending_eof = True
                self._pending_error = rx_out.error
        self._advance(out)
        return out

    # -- intake ------------------------------------------------------

    def _take_block(self, index: int):
        if self.mode == WcMode.IDLE:
            # The frame this was requested for ended or aborted while
            # the request was in flight; give the block straight back.
            self._return_queue.append(index)
        elif self._current is None:
            self._current = index
            self._frame_blocks.append(index)
        elif self._next is None:
            self._next = index
        else:
            self._return_queue.append(index)

    def _take_byte(self, rx_out: RxOutput):
        if self.mode in (WcMode.WAIT, WcMode.FOOTER):
            raise InvariantViolation("byte delivered during a stall")
        if self.mode == WcMode.IDLE:
            if not rx_out.sof:
                raise InvariantViolation("mid-frame byte with no open frame")
            self.mode = WcMode.WRITE_PAYLOAD
        elif rx_out.sof:
            raise InvariantViolation("start of frame while a frame is open")
        if len(self._buffer) < self.block_payload:
            self._buffer.append(rx_out.byte)
        elif self._spill is None:
            self._spill = rx_out.byte
        else:
            raise InvariantViolation("byte arrived with staging full")
        self._frame_len += 1

    def _issue_write(self, out: WcOutput):
        index, block, frame_ending = self._pending_write
        self._pending_write = None
        out.write_issue = (index, block)
        if frame_ending:
            out.frame_done = FrameDone(
                error=False,
                start=self._frame_blocks[0],
                blocks=tuple(self._frame_blocks),
                length=self._frame_len,
            )
            if self._next is not None:
                self._return_queue.append(self._next)
            self._reset_frame()
        else:
            self.mode = WcMode.WRITE_PAYLOAD

    # -- per-cycle resolution ------------------------------------------

    def _advance(self, out: WcOutput):
        if self._pending_write is not None:
            self.mode = WcMode.FOOTER
            return
        if self._pending_eof and self._pending_error:
            self._abort(out)
            return
        if self._needs_mid_flush:
            if self._current is None or self._next is None:
                self.mode = WcMode.WAIT
                return
            footer = BlockFooter(next=self._next, eop=False)
            self._pending_write = (
                self._current,
                MemoryBlock(bytes(self._buffer), footer),
                False,
            )
            self._frame_blocks.append(self._next)
            self._current = self._next
            self._next = None
            self._buffer = bytearray([self._spill])
            self._spill = None
            self.mode = WcMode.FOOTER
            return
        if self._pending_eof:
            if self._current is None:
                self.mode = WcMode.WAIT
                return
            # Final block: eop set, next points at itself as a sentinel.
            footer = BlockFooter(next=self._current, eop=True)
            self._pending_write = (
                self._current,
                MemoryBlock(bytes(self._buffer), footer),
                True,
            )
            self.mode = WcMode.FOOTER
            return
        if self.mode in (WcMode.WAIT, WcMode.FOOTER):
            self.mode = WcMode.WRITE_PAYLOAD

    def _abort(self, out: WcOutput):
        out.frame_done = FrameDone(
            error=True, start=None, blocks=(), length=self._frame_len
        )
        self._return_queue.extend(self._frame_blocks)
        if self._next is not None:
            self._return_queue.append(self._next)
        self._reset_frame()

    def _reset_frame(self):
        self.mode = WcMode.IDLE
        self._buffer = bytearray()
        self._spill = None
        self._current = None
        self._next = None
        self._frame_blocks = []
        self._frame_len = 0
        self._pending_eof = False
        self._pending_error = False
        self._pending_write = None

    # -- signals sampled by the core after tick ------------------------

    @property
    def _needs_mid_flush(self) -> bool:
        return len(self._buffer) >= self.block_payload and self._spill is not None

    @property
    def ready(self) -> bool:
        return self.mode in (WcMode.IDLE, WcMode.WRITE_PAYLOAD)

    @property
    def stalled(self) -> bool:
        return self.mode in (WcMode.WAIT, WcMode.FOOTER)

    @property
    def active(self) -> bool:
        return self.mode != WcMode.IDLE

    @property
    def wants_alloc(self) -> bool:
        if self.mode == WcMode.IDLE:
            return False
        if self._current is None:
            return True
        if self._next is None:
            # After eof no further block is needed, except to finish a
            # flush that was already triggered by an overflowing byte.
            return not self._pending_eof or self._needs_mid_flush
        return False

    @property
    def wants_write(self) -> bool:
        return self._pending_write is not None

    @property
    def wants_return(self) -> bool:
        return bool(self._return_queue)

    @property
    def held_blocks(self) -> list[int]:
        """Every block this controller owns, for conservation audits."""
        held = list(self._frame_blocks)
        if self._next is not None:
            held.append(self._next)
        held.extend(self._return_queue)
        return held
