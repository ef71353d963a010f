"""Ingress path: GMII sampling across the clock boundary, then the
streaming frame parser.

The GMII side runs at a quarter of the switch clock; each received byte
crosses into the switch domain through a small queue and becomes
visible exactly two switch cycles after its sampling boundary.  The
parser hunts for preamble and SFD, then forwards every body byte (FCS
included) to the write path while peeling off the destination and
source addresses for the forwarding logic.  The CRC runs behind a
four-byte delay line so that when data-valid drops, the accumulated
checksum covers exactly the body minus the FCS still sitting in the
line.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import InvariantViolation
from .frame import (
    MIN_BODY_LEN,
    PREAMBLE_BYTE,
    PREAMBLE_LEN,
    SFD_BYTE,
    GmiiSymbol,
    MacAddress,
    crc32_finalize,
    crc32_init,
    crc32_update,
)


class CdcQueue:
    """Clock-domain crossing from GMII into the switch domain.

    Entries pushed at a GMII boundary become poppable `latency` switch
    cycles later.  A symbol with dv low marks the end of a burst.
    """

    def __init__(self, depth: int = 16, latency: int = 2):
        self.depth = depth
        self.latency = latency
        self._fifo: deque[tuple[int, GmiiSymbol]] = deque()

    def push(self, symbol: GmiiSymbol, cycle: int):
        if len(self._fifo) >= self.depth:
            raise InvariantViolation("CDC queue overflow")
        self._fifo.append((cycle + self.latency, symbol))

    def pop_ready(self, cycle: int) -> GmiiSymbol | None:
        if self._fifo and self._fifo[0][0] <= cycle:
            return self._fifo.popleft()[1]
        return None

    def __len__(self) -> int:
        return len(self._fifo)


@dataclass
class RxOutput:
    """What the parser tells the rest of the switch in one cycle."""

    byte_valid: bool = False
    byte: int = 0
    sof: bool = False
    eof: bool = False
    error: bool = False
    error_dropped: bool = False  # error caused by write-path backpressure
    dropped_byte: bool = False  # lost to write-path backpressure
    dst_ready: bool = False
    dst: MacAddress | None = None
    src_ready: bool = False
    src: MacAddress | None = None


@dataclass
class RxParser:
    """Streaming parser for one port."""

    _preamble_count: int = 0
    _frame_active: bool = False
    _nbytes: int = 0
    _tail: deque = field(default_factory=deque)
    _crc: int = 0
    _err_latch: bool = False
    _drop_latch: bool = False
    _dst: bytearray = field(default_factory=bytearray)
    _src: bytearray = field(default_factory=bytearray)

    @property
    def frame_active(self) -> bool:
        return self._frame_active

    def _start_frame(self):
        self._frame_active = True
        self._preamble_count = 0
        self._nbytes = 0
        self._tail.clear()
        self._crc = crc32_init()
        self._err_latch = False
        self._drop_latch = False
        self._dst.clear()
        self._src.clear()

    def tick(self, symbol: GmiiSymbol | None, wr_ready: bool) -> RxOutput:
        out = RxOutput()
        if symbol is None:
            return out
        if not symbol.dv:
            if self._frame_active:
                out.eof = True
                out.error = self._frame_error()
                out.error_dropped = self._drop_latch
                self._frame_active = False
            self._preamble_count = 0
            return out
        if not self._frame_active:
            self._hunt(symbol.data)
            return out
        if symbol.er:
            self._err_latch = True
        if not wr_ready:
            # The write path cannot take the byte this cycle; it is
            # gone.  The frame is poisoned and will be dropped at eof.
            self._drop_latch = True
            out.dropped_byte = True
            return out
        self._accept_byte(symbol.data, out)
        return out

    def _hunt(self, byte: int):
        if byte == PREAMBLE_BYTE:
            self._preamble_count = min(self._preamble_count + 1, PREAMBLE_LEN)
        elif byte == SFD_BYTE and self._preamble_count >= PREAMBLE_LEN:
            self._start_frame()
        else:
            self._preamble_count = 0

    def _accept_byte(self, byte: int, out: RxOutput):
        position = self._nbytes
        self._nbytes += 1
        out.byte_valid = True
        out.byte = byte
        out.sof = position == 0
        if position < 6:
            self._dst.append(byte)
            if position == 5:
                out.dst_ready = True
                out.dst = MacAddress.from_bytes(bytes(self._dst))
        elif position < 12:
            self._src.append(byte)
            if position == 11:
                out.src_ready = True
                out.src = MacAddress.from_bytes(bytes(self._src))
        self._tail.append(byte)
        if len(self._tail) > 4:
            self._crc = crc32_update(self._crc, self._tail.popleft())

    def _frame_error(self) -> bool:
        if self._err_latch or self._drop_latch:
            return True
        if self._nbytes < MIN_BODY_LEN:
            return True  # runt, cannot even hold header plus FCS
        received = int.from_bytes(bytes(self._tail), "little")
        return crc32_finalize(self._crc) != received
