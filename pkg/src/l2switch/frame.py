"""Ethernet framing: CRC-32, MAC addresses, serialization, GMII streams.

The wire format handled here is the classic DIX/802.3 layout: seven
preamble bytes of 0x55, one start-of-frame delimiter 0xD5, destination
and source MACs, a two-byte ethertype (treated as opaque), the payload,
and a four-byte frame check sequence transmitted least significant byte
first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ScheduleError

PREAMBLE_BYTE = 0x55
SFD_BYTE = 0xD5
PREAMBLE_LEN = 7
HEADER_LEN = 14  # dst(6) + src(6) + ethertype(2)
FCS_LEN = 4
MIN_BODY_LEN = HEADER_LEN + FCS_LEN
MAX_PAYLOAD = 1500
INTERFRAME_GAP = 12  # idle GMII cycles required between frames on a port

# CRC-32 as used by Ethernet: polynomial 0x04C11DB7, bit-reflected input
# and output, initial value all-ones, final complement.  The table below
# uses the reflected polynomial so bytes can be fed in LSB-first order.
_CRC_POLY_REFLECTED = 0xEDB88320


def _build_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            if crc & 1:
                crc = (crc >> 1) ^ _CRC_POLY_REFLECTED
            else:
                crc >>= 1
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def crc32_init() -> int:
    return 0xFFFFFFFF


def crc32_update(state: int, byte: int) -> int:
    return (state >> 8) ^ _CRC_TABLE[(state ^ byte) & 0xFF]


def crc32_finalize(state: int) -> int:
    return state ^ 0xFFFFFFFF


def crc32(data: bytes) -> int:
    state = crc32_init()
    for byte in data:
        state = crc32_update(state, byte)
    return crc32_finalize(state)


@dataclass(frozen=True, order=True)
class MacAddress:
    """A 48-bit MAC address stored as six octets."""

    octets: tuple[int, int, int, int, int, int]

    def __post_init__(self):
        if len(self.octets) != 6 or any(not 0 <= o <= 0xFF for o in self.octets):
            raise ValueError(f"bad MAC octets: {self.octets!r}")

    @classmethod
    def parse(cls, text: str) -> "MacAddress":
        parts = text.split(":")
        if len(parts) != 6 or any(len(p) != 2 for p in parts):
            raise ValueError(f"bad MAC address: {text!r}")
        return cls(tuple(int(p, 16) for p in parts))

    @classmethod
    def from_bytes(cls, raw: bytes) -> "MacAddress":
        return cls(tuple(raw))

    def to_bytes(self) -> bytes:
        return bytes(self.octets)

    def __str__(self) -> str:
        return ":".join(f"{o:02x}" for o in self.octets)


@dataclass(frozen=True)
class EthernetFrame:
    dst: MacAddress
    src: MacAddress
    ethertype: int
    payload: bytes

    def __post_init__(self):
        if not 0 <= self.ethertype <= 0xFFFF:
            raise ValueError(f"bad ethertype: {self.ethertype:#x}")
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError(f"payload too long: {len(self.payload)}")

    def body(self) -> bytes:
        """Header plus payload, without preamble or FCS."""
        return (
            self.dst.to_bytes()
            + self.src.to_bytes()
            + self.ethertype.to_bytes(2, "big")
            + self.payload
        )

    def fcs(self) -> int:
        return crc32(self.body())

    def wire_length(self) -> int:
        """Total GMII cycles occupied, preamble through FCS."""
        return PREAMBLE_LEN + 1 + len(self.body()) + FCS_LEN


class RuntFrameError(ValueError):
    """Frame body shorter than header plus FCS."""


def serialize_frame(frame: EthernetFrame, corrupt_fcs: bool = False) -> bytes:
    """Full wire image of a frame, preamble through FCS.

    With corrupt_fcs the lowest bit of the first FCS byte is flipped,
    which a receiver must detect as a CRC failure.
    """
    body = frame.body()
    fcs = crc32(body).to_bytes(4, "little")
    if corrupt_fcs:
        fcs = bytes([fcs[0] ^ 0x01]) + fcs[1:]
    return bytes([PREAMBLE_BYTE] * PREAMBLE_LEN + [SFD_BYTE]) + body + fcs


def parse_frame(body: bytes) -> tuple[EthernetFrame, bool]:
    """Decode a frame body (no preamble/SFD, FCS included).

    Returns the frame and whether the trailing FCS matches the content.
    """
    if len(body) < MIN_BODY_LEN:
        raise RuntFrameError(f"body too short: {len(body)} bytes")
    content, fcs_raw = body[:-FCS_LEN], body[-FCS_LEN:]
    frame = EthernetFrame(
        dst=MacAddress.from_bytes(content[0:6]),
        src=MacAddress.from_bytes(content[6:12]),
        ethertype=int.from_bytes(content[12:14], "big"),
        payload=content[14:],
    )
    fcs_ok = int.from_bytes(fcs_raw, "little") == crc32(content)
    return frame, fcs_ok


@dataclass(frozen=True)
class GmiiSymbol:
    """One GMII cycle: a data byte with data-valid and error flags."""

    data: int = 0
    dv: bool = False
    er: bool = False


def to_gmii_stream(
    schedule: Iterable[tuple[EthernetFrame, bool, int]],
) -> Mapping[int, GmiiSymbol]:
    """Lay frames out on a single port's GMII timeline.

    Each schedule entry is (frame, corrupt_fcs, start_cycle) with
    start_cycle the GMII cycle of the first preamble byte.  Frames must
    not overlap and consecutive frames need at least INTERFRAME_GAP idle
    cycles between them.  Cycles without an entry are idle (dv low).
    """
    stream: dict[int, GmiiSymbol] = {}
    prev_end = None
    prev_start = None
    for frame, corrupt, start in sorted(schedule, key=lambda item: item[2]):
        if start < 0:
            raise ScheduleError(f"negative start cycle {start}")
        if prev_end is not None and start < prev_end + INTERFRAME_GAP:
            raise ScheduleError(
                f"frame at cycle {start} too close to frame at {prev_start} "
                f"(needs gap of {INTERFRAME_GAP} after cycle {prev_end - 1})"
            )
        wire = serialize_frame(frame, corrupt)
        for offset, byte in enumerate(wire):
            stream[start + offset] = GmiiSymbol(data=byte, dv=True)
        prev_start = start
        prev_end = start + len(wire)
    return stream
