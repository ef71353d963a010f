"""Shared block memory: 64 blocks of 64 bytes with a single read port
and a single write port.

Each block holds 63 payload bytes plus one footer byte.  The footer
packs the index of the next block in the frame's chain into bits 0..5
and an end-of-packet flag into bit 6; bit 7 is always zero.  Reads and
writes issued during a cycle take effect at commit(): the read returns
the pre-write content (read-before-write) and is available to the
requester on the following cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvariantViolation

BLOCK_PAYLOAD = 63
FOOTER_NEXT_MASK = 0x3F
FOOTER_EOP_BIT = 0x40


@dataclass(frozen=True)
class BlockFooter:
    next: int
    eop: bool

    def encode(self) -> int:
        if not 0 <= self.next <= FOOTER_NEXT_MASK:
            raise ValueError(f"next index out of range: {self.next}")
        return (FOOTER_EOP_BIT if self.eop else 0) | self.next

    @classmethod
    def decode(cls, byte: int) -> "BlockFooter":
        return cls(next=byte & FOOTER_NEXT_MASK, eop=bool(byte & FOOTER_EOP_BIT))


@dataclass(frozen=True)
class MemoryBlock:
    payload: bytes
    footer: BlockFooter

    def __post_init__(self):
        if len(self.payload) > BLOCK_PAYLOAD:
            raise ValueError(f"payload too long: {len(self.payload)}")

    def encode(self) -> bytes:
        return self.payload.ljust(BLOCK_PAYLOAD, b"\x00") + bytes(
            [self.footer.encode()]
        )

    @classmethod
    def decode(cls, raw: bytes) -> "MemoryBlock":
        return cls(payload=raw[:BLOCK_PAYLOAD], footer=BlockFooter.decode(raw[-1]))


class BlockStore:
    """The memory array itself.  One read and one write may be issued
    per cycle; both land at commit()."""

    def __init__(self, blocks: int = 64):
        if not 1 <= blocks <= FOOTER_NEXT_MASK + 1:
            raise ValueError(f"block count {blocks} does not fit the footer")
        self.blocks = blocks
        self._mem = [bytes(BLOCK_PAYLOAD + 1) for _ in range(blocks)]
        self._read_req: int | None = None
        self._write_req: tuple[int, MemoryBlock] | None = None
        self._read_data: MemoryBlock | None = None

    def _check_index(self, index: int):
        if not 0 <= index < self.blocks:
            raise InvariantViolation(f"block index out of range: {index}")

    def issue_read(self, index: int):
        self._check_index(index)
        if self._read_req is not None:
            raise InvariantViolation("second read issued in one cycle")
        self._read_req = index

    def issue_write(self, index: int, block: MemoryBlock):
        self._check_index(index)
        if self._write_req is not None:
            raise InvariantViolation("second write issued in one cycle")
        self._write_req = (index, block)

    def commit(self):
        """End of cycle: resolve the read against pre-write content,
        then apply the write."""
        if self._read_req is not None:
            self._read_data = MemoryBlock.decode(self._mem[self._read_req])
        else:
            self._read_data = None
        if self._write_req is not None:
            index, block = self._write_req
            self._mem[index] = block.encode()
        self._read_req = None
        self._write_req = None

    def read_result(self) -> MemoryBlock | None:
        """Data for the read issued on the previous cycle, if any."""
        return self._read_data

    def peek(self, index: int) -> MemoryBlock:
        """Test-only direct access, no port arbitration."""
        self._check_index(index)
        return MemoryBlock.decode(self._mem[index])
