"""Free block bookkeeping: a LIFO stack of available indices plus a
reference counter per block.

A block leaves the stack on allocate() and comes back only when its
reference count is driven to zero by release() calls, or directly via
return_block() for blocks the write path allocated but never routed.
Frames forwarded to a single port set the count to 1; flooded frames
set it to the number of copies so the block survives until every
egress port has drained it.  Pushes triggered during a cycle become
visible to allocate() only after commit(), so a block freed this cycle
cannot be handed out again in the same cycle.
"""

from __future__ import annotations

from .errors import InvariantViolation

MAX_REFCOUNT = 4


class FreeList:
    def __init__(self, blocks: int = 64):
        self.blocks = blocks
        # Stack is initialized with block 0 on top so the first frame
        # lands in blocks 0, 1, 2, ...
        self._stack = list(range(blocks - 1, -1, -1))
        self._on_stack = set(self._stack)
        self._refcount = [0] * blocks
        self._pending: list[int] = []

    def allocate(self) -> int | None:
        if not self._stack:
            return None
        index = self._stack.pop()
        self._on_stack.discard(index)
        return index

    def set_refcount(self, index: int, count: int):
        """Arm a block at routing time with the number of deliveries."""
        if not 1 <= count <= MAX_REFCOUNT:
            raise InvariantViolation(f"refcount {count} out of range")
        if index in self._on_stack or index in self._pending:
            raise InvariantViolation(f"block {index} is free, cannot arm")
        if self._refcount[index] != 0:
            raise InvariantViolation(f"block {index} already armed")
        self._refcount[index] = count

    def release(self, index: int):
        """One delivery done; at zero the block is queued for the stack."""
        if self._refcount[index] == 0:
            raise InvariantViolation(f"release of unarmed block {index}")
        self._refcount[index] -= 1
        if self._refcount[index] == 0:
            self._push(index)

    def return_block(self, index: int):
        """Give back an allocated but never-armed block."""
        if self._refcount[index] != 0:
            raise InvariantViolation(f"block {index} is armed, release it instead")
        self._push(index)

    def _push(self, index: int):
        if index in self._on_stack or index in self._pending:
            raise InvariantViolation(f"double free of block {index}")
        self._pending.append(index)

    def commit(self):
        for index in self._pending:
            self._stack.append(index)
            self._on_stack.add(index)
        self._pending.clear()

    @property
    def free_count(self) -> int:
        """Blocks visible to allocate() right now."""
        return len(self._stack)

    @property
    def pending_count(self) -> int:
        return len(self._pending)

    @property
    def armed_count(self) -> int:
        return sum(1 for c in self._refcount if c > 0)

    def refcount(self, index: int) -> int:
        return self._refcount[index]
