"""Virtual output queues.

One bounded FIFO per egress port, holding frame descriptors rather
than frame data.  Push and pop can land in the same cycle: on an empty
queue the entry passes straight through to the popper, and on a full
queue the freed slot is immediately reusable.  A push against a full
queue with no concurrent pop is refused; the caller decides what that
means for the frame (tail drop).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


@dataclass(frozen=True)
class VoqEntry:
    """Descriptor of one stored frame: where its chain starts, whether
    it is a flood copy, and its byte length including FCS."""

    start: int
    flood: bool
    length: int


class Voq:
    def __init__(self, depth: int = 16):
        if depth < 1:
            raise ValueError("need at least one slot")
        self.depth = depth
        self._fifo: deque[VoqEntry] = deque()

    def tick(
        self, push: VoqEntry | None, pop: bool
    ) -> tuple[VoqEntry | None, bool]:
        """Apply one cycle's push/pop pair.

        Returns (popped entry, push accepted).
        """
        if pop and not self._fifo:
            # Pass-through: the incoming entry, if any, is handed
            # straight out and never occupies a slot.
            return push, push is not None
        popped = self._fifo.popleft() if pop else None
        if push is None:
            return popped, False
        if len(self._fifo) >= self.depth:
            return popped, False
        self._fifo.append(push)
        return popped, True

    def __len__(self) -> int:
        return len(self._fifo)

    @property
    def full(self) -> bool:
        return len(self._fifo) >= self.depth

    @property
    def empty(self) -> bool:
        return not self._fifo
