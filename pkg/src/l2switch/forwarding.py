"""MAC learning and the unicast/flood routing decision.

The learn table is a small fully-associative array (16 entries by
default) with a saturating two-bit usage counter per entry.  Source
addresses are learned on ingress; destination lookups adjust the
counters so frequently-hit entries survive eviction.  An unknown
destination floods to every port except the one the frame arrived on.
"""

from __future__ import annotations

from .frame import MacAddress


class LearnTable:
    """Hardware-style table: parallel valid/mac/port/counter arrays.

    - learn of a new MAC fills the lowest-index invalid slot with
      counter 1, or evicts the entry with the smallest (counter, slot)
      when the table is full
    - learn of a known MAC refreshes its port and bumps its counter
    - a lookup hit bumps the hit entry and decays every other valid
      entry; a miss changes nothing
    """

    def __init__(self, entries: int = 16, counter_bits: int = 2):
        self.entries = entries
        self.counter_max = (1 << counter_bits) - 1
        self._valid = [False] * entries
        self._mac: list[MacAddress | None] = [None] * entries
        self._port = [0] * entries
        self._counter = [0] * entries

    def _find(self, mac: MacAddress) -> int | None:
        for slot in range(self.entries):
            if self._valid[slot] and self._mac[slot] == mac:
                return slot
        return None

    def learn(self, mac: MacAddress, port: int) -> bool:
        """Record mac as reachable via port.  True when an existing
        entry for a different MAC was evicted."""
        slot = self._find(mac)
        if slot is not None:
            self._port[slot] = port
            self._counter[slot] = min(self._counter[slot] + 1, self.counter_max)
            return False
        evicted = False
        for candidate in range(self.entries):
            if not self._valid[candidate]:
                slot = candidate
                break
        else:
            slot = min(range(self.entries), key=lambda s: (self._counter[s], s))
            evicted = True
        self._valid[slot] = True
        self._mac[slot] = mac
        self._port[slot] = port
        self._counter[slot] = 1
        return evicted

    def lookup(self, mac: MacAddress) -> int | None:
        """Port for mac, or None.  A hit feeds the usage counters."""
        hit = self._find(mac)
        if hit is None:
            return None
        for slot in range(self.entries):
            if not self._valid[slot]:
                continue
            if slot == hit:
                self._counter[slot] = min(self._counter[slot] + 1, self.counter_max)
            else:
                self._counter[slot] = max(self._counter[slot] - 1, 0)
        return self._port[hit]

    def occupancy(self) -> int:
        return sum(self._valid)


def route_targets(
    hit_port: int | None, ingress: int, ports: int
) -> tuple[list[int], bool]:
    """Egress ports for a frame and whether that is a flood.

    A known destination goes to its learned port, even when that is the
    ingress port itself.  An unknown destination goes everywhere except
    the ingress.
    """
    if hit_port is not None:
        return [hit_port], False
    return [p for p in range(ports) if p != ingress], True
