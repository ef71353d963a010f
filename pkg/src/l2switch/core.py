"""The switch itself: four ports around a shared block memory.

Every cycle runs a fixed phase order as the stand-in for RTL
concurrency: (1) GMII ingress sampling into the CDC queues on GMII
boundaries, (2) arbiter grants computed from the requests registered at
the end of the previous cycle, (3) ingress parsers, (4) write
controllers and the memory write, (5) learning/lookup/routing, (6)
virtual output queues, (7) read controllers and the memory read
return, (8) transmitters and the egress drain, (9) free-list and
memory commit, (10) conservation audit.  Identical configuration and
input streams produce identical cycle-by-cycle behavior; there is no
randomness anywhere in the core.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .arbiter import AllocationQueue, RoundRobinArbiter
from .errors import InvariantViolation
from .forwarding import LearnTable, route_targets
from .frame import GmiiSymbol, MacAddress, PREAMBLE_BYTE, PREAMBLE_LEN, SFD_BYTE, parse_frame
from .freelist import MAX_REFCOUNT, FreeList
from .read_ctrl import ReadController
from .rx import CdcQueue, RxParser
from .sram import BlockStore
from .tx import TxMode, TxPort
from .voq import Voq, VoqEntry
from .write_ctrl import FrameDone, WcMode, WriteController


@dataclass
class SwitchConfig:
    ports: int = 4
    blocks: int = 64
    voq_depth: int = 16
    learn_entries: int = 16
    counter_bits: int = 2
    cdc_depth: int = 16
    clock_ratio: int = 4  # switch cycles per GMII cycle
    fix_flood_leak: bool = False
    max_cycles: int | None = None

    def __post_init__(self):
        if not 2 <= self.ports <= MAX_REFCOUNT + 1:
            raise ValueError(
                f"ports must be 2..{MAX_REFCOUNT + 1} "
                "(a flood arms ports-1 reference counts)"
            )
        if not 1 <= self.blocks <= 64:
            raise ValueError("blocks must be 1..64 to fit the footer index")
        if self.clock_ratio < 1:
            raise ValueError("clock_ratio must be at least 1")
        if self.voq_depth < 1:
            raise ValueError("voq_depth must be at least 1")


@dataclass(frozen=True)
class EgressEvent:
    """One frame as it left the switch."""

    port: int
    first_gmii_cycle: int  # cycle of the first preamble byte on the wire
    dst: MacAddress
    src: MacAddress
    ethertype: int
    payload: bytes
    fcs: bytes  # the four FCS bytes in wire order
    fcs_ok: bool

    def body(self) -> bytes:
        return (
            self.dst.to_bytes()
            + self.src.to_bytes()
            + self.ethertype.to_bytes(2, "big")
            + self.payload
            + self.fcs
        )


@dataclass
class SwitchStats:
    ports: int
    rx_frames: list[int] = field(default_factory=list)
    rx_crc_drops: list[int] = field(default_factory=list)
    rx_backpressure_drops: list[int] = field(default_factory=list)
    tx_frames: list[int] = field(default_factory=list)
    voq_drops: list[int] = field(default_factory=list)
    floods: int = 0
    unicasts: int = 0
    learns: int = 0
    evictions: int = 0
    leaked_blocks: int = 0
    free_list_low_watermark: int = 0
    wr_stall_fraction: float = 0.0
    cycles: int = 0
    truncated: bool = False
    free_blocks_end: int = 0

    def __post_init__(self):
        for name in (
            "rx_frames",
            "rx_crc_drops",
            "rx_backpressure_drops",
            "tx_frames",
            "voq_drops",
        ):
            if not getattr(self, name):
                setattr(self, name, [0] * self.ports)

    def to_dict(self) -> dict:
        return {
            "ports": self.ports,
            "rx_frames": self.rx_frames,
            "rx_crc_drops": self.rx_crc_drops,
            "rx_backpressure_drops": self.rx_backpressure_drops,
            "tx_frames": self.tx_frames,
            "voq_drops": self.voq_drops,
            "floods": self.floods,
            "unicasts": self.unicasts,
            "learns": self.learns,
            "evictions": self.evictions,
            "leaked_blocks": self.leaked_blocks,
            "free_list_low_watermark": self.free_list_low_watermark,
            "wr_stall_fraction": self.wr_stall_fraction,
            "cycles": self.cycles,
            "truncated": self.truncated,
            "free_blocks_end": self.free_blocks_end,
        }


@dataclass
class CycleRecord:
    """Per-cycle observables, collected when a timeline is requested."""

    cycle: int
    free_blocks: int
    voq_depths: tuple[int, ...]
    rx_active: tuple[bool, ...]
    tx_active: tuple[bool, ...]


class EgressMonitor:
    """Reassembles one port's GMII output into egress events."""

    def __init__(self, port: int):
        self.port = port
        self._bytes = bytearray()
        self._first_gmii: int | None = None

    def observe(self, gmii_cycle: int, symbol: GmiiSymbol) -> EgressEvent | None:
        if symbol.dv:
            if not self._bytes:
                self._first_gmii = gmii_cycle
            self._bytes.append(symbol.data)
            return None
        if not self._bytes:
            return None
        wire = bytes(self._bytes)
        self._bytes.clear()
        if (
            wire[: PREAMBLE_LEN] != bytes([PREAMBLE_BYTE] * PREAMBLE_LEN)
            or len(wire) <= PREAMBLE_LEN
            or wire[PREAMBLE_LEN] != SFD_BYTE
        ):
            raise InvariantViolation(f"malformed egress preamble on port {self.port}")
        body = wire[PREAMBLE_LEN + 1 :]
        frame, fcs_ok = parse_frame(body)
        return EgressEvent(
            port=self.port,
            first_gmii_cycle=self._first_gmii,
            dst=frame.dst,
            src=frame.src,
            ethertype=frame.ethertype,
            payload=frame.payload,
            fcs=body[-4:],
            fcs_ok=fcs_ok,
        )


class Switch:
    def __init__(self, config: SwitchConfig, streams: Mapping[int, Mapping[int, GmiiSymbol]]):
        self.cfg = config
        p = config.ports
        self.streams = [dict(streams.get(i, {})) for i in range(p)]
        self.cycle = 0
        self.store = BlockStore(config.blocks)
        self.freelist = FreeList(config.blocks)
        self.table = LearnTable(config.learn_entries, config.counter_bits)
        self.cdc = [CdcQueue(config.cdc_depth) for _ in range(p)]
        self.rx = [RxParser() for _ in range(p)]
        self.wc = [WriteController() for _ in range(p)]
        self.rc = [ReadController(config.blocks) for _ in range(p)]
        self.tx = [TxPort() for _ in range(p)]
        self.voqs = [Voq(config.voq_depth) for _ in range(p)]
        self.monitors = [EgressMonitor(i) for i in range(p)]
        self.write_ring = RoundRobinArbiter(p)
        self.read_ring = RoundRobinArbiter(p)
        self.release_ring = RoundRobinArbiter(2 * p)  # low half reads, high half returns
        self.learn_ring = RoundRobinArbiter(2 * p)  # low half learns, high half lookups
        self.alloc_queue = AllocationQueue()
        self.events: list[EgressEvent] = []
        self.stats = SwitchStats(ports=p)
        self.stats.free_list_low_watermark = config.blocks
        # registered signals: sampled at end of cycle, consumed next cycle
        self._prev_dv = [False] * p
        self._wr_ready = [True] * p
        self._voq_ready = [False] * p
        self._tx_start: list[int | None] = [None] * p
        self._read_inflight: int | None = None
        self._write_reqs = [False] * p
        self._read_reqs = [False] * p
        self._release_reqs = [False] * (2 * p)
        self._learn_reqs = [False] * (2 * p)
        self._alloc_wants: set[int] = set()
        # single-entry pipeline slots between stages
        self._pending_learn: list[tuple[MacAddress, int] | None] = [None] * p
        self._pending_route: list[tuple[FrameDone, MacAddress] | None] = [None] * p
        self._dst_stash: list[MacAddress | None] = [None] * p
        self._active_cycles = [0] * p
        self._stall_cycles = [0] * p
        self._sample_registers()

    # -- one cycle ------------------------------------------------------

    def step(self) -> CycleRecord:
        cfg = self.cfg
        p = cfg.ports
        cycle = self.cycle
        boundary = cycle % cfg.clock_ratio == 0
        gmii_cycle = cycle // cfg.clock_ratio

        # (1) ingress sampling at GMII boundaries
        if boundary:
            for i in range(p):
                sym = self.streams[i].get(gmii_cycle)
                dv = sym is not None and sym.dv
                if dv:
                    self.cdc[i].push(sym, cycle)
                elif self._prev_dv[i]:
                    self.cdc[i].push(GmiiSymbol(dv=False), cycle)
                self._prev_dv[i] = dv

        # (2) grants from last cycle's registered requests
        write_grant = self.write_ring.grant(self._write_reqs)
        read_grant = self.read_ring.grant(self._read_reqs)
        release_grant = self.release_ring.grant(self._release_reqs)
        learn_grant = self.learn_ring.grant(self._learn_reqs)
        alloc_port = self.alloc_queue.grant(
            self._alloc_wants, self.freelist.free_count > 0
        )
        alloc_block = self.freelist.allocate() if alloc_port is not None else None

        # (3) ingress parsers
        rx_outs = []
        for i in range(p):
            item = self.cdc[i].pop_ready(cycle)
            out = self.rx[i].tick(item, self._wr_ready[i])
            rx_outs.append(out)
            if out.dst_ready:
                self._dst_stash[i] = out.dst
            if out.src_ready:
                if self._pending_learn[i] is not None:
                    raise InvariantViolation(f"learn slot overflow on port {i}")
                self._pending_learn[i] = (out.src, i)
            if out.eof:
                if out.error:
                    if out.error_dropped:
                        self.stats.rx_backpressure_drops[i] += 1
                    else:
                        self.stats.rx_crc_drops[i] += 1
                else:
                    self.stats.rx_frames[i] += 1

        # (4) write controllers
        for i in range(p):
            out = self.wc[i].tick(
                rx_outs[i],
                alloc_grant=alloc_block if alloc_port == i else None,
                write_grant=write_grant == i,
                return_grant=release_grant == p + i,
            )
            if out.write_issue is not None:
                self.store.issue_write(*out.write_issue)
            if out.return_issue is not None:
                self.freelist.return_block(out.return_issue)
            if out.frame_done is not None:
                dst = self._dst_stash[i]
                self._dst_stash[i] = None
                if not out.frame_done.error:
                    if self._pending_route[i] is not None:
                        raise InvariantViolation(f"route slot overflow on port {i}")
                    if dst is None:
                        raise InvariantViolation("clean frame without a destination")
                    self._pending_route[i] = (out.frame_done, dst)

        # (5) learning, lookup and the routing decision
        voq_pushes: dict[int, VoqEntry] = {}
        routed: FrameDone | None = None
        if learn_grant is not None:
            if learn_grant < p:
                mac, port = self._pending_learn[learn_grant]
                self._pending_learn[learn_grant] = None
                evicted = self.table.learn(mac, port)
                self.stats.learns += 1
                self.stats.evictions += int(evicted)
            else:
                i = learn_grant - p
                done, dst = self._pending_route[i]
                self._pending_route[i] = None
                hit = self.table.lookup(dst)
                targets, flood = route_targets(hit, i, p)
                if flood:
                    self.stats.floods += 1
                else:
                    self.stats.unicasts += 1
                entry = VoqEntry(start=done.start, flood=flood, length=done.length)
                for b in done.blocks:
                    self.freelist.set_refcount(b, len(targets))
                for t in targets:
                    voq_pushes[t] = entry
                routed = done

        # (6) virtual output queues; (6.5) dropped-copy bookkeeping
        popped: list[VoqEntry | None] = []
        rejected = 0
        for i in range(p):
            entry, accepted = self.voqs[i].tick(voq_pushes.get(i), self._voq_ready[i])
            popped.append(entry)
            if i in voq_pushes and not accepted:
                self.stats.voq_drops[i] += 1
                rejected += 1
        if rejected:
            if cfg.fix_flood_leak:
                # undo the dropped copies' share of the reference counts
                for _ in range(rejected):
                    for b in routed.blocks:
                        self.freelist.release(b)
            else:
                # the counts can never reach zero: the chain is stranded
                self.stats.leaked_blocks += len(routed.blocks)

        # (7) read controllers
        data_port = self._read_inflight
        read_data = self.store.read_result() if data_port is not None else None
        self._read_inflight = None
        block_outs = []
        for i in range(p):
            out = self.rc[i].tick(
                start=self._tx_start[i],
                read_grant=read_grant == i,
                read_data=read_data if data_port == i else None,
                release_grant=release_grant == i,
            )
            self._tx_start[i] = None
            if out.read_issue is not None:
                self.store.issue_read(out.read_issue)
                self._read_inflight = i
            if out.release_issue is not None:
                self.freelist.release(out.release_issue)
            block_outs.append(out.block_out)

        # (8) transmitters and the egress wire
        for i in range(p):
            out = self.tx[i].tick(popped[i], block_outs[i], boundary)
            if out.start_read is not None:
                self._tx_start[i] = out.start_read
            if boundary:
                event = self.monitors[i].observe(gmii_cycle, out.symbol)
                if event is not None:
                    self.events.append(event)
                    self.stats.tx_frames[i] += 1

        # (9) end-of-cycle commits
        self.store.commit()
        self.freelist.commit()
        self._sample_registers()

        # (10) audit and per-cycle stats
        self._audit()
        free_now = self.freelist.free_count
        if free_now < self.stats.free_list_low_watermark:
            self.stats.free_list_low_watermark = free_now
        for i in range(p):
            if self.wc[i].active:
                self._active_cycles[i] += 1
                if self.wc[i].stalled:
                    self._stall_cycles[i] += 1
        self.cycle += 1
        return CycleRecord(
            cycle=cycle,
            free_blocks=free_now,
            voq_depths=tuple(len(q) for q in self.voqs),
            rx_active=tuple(r.frame_active for r in self.rx),
            tx_active=tuple(t.busy for t in self.tx),
        )

    def _sample_registers(self):
        p = self.cfg.ports
        for i in range(p):
            self._wr_ready[i] = self.wc[i].ready
            self._voq_ready[i] = self.tx[i].voq_ready
            self._write_reqs[i] = self.wc[i].wants_write
            self._read_reqs[i] = self.rc[i].wants_read and self.tx[i].block_ready
            self._release_reqs[i] = self.rc[i].wants_release
            self._release_reqs[p + i] = self.wc[i].wants_return
            # a port's lookup waits until its own learn has landed
            self._learn_reqs[i] = self._pending_learn[i] is not None
            self._learn_reqs[p + i] = (
                self._pending_route[i] is not None and self._pending_learn[i] is None
            )
        wants = {i for i in range(p) if self.wc[i].wants_alloc}
        self.alloc_queue.update(sorted(wants))
        self._alloc_wants = wants

    def _audit(self):
        held = 0
        for i in range(self.cfg.ports):
            held += len(self.wc[i].held_blocks)
            pending = self._pending_route[i]
            if pending is not None:
                held += len(pending[0].blocks)
        total = (
            self.freelist.free_count
            + self.freelist.pending_count
            + self.freelist.armed_count
            + held
        )
        if total != self.cfg.blocks:
            raise InvariantViolation(
                f"block conservation broken at cycle {self.cycle}: "
                f"{self.freelist.free_count} free + {self.freelist.pending_count} "
                f"pending + {self.freelist.armed_count} armed + {held} held "
                f"!= {self.cfg.blocks}"
            )

    def drained(self) -> bool:
        """Nothing in flight anywhere (stranded armed blocks excluded:
        a flood leak is a steady state, not activity)."""
        return (
            all(len(q) == 0 for q in self.cdc)
            and not any(r.frame_active for r in self.rx)
            and all(w.mode == WcMode.IDLE and not w.wants_return for w in self.wc)
            and all(s is None for s in self._pending_learn)
            and all(s is None for s in self._pending_route)
            and all(q.empty for q in self.voqs)
            and not any(r.busy for r in self.rc)
            and all(t.mode == TxMode.IDLE for t in self.tx)
            and self.freelist.pending_count == 0
            and self._read_inflight is None
        )

    def finalize_stats(self):
        self.stats.cycles = self.cycle
        self.stats.free_blocks_end = self.freelist.free_count
        fractions = [
            self._stall_cycles[i] / self._active_cycles[i]
            for i in range(self.cfg.ports)
            if self._active_cycles[i]
        ]
        self.stats.wr_stall_fraction = max(fractions, default=0.0)


def run(
    config: SwitchConfig,
    streams: Mapping[int, Mapping[int, GmiiSymbol]],
    timeline: list | None = None,
) -> tuple[list[EgressEvent], SwitchStats]:
    """Simulate until the trace is exhausted and the switch drains, or
    until max_cycles.  Returns egress events ordered by wire time."""
    switch = Switch(config, streams)
    end_gmii = max((max(s) for s in switch.streams if s), default=-1)
    drain_from = (end_gmii + 2) * config.clock_ratio
    limit = config.max_cycles if config.max_cycles is not None else drain_from + 200_000
    while switch.cycle < limit:
        record = switch.step()
        if timeline is not None:
            timeline.append(record)
        if switch.cycle >= drain_from and switch.drained():
            break
    else:
        switch.stats.truncated = True
    switch.finalize_stats()
    events = sorted(switch.events, key=lambda e: (e.first_gmii_cycle, e.port))
    return events, switch.stats
