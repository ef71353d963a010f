"""Trace and event records: line-delimited JSON in, line-delimited
JSON out, plus the generators for the bundled traffic scenarios.

A trace line describes one injected frame:

    {"port": 0, "start_gmii_cycle": 0, "dst": "02:00:00:00:00:01",
     "src": "02:00:00:00:00:02", "ethertype": "88b5",
     "payload_hex": "00ff", "corrupt_fcs": false}

An event line describes one frame leaving the switch, same field
style, with `first_gmii_cycle`, `fcs_hex` (the four FCS bytes in wire
order) and `fcs_ok`.  All hex is lowercase without separators.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .core import EgressEvent
from .errors import TraceError
from .frame import (
    FCS_LEN,
    HEADER_LEN,
    INTERFRAME_GAP,
    MAX_PAYLOAD,
    PREAMBLE_LEN,
    EthernetFrame,
    MacAddress,
    to_gmii_stream,
)

WARN_BODY_LEN = 60  # classic minimum frame size minus FCS


@dataclass(frozen=True)
class TraceRecord:
    port: int
    start_gmii_cycle: int
    dst: MacAddress
    src: MacAddress
    ethertype: int
    payload: bytes
    corrupt_fcs: bool = False

    def frame(self) -> EthernetFrame:
        return EthernetFrame(
            dst=self.dst, src=self.src, ethertype=self.ethertype, payload=self.payload
        )

    def wire_length(self) -> int:
        return PREAMBLE_LEN + 1 + HEADER_LEN + len(self.payload) + FCS_LEN

    def to_json(self) -> str:
        return json.dumps(
            {
                "port": self.port,
                "start_gmii_cycle": self.start_gmii_cycle,
                "dst": str(self.dst),
                "src": str(self.src),
                "ethertype": f"{self.ethertype:04x}",
                "payload_hex": self.payload.hex(),
                "corrupt_fcs": self.corrupt_fcs,
            }
        )


def _parse_mac(obj: dict, key: str, line: int) -> MacAddress:
    try:
        return MacAddress.parse(obj[key])
    except (AttributeError, KeyError, TypeError, ValueError):
        raise TraceError(f"bad or missing {key!r}", line) from None


def parse_record(text: str, line: int, ports: int) -> TraceRecord:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceError(f"not valid JSON: {exc.msg}", line) from None
    if not isinstance(obj, dict):
        raise TraceError("record is not an object", line)
    port = obj.get("port")
    if not isinstance(port, int) or not 0 <= port < ports:
        raise TraceError(f"port must be 0..{ports - 1}", line)
    start = obj.get("start_gmii_cycle")
    if not isinstance(start, int) or start < 0:
        raise TraceError("start_gmii_cycle must be a non-negative integer", line)
    dst = _parse_mac(obj, "dst", line)
    src = _parse_mac(obj, "src", line)
    ethertype_text = obj.get("ethertype")
    if (
        not isinstance(ethertype_text, str)
        or len(ethertype_text) != 4
        or any(c not in "0123456789abcdefABCDEF" for c in ethertype_text)
    ):
        raise TraceError("ethertype must be 4 hex chars", line)
    payload_hex = obj.get("payload_hex", "")
    if not isinstance(payload_hex, str) or len(payload_hex) % 2:
        raise TraceError("payload_hex must be an even-length hex string", line)
    try:
        payload = bytes.fromhex(payload_hex)
    except ValueError:
        raise TraceError("payload_hex must be an even-length hex string", line) from None
    if len(payload) > MAX_PAYLOAD:
        raise TraceError(f"payload longer than {MAX_PAYLOAD} bytes", line)
    corrupt = obj.get("corrupt_fcs", False)
    if not isinstance(corrupt, bool):
        raise TraceError("corrupt_fcs must be a boolean", line)
    return TraceRecord(
        port=port,
        start_gmii_cycle=start,
        dst=dst,
        src=src,
        ethertype=int(ethertype_text, 16),
        payload=payload,
        corrupt_fcs=corrupt,
    )


def parse_trace(
    lines: Iterable[str], ports: int = 4
) -> tuple[list[TraceRecord], list[str]]:
    """Parse and validate a whole trace.  Returns (records, warnings);
    raises TraceError with a line number on the first violation."""
    records: list[tuple[int, TraceRecord]] = []
    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        records.append((line_no, parse_record(text, line_no, ports)))
    warnings = []
    last_end: dict[int, tuple[int, int]] = {}  # port -> (end_cycle, line)
    for line_no, rec in sorted(records, key=lambda r: (r[1].start_gmii_cycle, r[0])):
        body_len = HEADER_LEN + len(rec.payload) + FCS_LEN
        if body_len < WARN_BODY_LEN:
            warnings.append(
                f"line {line_no}: frame body {body_len} bytes is below the "
                f"classic {WARN_BODY_LEN}-byte minimum (carried verbatim)"
            )
        if rec.port in last_end:
            end, prev_line = last_end[rec.port]
            if rec.start_gmii_cycle < end + INTERFRAME_GAP:
                raise TraceError(
                    f"frame on port {rec.port} starts at cycle "
                    f"{rec.start_gmii_cycle}, needs >= {INTERFRAME_GAP} idle "
                    f"cycles after the frame from line {prev_line} "
                    f"(ends at cycle {end - 1})",
                    line_no,
                )
        last_end[rec.port] = (rec.start_gmii_cycle + rec.wire_length(), line_no)
    return [rec for _, rec in records], warnings


def build_streams(records: Iterable[TraceRecord]) -> dict:
    """Per-port GMII timelines for the core."""
    schedules: dict[int, list] = {}
    for rec in records:
        schedules.setdefault(rec.port, []).append(
            (rec.frame(), rec.corrupt_fcs, rec.start_gmii_cycle)
        )
    return {port: to_gmii_stream(entries) for port, entries in schedules.items()}


def format_event(event: EgressEvent) -> str:
    return json.dumps(
        {
            "port": event.port,
            "first_gmii_cycle": event.first_gmii_cycle,
            "dst": str(event.dst),
            "src": str(event.src),
            "ethertype": f"{event.ethertype:04x}",
            "payload_hex": event.payload.hex(),
            "fcs_hex": event.fcs.hex(),
            "fcs_ok": event.fcs_ok,
        }
    )


# -- scenario generators ------------------------------------------------
#
# All MAC addressing follows one convention: station behind port p has
# 02:00:00:00:00:0p; addresses 02:ff:... never appear as a source, so
# they are never learned and always flood.

SCENARIOS = {}


def _scenario(name, description):
    def register(fn):
        fn.scenario_name = name
        fn.description = description
        SCENARIOS[name] = fn
        return fn

    return register


def port_mac(port: int) -> MacAddress:
    return MacAddress((0x02, 0, 0, 0, 0, port))


def unknown_mac(port: int) -> MacAddress:
    return MacAddress((0x02, 0xFF, 0, 0, 0, port))


# Simultaneous multi-block frames on phase-locked ports would all hit
# the shared write port in the same cycle forever; real stations are
# never phase-locked, so senders are staggered by a few GMII cycles.
PORT_STAGGER = 7


@_scenario(
    "flood-then-learn",
    "every port sends to an unknown destination (flood), then each "
    "sends to a now-learned station (unicast)",
)
def gen_flood_then_learn(frames: int, seed: int, ports: int = 4) -> list[TraceRecord]:
    rng = random.Random(seed)
    rounds = max(2, frames)
    records = []
    for rnd in range(rounds):
        for port in range(ports):
            dst = unknown_mac(port) if rnd == 0 else port_mac((port + 1) % ports)
            records.append(
                TraceRecord(
                    port=port,
                    start_gmii_cycle=rnd * 500 + port * PORT_STAGGER,
                    dst=dst,
                    src=port_mac(port),
                    ethertype=0x88B5,
                    payload=rng.randbytes(46),
                )
            )
    return records


@_scenario(
    "crc-drop",
    "frames with corrupted FCS; the switch must drop them all and "
    "recover every memory block",
)
def gen_crc_drop(frames: int, seed: int, ports: int = 4) -> list[TraceRecord]:
    rng = random.Random(seed)
    records = []
    for n in range(max(1, frames)):
        port = n % ports
        records.append(
            TraceRecord(
                port=port,
                start_gmii_cycle=(n // ports) * 300 + port * PORT_STAGGER,
                dst=unknown_mac(port),
                src=port_mac(port),
                ethertype=0x88B5,
                payload=rng.randbytes(46),
                corrupt_fcs=True,
            )
        )
    return records


@_scenario(
    "voq-flood-leak",
    "three ports flood back-to-back minimum frames at a silent fourth "
    "port until its output queue overflows and copies are dropped",
)
def gen_voq_flood_leak(frames: int, seed: int, ports: int = 4) -> list[TraceRecord]:
    del seed  # fully deterministic payloads: frame identity matters here
    per_port = max(24, frames)
    records = []
    period = (PREAMBLE_LEN + 1 + HEADER_LEN + FCS_LEN) + INTERFRAME_GAP
    for port in range(ports - 1):
        for n in range(per_port):
            records.append(
                TraceRecord(
                    port=port,
                    start_gmii_cycle=n * period + port * PORT_STAGGER,
                    dst=unknown_mac(port),
                    src=port_mac(port),
                    ethertype=0x88B5,
                    payload=b"",
                )
            )
    return records


@_scenario(
    "line-rate-4port",
    "all four ports send back-to-back 200-byte frames in a unicast "
    "permutation (port p to station p+1) at full line rate",
)
def gen_line_rate(frames: int, seed: int, ports: int = 4) -> list[TraceRecord]:
    rng = random.Random(seed)
    per_port = max(5, frames)
    body_payload = 200 - HEADER_LEN - FCS_LEN
    period = (PREAMBLE_LEN + 1 + 200) + INTERFRAME_GAP
    records = []
    for port in range(ports):
        for n in range(per_port):
            records.append(
                TraceRecord(
                    port=port,
                    start_gmii_cycle=n * period + port * PORT_STAGGER,
                    dst=port_mac((port + 1) % ports),
                    src=port_mac(port),
                    ethertype=0x88B5,
                    payload=rng.randbytes(body_payload),
                )
            )
    return records


def generate(name: str, frames: int = 0, seed: int = 0) -> list[TraceRecord]:
    if name not in SCENARIOS:
        raise ValueError(
            f"unknown scenario {name!r}; choose from {', '.join(sorted(SCENARIOS))}"
        )
    records = SCENARIOS[name](frames, seed)
    return sorted(records, key=lambda r: (r.start_gmii_cycle, r.port))


def manifest_for(name: str, frames: int, seed: int, records: list[TraceRecord]) -> dict:
    return {
        "scenario": name,
        "description": SCENARIOS[name].description,
        "frames": frames,
        "seed": seed,
        "records": len(records),
    }
