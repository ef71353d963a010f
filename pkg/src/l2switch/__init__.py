"""Cycle-level simulator of a four-port store-and-forward L2 Ethernet
switch: GMII ingress, shared block memory with linked-list chaining,
MAC learning, virtual output queues, GMII egress."""

from .core import (
    CycleRecord,
    EgressEvent,
    Switch,
    SwitchConfig,
    SwitchStats,
    run,
)
from .errors import InvariantViolation, ScheduleError, TraceError
from .frame import EthernetFrame, GmiiSymbol, MacAddress, crc32, to_gmii_stream
from .trace import (
    SCENARIOS,
    TraceRecord,
    build_streams,
    format_event,
    generate,
    parse_trace,
)

__all__ = [
    "CycleRecord",
    "EgressEvent",
    "EthernetFrame",
    "GmiiSymbol",
    "InvariantViolation",
    "MacAddress",
    "SCENARIOS",
    "ScheduleError",
    "Switch",
    "SwitchConfig",
    "SwitchStats",
    "TraceError",
    "TraceRecord",
    "build_streams",
    "crc32",
    "format_event",
    "generate",
    "parse_trace",
    "run",
    "to_gmii_stream",
]
