"""Command-line front end.

    l2switch run --trace t.jsonl --out events.jsonl --stats stats.json
    l2switch gen --scenario flood-then-learn | l2switch run --trace - ...
    l2switch validate --trace t.jsonl
    l2switch report --trace t.jsonl --out-dir report/

Exit codes: 0 success, 2 invalid input (with a line-numbered message),
3 internal audit failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import SwitchConfig, run
from .errors import InvariantViolation, ScheduleError, TraceError
from .trace import (
    SCENARIOS,
    build_streams,
    format_event,
    generate,
    manifest_for,
    parse_trace,
)

EXIT_INPUT = 2
EXIT_AUDIT = 3


def _read_trace(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.readlines()
    try:
        return Path(path).read_text().splitlines()
    except OSError as exc:
        raise TraceError(f"cannot read trace {path!r}: {exc.strerror}") from None


def _write_lines(path: str, lines: list[str]):
    text = "".join(line + "\n" for line in lines)
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--ports", type=int, default=4)
    parser.add_argument("--blocks", type=int, default=64)
    parser.add_argument("--voq-depth", type=int, default=16)
    parser.add_argument("--fix-flood-leak", action="store_true")
    parser.add_argument("--max-cycles", type=int, default=None)


def _config_from(args) -> SwitchConfig:
    try:
        return SwitchConfig(
            ports=args.ports,
            blocks=args.blocks,
            voq_depth=args.voq_depth,
            fix_flood_leak=args.fix_flood_leak,
            max_cycles=args.max_cycles,
        )
    except ValueError as exc:
        raise TraceError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l2switch",
        description="Cycle-level simulator of a 4-port store-and-forward "
        "Ethernet switch.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate a trace")
    run_p.add_argument("--trace", required=True, help="trace file, - for stdin")
    run_p.add_argument("--out", required=True, help="egress events, - for stdout")
    run_p.add_argument("--stats", required=True, help="stats JSON, - for stdout")
    _config_flags(run_p)

    gen_p = sub.add_parser("gen", help="emit a bundled traffic scenario")
    gen_p.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    gen_p.add_argument("--frames", type=int, default=0, help="0 = scenario default")
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument(
        "--out",
        default="-",
        help="trace destination; with a file, a .manifest.json sidecar "
        "describes the scenario",
    )

    val_p = sub.add_parser("validate", help="check a trace without running it")
    val_p.add_argument("--trace", required=True, help="trace file, - for stdin")

    rep_p = sub.add_parser(
        "report", help="run a trace and render occupancy/activity figures"
    )
    rep_p.add_argument("--trace", required=True, help="trace file, - for stdin")
    rep_p.add_argument("--out-dir", required=True)
    _config_flags(rep_p)
    return parser


def cmd_run(args) -> int:
    config = _config_from(args)
    records, warnings = parse_trace(_read_trace(args.trace), ports=config.ports)
    for warning in warnings:
        print(warning, file=sys.stderr)
    events, stats = run(config, build_streams(records))
    _write_lines(args.out, [format_event(e) for e in events])
    stats_text = json.dumps(stats.to_dict(), indent=2) + "\n"
    if args.stats == "-":
        sys.stdout.write(stats_text)
    else:
        Path(args.stats).write_text(stats_text)
    return 0


def cmd_gen(args) -> int:
    try:
        records = generate(args.scenario, frames=args.frames, seed=args.seed)
    except ValueError as exc:
        raise TraceError(str(exc)) from None
    _write_lines(args.out, [rec.to_json() for rec in records])
    if args.out != "-":
        manifest = manifest_for(args.scenario, args.frames, args.seed, records)
        Path(args.out + ".manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n"
        )
    return 0


def cmd_validate(args) -> int:
    records, warnings = parse_trace(_read_trace(args.trace))
    for warning in warnings:
        print(warning, file=sys.stderr)
    print(f"ok: {len(records)} records")
    return 0


def cmd_report(args) -> int:
    from .report import render_report  # matplotlib import deferred

    config = _config_from(args)
    records, warnings = parse_trace(_read_trace(args.trace), ports=config.ports)
    for warning in warnings:
        print(warning, file=sys.stderr)
    timeline: list = []
    events, stats = run(config, build_streams(records), timeline=timeline)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_lines(str(out_dir / "events.jsonl"), [format_event(e) for e in events])
    (out_dir / "stats.json").write_text(json.dumps(stats.to_dict(), indent=2) + "\n")
    figures = render_report(timeline, stats, config.blocks, out_dir)
    for path in [out_dir / "events.jsonl", out_dir / "stats.json", *figures]:
        print(path)
    return 0


COMMANDS = {
    "run": cmd_run,
    "gen": cmd_gen,
    "validate": cmd_validate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (TraceError, ScheduleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return EXIT_AUDIT


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
