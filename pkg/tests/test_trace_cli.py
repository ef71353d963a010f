import io
import json

import pytest

from l2switch import cli
from l2switch.errors import InvariantViolation, TraceError
from l2switch.trace import generate, parse_trace

GOOD_LINE = json.dumps(
    {
        "port": 0,
        "start_gmii_cycle": 0,
        "dst": "02:ff:00:00:00:00",
        "src": "02:00:00:00:00:00",
        "ethertype": "88b5",
        "payload_hex": "00" * 50,
        "corrupt_fcs": False,
    }
)


def test_generated_traces_parse_back():
    for name in ("flood-then-learn", "crc-drop", "voq-flood-leak", "line-rate-4port"):
        records = generate(name)
        parsed, _ = parse_trace([r.to_json() for r in records])
        assert parsed == records


def test_parse_accepts_blank_lines_and_defaults():
    line = json.dumps(
        {
            "port": 1,
            "start_gmii_cycle": 5,
            "dst": "ff:ff:ff:ff:ff:ff",
            "src": "02:00:00:00:00:01",
            "ethertype": "0800",
            "payload_hex": "",
        }
    )
    records, warnings = parse_trace(["", line, "   "])
    assert len(records) == 1
    assert records[0].corrupt_fcs is False
    assert records[0].payload == b""
    assert warnings  # 18-byte body is under the classic minimum


@pytest.mark.parametrize(
    "mutation,message",
    [
        ({"port": 7}, "port"),
        ({"port": "0"}, "port"),
        ({"start_gmii_cycle": -1}, "start_gmii_cycle"),
        ({"dst": "xx:00:00:00:00:00"}, "dst"),
        ({"src": None}, "src"),
        ({"ethertype": "88b"}, "ethertype"),
        ({"ethertype": "zzzz"}, "ethertype"),
        ({"payload_hex": "abc"}, "payload_hex"),
        ({"payload_hex": "gg"}, "payload_hex"),
        ({"payload_hex": "00" * 1501}, "payload"),
        ({"corrupt_fcs": "yes"}, "corrupt_fcs"),
    ],
)
def test_parse_rejects_bad_fields(mutation, message):
    record = json.loads(GOOD_LINE)
    record.update(mutation)
    with pytest.raises(TraceError) as err:
        parse_trace([GOOD_LINE, json.dumps(record)])
    assert message in str(err.value)
    assert err.value.line == 2


def test_parse_rejects_non_json_with_line_number():
    with pytest.raises(TraceError) as err:
        parse_trace([GOOD_LINE, "{not json"])
    assert err.value.line == 2


def test_gap_rule_boundary():
    first = json.loads(GOOD_LINE)
    second = json.loads(GOOD_LINE)
    wire = 8 + 14 + 50 + 4
    second["start_gmii_cycle"] = wire + 12  # exactly legal
    parse_trace([json.dumps(first), json.dumps(second)])
    second["start_gmii_cycle"] = wire + 11
    with pytest.raises(TraceError) as err:
        parse_trace([json.dumps(first), json.dumps(second)])
    assert "12" in str(err.value)


def test_gap_rule_ignores_other_ports():
    first = json.loads(GOOD_LINE)
    second = json.loads(GOOD_LINE)
    second["port"] = 1
    second["start_gmii_cycle"] = 3
    parse_trace([json.dumps(first), json.dumps(second)])  # no error


def run_cli(argv, stdin_text=None, monkeypatch=None):
    if stdin_text is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin_text))
    return cli.main(argv)


def test_gen_writes_trace_and_manifest(tmp_path):
    out = tmp_path / "trace.jsonl"
    assert cli.main(["gen", "--scenario", "crc-drop", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1
    manifest = json.loads((tmp_path / "trace.jsonl.manifest.json").read_text())
    assert manifest["scenario"] == "crc-drop"
    assert manifest["records"] == 1
    assert "description" in manifest


def test_gen_to_stdout(capsys):
    assert cli.main(["gen", "--scenario", "flood-then-learn"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 8
    for line in lines:
        json.loads(line)


def test_run_produces_events_and_stats(tmp_path):
    trace = tmp_path / "t.jsonl"
    events = tmp_path / "e.jsonl"
    stats = tmp_path / "s.json"
    cli.main(["gen", "--scenario", "flood-then-learn", "--out", str(trace)])
    code = cli.main(
        ["run", "--trace", str(trace), "--out", str(events), "--stats", str(stats)]
    )
    assert code == 0
    event_lines = [json.loads(l) for l in events.read_text().splitlines()]
    # 4 floods at 3 copies each, then 4 unicasts
    assert len(event_lines) == 16
    loaded = json.loads(stats.read_text())
    assert loaded["floods"] == 4 and loaded["unicasts"] == 4
    assert loaded["free_blocks_end"] == 64
    for line in event_lines:
        assert line["fcs_ok"] is True
        assert set(line) == {
            "port", "first_gmii_cycle", "dst", "src",
            "ethertype", "payload_hex", "fcs_hex", "fcs_ok",
        }


def test_run_reads_stdin(tmp_path, capsys, monkeypatch):
    trace_text = GOOD_LINE + "\n"
    code = run_cli(
        ["run", "--trace", "-", "--out", "-", "--stats", str(tmp_path / "s.json")],
        stdin_text=trace_text,
        monkeypatch=monkeypatch,
    )
    assert code == 0
    out_lines = capsys.readouterr().out.splitlines()
    assert len(out_lines) == 3  # flood to the three other ports


def test_run_rejects_bad_trace(tmp_path, capsys):
    trace = tmp_path / "bad.jsonl"
    trace.write_text(GOOD_LINE + "\n{broken\n")
    code = cli.main(
        [
            "run", "--trace", str(trace),
            "--out", str(tmp_path / "e.jsonl"),
            "--stats", str(tmp_path / "s.json"),
        ]
    )
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def test_validate_ok_and_gap_error(tmp_path, capsys):
    good = tmp_path / "good.jsonl"
    cli.main(["gen", "--scenario", "line-rate-4port", "--out", str(good)])
    assert cli.main(["validate", "--trace", str(good)]) == 0

    first = json.loads(GOOD_LINE)
    second = json.loads(GOOD_LINE)
    second["start_gmii_cycle"] = first["start_gmii_cycle"] + 5
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps(first) + "\n" + json.dumps(second) + "\n")
    assert cli.main(["validate", "--trace", str(bad)]) == 2


def test_missing_trace_file(capsys):
    assert cli.main(
        ["run", "--trace", "/nonexistent.jsonl", "--out", "-", "--stats", "-"]
    ) == 2
    assert "cannot read" in capsys.readouterr().err


def test_audit_failure_exit_code(tmp_path, monkeypatch, capsys):
    def explode(*args, **kwargs):
        raise InvariantViolation("block conservation broken (simulated)")

    monkeypatch.setattr(cli, "run", explode)
    trace = tmp_path / "t.jsonl"
    trace.write_text(GOOD_LINE + "\n")
    code = cli.main(
        ["run", "--trace", str(trace), "--out", "-", "--stats", "-"]
    )
    assert code == 3
    assert "audit failure" in capsys.readouterr().err


def test_report_renders_figures(tmp_path):
    trace = tmp_path / "t.jsonl"
    cli.main(["gen", "--scenario", "crc-drop", "--out", str(trace)])
    out_dir = tmp_path / "report"
    code = cli.main(["report", "--trace", str(trace), "--out-dir", str(out_dir)])
    assert code == 0
    assert (out_dir / "events.jsonl").exists()
    assert (out_dir / "stats.json").exists()
    for name in ("occupancy.png", "activity.png", "frame_counts.png"):
        png = out_dir / name
        assert png.exists()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_rerun_is_byte_identical(tmp_path):
    trace = tmp_path / "t.jsonl"
    cli.main(["gen", "--scenario", "flood-then-learn", "--out", str(trace)])
    outputs = []
    for tag in ("a", "b"):
        events = tmp_path / f"e{tag}.jsonl"
        stats = tmp_path / f"s{tag}.json"
        cli.main(
            ["run", "--trace", str(trace), "--out", str(events), "--stats", str(stats)]
        )
        outputs.append((events.read_bytes(), stats.read_bytes()))
    assert outputs[0] == outputs[1]
