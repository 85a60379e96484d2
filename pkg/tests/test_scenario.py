"""Scenario scripts, the verify DSL, reports, and the CLI surface."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from qsnet.errors import SchemaError
from qsnet.kernel import SimEvent, read_jsonl
from qsnet.scenario import (
    ScenarioScript,
    load_script,
    physical_report_csv,
    run,
    shipped_scenarios,
    timing_rows,
    write_artifacts,
)
from qsnet.verify import verify


def event(time, seq, source, kind, **payload):
    return SimEvent(time=time, seq=seq, source=source, kind=kind, payload=payload)


class TestVerifyDsl:
    LOG = [
        event(1.0, 1, "runner", "scenario-step", index=0, action="deploy"),
        event(2.0, 2, "ofs", "ofs-config-start"),
        event(7.0, 3, "ofs", "ofs-config-done"),
        event(8.0, 4, "qkd:2-4", "qkd-start", ins_id="ins-1"),
        event(9.0, 5, "transceiver:island2", "transceiver-config-start", ins_id="ins-1"),
        event(60.0, 6, "proxy:island2", "vnf-deploy-start", ins_id="ins-1"),
        event(90.0, 7, "proxy:island2", "vnf-deploy-done", ins_id="ins-1"),
        event(120.0, 8, "qkd:2-4", "qkd-ack", ins_id="ins-1"),
        event(130.0, 9, "runner", "scenario-step", index=1, action="reconfigure"),
        event(150.0, 10, "nsm", "telemetry-sample", ins_id="ins-1", skr_bps=950.0),
    ]

    def test_precede_pass_and_fail(self):
        assert verify(self.LOG, [{"check": "precede",
                                  "first": {"kind": "qkd-start"},
                                  "then": {"kind": "transceiver-config-start"}}])[0].ok
        assert not verify(self.LOG, [{"check": "precede",
                                      "first": {"kind": "transceiver-config-start"},
                                      "then": {"kind": "qkd-start"}}])[0].ok

    def test_absence_with_step_window(self):
        ok = verify(self.LOG, [{"check": "absent", "match": {"kind": "vnf-deploy-*"},
                                "between": ["step:1", "end"]}])[0]
        assert ok.ok
        bad = verify(self.LOG, [{"check": "absent", "match": {"kind": "vnf-deploy-*"},
                                 "between": ["step:0", "end"]}])[0]
        assert not bad.ok

    def test_overlap(self):
        result = verify(self.LOG, [{
            "check": "overlap",
            "a_start": {"kind": "qkd-start"}, "a_end": {"kind": "qkd-ack"},
            "b_start": {"kind": "vnf-deploy-start"}, "b_end": {"kind": "vnf-deploy-done"},
        }])[0]
        assert result.ok

    def test_count_and_payload_filter(self):
        result = verify(self.LOG, [{"check": "count",
                                    "match": {"kind": "qkd-*", "payload.ins_id": "ins-1"},
                                    "min": 2, "max": 2}])[0]
        assert result.ok

    def test_numeric_bound(self):
        assert verify(self.LOG, [{"check": "bound", "match": {"kind": "telemetry-sample"},
                                  "field": "payload.skr_bps", "min": 1.0}])[0].ok
        assert not verify(self.LOG, [{"check": "bound",
                                      "match": {"kind": "telemetry-sample"},
                                      "field": "payload.skr_bps", "min": 1000.0}])[0].ok

    def test_malformed_pattern_raises_schema_error(self):
        with pytest.raises(SchemaError):
            verify(self.LOG, [{"check": "teleport"}])
        with pytest.raises(SchemaError):
            verify(self.LOG, [{"check": "absent", "match": {"kind": "x"},
                               "between": ["step:9", "end"]}])


class TestScripts:
    def test_shipped_scenarios_present(self):
        assert shipped_scenarios() == ["scenario1", "scenario2", "scenario3"]

    def test_empty_script_empty_log(self):
        script = ScenarioScript.from_dict({"name": "empty", "steps": [], "horizon_s": 10})
        result = run(script, seed=1)
        assert result.ok
        assert result.events == []

    def test_out_of_order_steps_rejected(self):
        with pytest.raises(SchemaError):
            ScenarioScript.from_dict({"name": "bad", "steps": [
                {"at": 10, "action": "deploy", "args": {"targets": []}},
                {"at": 5, "action": "deploy", "args": {"targets": []}},
            ]})

    def test_undefined_target_rejected(self):
        with pytest.raises(SchemaError):
            ScenarioScript.from_dict({"name": "bad", "steps": [
                {"at": 1, "action": "deploy", "args": {"targets": ["ghost"]}},
            ]})

    def test_unknown_action_rejected(self):
        with pytest.raises(SchemaError):
            ScenarioScript.from_dict({"name": "bad", "steps": [
                {"at": 1, "action": "explode"}]})


class TestShippedRuns:
    def test_scenario1_three_operational_one_quantum(self):
        result = run(load_script("scenario1"), seed=5)
        assert result.ok, [c.line() for c in result.checks]
        statuses = [result.orchestrator.ins_status(i)
                    for i in result.alias_to_ins.values()]
        assert all(s["lifecycle"] == "OPERATIONAL" for s in statuses)
        with_quantum = [s for s in statuses if "skr_bps" in s["telemetry"]]
        assert len(with_quantum) == 1

    def test_scenario3_swap_properties(self):
        result = run(load_script("scenario3"), seed=5)
        assert result.ok, [c.line() for c in result.checks]

    def test_reproducible_artifacts(self, tmp_path):
        a = run(load_script("scenario1"), seed=11)
        b = run(load_script("scenario1"), seed=11)
        assert a.log.to_jsonl() == b.log.to_jsonl()
        write_artifacts(a, tmp_path / "a")
        write_artifacts(b, tmp_path / "b")
        for name in ("events.jsonl", "events.csv", "physical_report.csv",
                     "timing_summary.csv"):
            assert (tmp_path / "a" / name).read_text() \
                == (tmp_path / "b" / name).read_text()

    def test_physical_report_contents(self):
        result = run(load_script("scenario1"), seed=3)
        report = physical_report_csv(result)
        lines = report.strip().splitlines()
        assert len(lines) == 4  # header + three services
        assert "PM-QPSK" in report and "PM-16QAM" in report

    def test_timing_rows_pair_starts_with_dones(self):
        result = run(load_script("scenario1"), seed=3)
        rows = timing_rows(result.events)
        phases = {r["phase"] for r in rows}
        assert {"ofs", "wss", "voyager", "ns-deploy", "l2-flow", "qkd-init"} <= phases
        for r in rows:
            assert r["duration_s"] >= 0
        voyager = [r for r in rows if r["phase"] == "voyager"]
        assert all(45.0 <= r["duration_s"] <= 55.0 for r in voyager)


class TestCli:
    def run_cli(self, *args):
        return subprocess.run([sys.executable, "-m", "qsnet.cli", *args],
                              capture_output=True, text=True)

    def test_run_writes_artifacts_and_exits_zero(self, tmp_path):
        out = tmp_path / "artifacts"
        proc = self.run_cli("run", "scenario1", "--seed", "7", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        assert (out / "events.jsonl").exists()
        assert (out / "summary.json").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["ok"] is True

    def test_verify_subcommand_pass_and_fail(self, tmp_path):
        out = tmp_path / "artifacts"
        self.run_cli("run", "scenario1", "--seed", "7", "--out", str(out))
        good = tmp_path / "good.json"
        good.write_text(json.dumps([{"check": "count", "match": {"kind": "ns-operational"},
                                     "min": 3, "max": 3}]))
        proc = self.run_cli("verify", str(out / "events.jsonl"), str(good))
        assert proc.returncode == 0, proc.stdout
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps([{"check": "absent", "match": {"kind": "qkd-start"}}]))
        proc = self.run_cli("verify", str(out / "events.jsonl"), str(bad))
        assert proc.returncode == 2

    def test_schema_error_exit_code(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        proc = self.run_cli("run", str(broken))
        assert proc.returncode == 3

    def test_report_csv(self, tmp_path):
        out = tmp_path / "artifacts"
        self.run_cli("run", "scenario1", "--seed", "7", "--out", str(out))
        proc = self.run_cli("report", str(out / "events.jsonl"), "--format", "csv")
        assert proc.returncode == 0
        assert proc.stdout.startswith("step,phase,source")

    def test_override_changes_latency(self, tmp_path):
        out = tmp_path / "a"
        proc = self.run_cli("run", "scenario1", "--seed", "7",
                            "--override", "latency.ofs_s=3", "--out", str(out))
        assert proc.returncode == 0, proc.stderr
        events = read_jsonl((out / "events.jsonl").read_text())
        start = next(e.time for e in events if e.kind == "ofs-config-start")
        done = next(e.time for e in events if e.kind == "ofs-config-done")
        assert done - start == pytest.approx(3.0)


class TestRunErrors:
    def test_step_error_reported_not_raised(self):
        script = ScenarioScript.from_dict({
            "name": "collide", "horizon_s": 400,
            "steps": [
                {"at": 0, "action": "register", "args": {"islands": [
                    {"name": f"island{i}", "certificate_id": f"c{i}",
                     "catalogue": [{"ns_id": "svc", "vnf": {"vnfd_id": "v"}}]}
                    for i in range(1, 5)]}},
                {"at": 1, "action": "compose", "args": {"services": [
                    {"alias": "a", "members": [[1, "svc"], [4, "svc"]], "secured": True},
                    {"alias": "b", "members": [[2, "svc"], [4, "svc"]], "secured": True},
                ]}},
                {"at": 2, "action": "deploy", "args": {"targets": ["a", "b"]}},
            ]})
        result = run(script, seed=0)
        assert result.step_errors
        assert not result.ok
