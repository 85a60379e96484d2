"""Scenario scripts: load, validate, execute against a fresh simulation, and
write the run artifacts (event log, physical-layer report, timing summary).

A script is a time-ordered list of steps (register / compose / deploy /
reconfigure / terminate) plus optional embedded assertions.  Composition
order fixes service ids (ins-1, ins-2, ...), so scripts refer to services
through the aliases they declare and assertions may use the resulting ids.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PlanInfeasibleError, QsnetError, SchemaError
from .kernel import EventLog, LatencyModel, QkdInitModel, SimEvent, SimKernel
from .optical import CalibrationTable, load_calibration_table
from .orchestrator import FaultPlan, Orchestrator
from .topology import Topology, load_topology
from .verify import CheckResult, verify

DATA_DIR = Path(__file__).parent / "data"
SCENARIO_DIR = DATA_DIR / "scenarios"

ACTIONS = ("register", "compose", "deploy", "reconfigure", "terminate")


@dataclass(frozen=True)
class Step:
    at_s: float
    action: str
    args: dict


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    steps: tuple[Step, ...]
    horizon_s: float = 600.0
    telemetry_interval_s: float | None = None
    expected: tuple = ()
    description: str = ""

    @staticmethod
    def from_dict(raw: dict, location: str = "<script>") -> "ScenarioScript":
        for required in ("name", "steps"):
            if required not in raw:
                raise SchemaError(f"missing field '{required}'", location=location)
        steps = []
        last_at = float("-inf")
        aliases: set[str] = set()
        for i, s in enumerate(raw["steps"]):
            loc = f"{location}: steps[{i}]"
            for required in ("at", "action"):
                if required not in s:
                    raise SchemaError(f"missing field '{required}'", location=loc)
            if s["action"] not in ACTIONS:
                raise SchemaError(f"unknown action {s['action']!r}", location=loc)
            if s["at"] < last_at:
                raise SchemaError("steps must be time-ordered", location=loc)
            last_at = s["at"]
            args = s.get("args", {})
            if s["action"] == "compose":
                for service in args.get("services", []):
                    alias = service.get("alias")
                    if not alias:
                        raise SchemaError("compose entries need an alias", location=loc)
                    if alias in aliases:
                        raise SchemaError(f"duplicate alias {alias!r}", location=loc)
                    aliases.add(alias)
            if s["action"] in ("deploy", "terminate"):
                for target in args.get("targets", []):
                    if target not in aliases:
                        raise SchemaError(f"unknown target {target!r}", location=loc)
            if s["action"] == "reconfigure":
                for target in args.get("changes", {}):
                    if target not in aliases:
                        raise SchemaError(f"unknown target {target!r}", location=loc)
            steps.append(Step(at_s=float(s["at"]), action=s["action"], args=args))
        return ScenarioScript(
            name=raw["name"],
            steps=tuple(steps),
            horizon_s=float(raw.get("horizon_s", 600.0)),
            telemetry_interval_s=raw.get("telemetry_interval_s"),
            expected=tuple(raw.get("expected", ())),
            description=raw.get("description", ""),
        )


def load_script(path: str | Path) -> ScenarioScript:
    path = Path(path)
    if not path.exists() and not path.suffix:
        shipped = SCENARIO_DIR / f"{path.name}.json"
        if shipped.exists():
            path = shipped
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError("no such scenario file", location=str(path))
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}", location=str(path))
    return ScenarioScript.from_dict(raw, location=str(path))


def shipped_scenarios() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))


@dataclass
class RunResult:
    script: ScenarioScript
    seed: int
    kernel: SimKernel
    orchestrator: Orchestrator
    alias_to_ins: dict
    step_errors: list
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def log(self) -> EventLog:
        return self.kernel.log

    @property
    def events(self) -> list[SimEvent]:
        return self.kernel.log.events

    @property
    def ok(self) -> bool:
        return not self.step_errors and all(c.ok for c in self.checks)

    def summary(self) -> dict:
        per_ins = {}
        for alias, ins_id in self.alias_to_ins.items():
            status = self.orchestrator.ins_status(ins_id)
            per_ins[alias] = {"ins_id": ins_id, "lifecycle": status["lifecycle"],
                              "secured": status["secured"]}
        return {
            "scenario": self.script.name,
            "seed": self.seed,
            "events": len(self.events),
            "services": per_ins,
            "step_errors": [list(e) for e in self.step_errors],
            "assertions": [{"description": c.description, "ok": c.ok, "detail": c.detail}
                           for c in self.checks],
            "ok": self.ok,
        }


def _apply_overrides(latency: LatencyModel, overrides: dict) -> LatencyModel:
    """Dotted-key overrides onto the latency model, e.g. {"latency.ofs_s": 4}."""
    fields: dict = {}
    qkd_fields: dict = {}
    for key, value in overrides.items():
        if not key.startswith("latency."):
            continue
        name = key[len("latency."):]
        if name.startswith("qkd_init."):
            qkd_fields[name[len("qkd_init."):]] = value
        else:
            fields[name] = value
    if qkd_fields:
        base = latency.qkd_init
        fields["qkd_init"] = QkdInitModel(**{
            "loss_low_db": qkd_fields.get("loss_low_db", base.loss_low_db),
            "time_at_low_s": qkd_fields.get("time_at_low_s", base.time_at_low_s),
            "loss_high_db": qkd_fields.get("loss_high_db", base.loss_high_db),
            "time_at_high_s": qkd_fields.get("time_at_high_s", base.time_at_high_s),
        })
    if not fields:
        return latency
    from dataclasses import replace
    return replace(latency, **fields)


def run(
    script: ScenarioScript,
    seed: int = 0,
    overrides: dict | None = None,
    topology: Topology | None = None,
    table: CalibrationTable | None = None,
    faults: FaultPlan | None = None,
) -> RunResult:
    """Execute a script against a fresh simulation, to its horizon."""
    overrides = overrides or {}
    topology = topology or load_topology()
    table = table or load_calibration_table()
    latency = _apply_overrides(LatencyModel(), overrides)
    kernel = SimKernel(seed=seed)
    orch = Orchestrator(
        kernel, topology, table, latency=latency, faults=faults,
        rekey_interval_s=overrides.get("rekey_interval_s", 60.0),
        telemetry_interval_s=script.telemetry_interval_s,
    )
    alias_to_ins: dict[str, str] = {}
    step_errors: list[tuple[int, str]] = []

    def execute(index: int, step: Step) -> None:
        kernel.emit("runner", "scenario-step", {"index": index, "action": step.action})
        try:
            _execute_step(orch, step, alias_to_ins)
        except (QsnetError, PlanInfeasibleError) as e:
            step_errors.append((index, str(e)))

    for i, step in enumerate(script.steps):
        kernel.schedule(step.at_s, execute, i, step)
    kernel.run_until(script.horizon_s)
    result = RunResult(script=script, seed=seed, kernel=kernel, orchestrator=orch,
                       alias_to_ins=alias_to_ins, step_errors=step_errors)
    if script.expected:
        result.checks = verify(result.events, list(script.expected))
    return result


def _execute_step(orch: Orchestrator, step: Step, alias_to_ins: dict) -> None:
    if step.action == "register":
        for island in step.args.get("islands", []):
            orch.register_island(
                name=island.get("name", ""),
                catalogue=island.get("catalogue", []),
                certificate_id=island["certificate_id"],
                proxy_endpoint=island.get("proxy_endpoint", ""),
            )
        return
    if step.action == "compose":
        for service in step.args.get("services", []):
            ins = orch.compose_ins(
                members=[tuple(m) for m in service["members"]],
                secured=service.get("secured", False),
                wavelength_hint_thz=service.get("wavelength_hint_thz"),
                ttl_s=service.get("ttl_s"),
            )
            alias_to_ins[service["alias"]] = ins.ins_id
        return
    if step.action == "deploy":
        targets = [alias_to_ins[t] for t in step.args["targets"]]
        orch.deploy_batch(targets)
        return
    if step.action == "reconfigure":
        changes = {alias_to_ins[alias]: dict(change)
                   for alias, change in step.args.get("changes", {}).items()}
        orch.reconfigure(changes)
        return
    if step.action == "terminate":
        for target in step.args["targets"]:
            orch.terminate_ins(alias_to_ins[target])
        return
    raise SchemaError(f"unknown action {step.action!r}")


# --- reports ---------------------------------------------------------------

PAIRED_KINDS = {
    "ofs-config-start": ("ofs-config-done", "ofs"),
    "wss-config-start": ("wss-config-done", "wss"),
    "transceiver-config-start": ("transceiver-config-done", "voyager"),
    "vnf-deploy-start": ("vnf-deploy-done", "ns-deploy"),
    "l2-flow-start": ("l2-flow-done", "l2-flow"),
    "qkd-start": ("qkd-ack", "qkd-init"),
}


def timing_rows(events: list[SimEvent]) -> list[dict]:
    """Phase durations from start/done event pairs, one row per pair."""
    step_index = 0
    rows = []
    open_starts: dict[tuple, SimEvent] = {}
    for e in events:
        if e.kind == "scenario-step":
            step_index = e.payload.get("index", step_index)
            continue
        if e.kind in PAIRED_KINDS:
            done_kind, _ = PAIRED_KINDS[e.kind]
            open_starts[(done_kind, e.source, e.payload.get("ins_id"))] = e
            continue
        start = open_starts.pop((e.kind, e.source, e.payload.get("ins_id")), None)
        if start is None:
            continue
        phase = PAIRED_KINDS[start.kind][1]
        rows.append({
            "step": step_index,
            "phase": phase,
            "source": e.source,
            "ins_id": e.payload.get("ins_id") or start.payload.get("ins_id") or "",
            "start_s": start.time,
            "end_s": e.time,
            "duration_s": round(e.time - start.time, 6),
        })
    return rows


def timing_summary_csv(events: list[SimEvent]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[
        "step", "phase", "source", "ins_id", "start_s", "end_s", "duration_s"])
    writer.writeheader()
    for row in timing_rows(events):
        writer.writerow(row)
    return buf.getvalue()


def physical_report_rows(result: RunResult) -> list[dict]:
    rows = []
    for alias, ins_id in sorted(result.alias_to_ins.items(), key=lambda kv: kv[1]):
        status = result.orchestrator.ins_status(ins_id)
        telemetry = status["telemetry"]
        a = status["assignment"]
        row = {
            "ins_id": ins_id,
            "alias": alias,
            "lifecycle": status["lifecycle"],
            "secured": status["secured"],
            "wavelength_fwd_thz": a["wavelength_pair_thz"][0] if a else "",
            "wavelength_rev_thz": a["wavelength_pair_thz"][1] if a else "",
            "modulation": a["modulation"] if a else "",
            "launch_power_dbm": a["launch_power_dbm"] if a else "",
            "ber": telemetry.get("ber", ""),
            "skr_bps": telemetry.get("skr_bps", ""),
            "qber": telemetry.get("qber", ""),
            "pool_bits": telemetry.get("pool_bits", ""),
        }
        rows.append(row)
    return rows


def physical_report_csv(result: RunResult) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=[
        "ins_id", "alias", "lifecycle", "secured", "wavelength_fwd_thz",
        "wavelength_rev_thz", "modulation", "launch_power_dbm", "ber",
        "skr_bps", "qber", "pool_bits"])
    writer.writeheader()
    for row in physical_report_rows(result):
        writer.writerow(row)
    return buf.getvalue()


def write_artifacts(result: RunResult, out_dir: str | Path) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "events_jsonl": out / "events.jsonl",
        "events_csv": out / "events.csv",
        "physical_report": out / "physical_report.csv",
        "timing_summary": out / "timing_summary.csv",
        "summary": out / "summary.json",
    }
    paths["events_jsonl"].write_text(result.log.to_jsonl())
    paths["events_csv"].write_text(result.log.to_csv())
    paths["physical_report"].write_text(physical_report_csv(result))
    paths["timing_summary"].write_text(timing_summary_csv(result.events))
    paths["summary"].write_text(json.dumps(result.summary(), indent=2) + "\n")
    return {name: str(p) for name, p in paths.items()}
