"""HTTP gateway exposing the orchestrator plus a live event stream.

One active simulation per session.  All mutations funnel through a single
lock into the kernel; reads take cheap snapshots of the append-only log.
Two clock modes: ``fast`` (mutations drive the simulation to a settled
state synchronously, for tests and scripted clients) and ``scaled``
(a background thread advances sim time at ``scale`` x wall clock so a
deployment is watchable in a browser).
"""

import threading
import time
import uuid

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import (
    InvalidArgumentError,
    NotFoundError,
    PlanInfeasibleError,
    QsnetError,
)
from .kernel import LatencyModel, SimKernel
from .optical import CalibrationTable, load_calibration_table
from .orchestrator import ACTIVE_STATES, Lifecycle, Orchestrator
from .scenario import load_script, run as run_scenario, shipped_scenarios
from .topology import Topology, load_topology

SETTLING_STATES = ACTIVE_STATES - {Lifecycle.OPERATIONAL}
FAST_STEP_S = 5.0
FAST_HORIZON_S = 3600.0


class GatewaySession:
    """Exactly one live simulation, its clock mode and its run id."""

    def __init__(self, topology: Topology | None = None,
                 table: CalibrationTable | None = None,
                 mode: str = "fast", scale: float = 10.0, seed: int = 0,
                 latency: LatencyModel | None = None,
                 telemetry_interval_s: float | None = 10.0):
        if mode not in ("fast", "scaled", "step"):
            raise InvalidArgumentError(f"unknown mode {mode!r}")
        if scale <= 0:
            raise InvalidArgumentError("scaling factor must be positive")
        self.topology = topology or load_topology()
        self.table = table or load_calibration_table()
        self.latency = latency or LatencyModel()
        self.mode = mode
        self.scale = scale
        self.telemetry_interval_s = telemetry_interval_s
        self.lock = threading.RLock()
        self._ticker: threading.Thread | None = None
        self._stop = threading.Event()
        self.scenario_name: str | None = None
        self.reset(seed=seed)

    def reset(self, seed: int = 0, mode: str | None = None,
              scale: float | None = None) -> None:
        with self.lock:
            if mode is not None:
                if mode not in ("fast", "scaled", "step"):
                    raise InvalidArgumentError(f"unknown mode {mode!r}")
                self.mode = mode
            if scale is not None:
                if scale <= 0:
                    raise InvalidArgumentError("scaling factor must be positive")
                self.scale = scale
            self._stop_ticker()
            self.seed = seed
            self.run_id = uuid.uuid4().hex[:12]
            self.kernel = SimKernel(seed=seed)
            self.orchestrator = Orchestrator(
                self.kernel, self.topology, self.table, latency=self.latency,
                telemetry_interval_s=self.telemetry_interval_s)
            self.scenario_name = None
            if self.mode == "scaled":
                self._start_ticker()

    # -- clock ----------------------------------------------------------------

    def _start_ticker(self) -> None:
        self._stop.clear()
        sim_origin = self.kernel.now
        wall_origin = time.monotonic()

        def tick():
            while not self._stop.wait(0.05):
                target = sim_origin + (time.monotonic() - wall_origin) * self.scale
                with self.lock:
                    self.kernel.run_until(target)

        self._ticker = threading.Thread(target=tick, daemon=True, name="sim-clock")
        self._ticker.start()

    def _stop_ticker(self) -> None:
        if self._ticker is not None:
            self._stop.set()
            self._ticker.join(timeout=2.0)
            self._ticker = None

    def settle(self) -> None:
        """Fast mode: advance until every service stops moving."""
        deadline = self.kernel.now + FAST_HORIZON_S
        while self.kernel.now < deadline:
            busy = any(i.lifecycle in SETTLING_STATES
                       for i in self.orchestrator.ins.values())
            if not busy:
                break
            self.kernel.run_until(self.kernel.now + FAST_STEP_S)

    def after_mutation(self) -> None:
        if self.mode == "fast":
            self.settle()

    def step(self, dt_s: float) -> None:
        if dt_s < 0:
            raise InvalidArgumentError("cannot step backwards")
        self.kernel.run_until(self.kernel.now + dt_s)

    def describe(self) -> dict:
        return {
            "run_id": self.run_id,
            "mode": self.mode,
            "scale": self.scale,
            "seed": self.seed,
            "sim_time_s": self.kernel.now,
            "n_events": len(self.kernel.log),
            "scenario": self.scenario_name,
        }


def _error_response(exc: QsnetError, status: int) -> JSONResponse:
    body = {"code": exc.code, "message": str(exc)}
    if getattr(exc, "constraint", None):
        body["violated_constraint"] = exc.constraint
    if isinstance(exc, PlanInfeasibleError):
        body["violated_constraint"] = "; ".join(
            f"{rid}: {why}" for rid, why in sorted(exc.violations.items()))
    return JSONResponse(status_code=status, content=body)


STATUS_BY_CODE = {
    "not-found": 404,
    "invalid-state": 409,
    "infeasible": 422,
    "invalid-argument": 400,
    "schema-error": 400,
    "unsupported-configuration": 422,
    "quantum-collision": 422,
    "wavelength-collision": 422,
    "unknown-port": 400,
    "degree-in-use": 409,
    "disconnected-path": 400,
}


def create_app(session: GatewaySession | None = None) -> FastAPI:
    session = session or GatewaySession()
    app = FastAPI(title="qsnet gateway", version="1.0")
    app.state.session = session
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(QsnetError)
    async def q_error_handler(request: Request, exc: QsnetError):
        return _error_response(exc, STATUS_BY_CODE.get(exc.code, 500))

    @app.get("/v1/session")
    def get_session():
        with session.lock:
            return session.describe()

    @app.post("/v1/session/reset")
    def reset_session(payload: dict = Body(default={})):
        session.reset(seed=int(payload.get("seed", 0)),
                      mode=payload.get("mode"),
                      scale=payload.get("scale"))
        with session.lock:
            return session.describe()

    @app.post("/v1/step")
    def step(payload: dict = Body(default={})):
        with session.lock:
            session.step(float(payload.get("dt_s", 1.0)))
            return session.describe()

    @app.post("/v1/islands")
    def register_island(payload: dict = Body(...)):
        with session.lock:
            if "catalogue" in payload:
                island_id = session.orchestrator.register_island(
                    name=payload.get("name", ""),
                    catalogue=payload["catalogue"],
                    certificate_id=payload.get("certificate_id", ""),
                    proxy_endpoint=payload.get("proxy_endpoint", ""),
                )
            else:
                island_id = session.orchestrator.reconnect_island(
                    payload.get("certificate_id", ""))
            return {"island_id": island_id}

    @app.get("/v1/catalogue")
    def get_catalogue():
        with session.lock:
            return {"islands": session.orchestrator.catalogue()}

    @app.post("/v1/ins")
    def compose(payload: dict = Body(...)):
        with session.lock:
            members = payload.get("members")
            if not members:
                raise InvalidArgumentError("body needs 'members'")
            ins = session.orchestrator.compose_ins(
                members=[tuple(m) for m in members],
                secured=bool(payload.get("secured", False)),
                wavelength_hint_thz=payload.get("wavelength_hint_thz"),
                ttl_s=payload.get("ttl_s"),
            )
            return {"ins_id": ins.ins_id, "lifecycle": ins.lifecycle.value}

    @app.post("/v1/ins/{ins_id}/deploy")
    def deploy(ins_id: str):
        with session.lock:
            session.orchestrator.deploy_ins(ins_id)
            session.after_mutation()
            return session.orchestrator.ins_status(ins_id)

    @app.post("/v1/ins/{ins_id}/reconfigure")
    def reconfigure(ins_id: str, payload: dict = Body(default={})):
        with session.lock:
            change = {k: v for k, v in payload.items()
                      if k in ("secured", "wavelength_hint_thz", "remove")}
            session.orchestrator.reconfigure({ins_id: change})
            session.after_mutation()
            return session.orchestrator.ins_status(ins_id)

    @app.delete("/v1/ins/{ins_id}")
    def terminate(ins_id: str):
        with session.lock:
            session.orchestrator.terminate_ins(ins_id)
            return session.orchestrator.ins_status(ins_id)

    @app.get("/v1/ins/{ins_id}")
    def ins_status(ins_id: str):
        with session.lock:
            return session.orchestrator.ins_status(ins_id)

    @app.get("/v1/ins")
    def list_ins():
        with session.lock:
            return {"services": [session.orchestrator.ins_status(i)
                                 for i in sorted(session.orchestrator.ins)]}

    @app.get("/v1/events")
    def events(since: int = 0, limit: int = 10000):
        with session.lock:
            batch = [e.to_dict() for e in session.kernel.log.since(since)[:limit]]
        next_since = batch[-1]["seq"] if batch else since
        return {"events": batch, "next_since": next_since}

    @app.get("/v1/stream")
    def stream(since: int = 0, wait_s: float = 5.0, limit: int = 10000):
        """Long-poll tail of the event log; contiguous, in order."""
        deadline = time.monotonic() + min(wait_s, 25.0)
        while True:
            with session.lock:
                batch = [e.to_dict() for e in session.kernel.log.since(since)[:limit]]
            if batch or time.monotonic() >= deadline or session.mode != "scaled":
                next_since = batch[-1]["seq"] if batch else since
                return {"events": batch, "next_since": next_since,
                        "run_id": session.run_id}
            time.sleep(0.05)

    @app.get("/v1/topology")
    def topology():
        with session.lock:
            state = session.orchestrator.roadm_state
            return {
                "degrees": state.degrees,
                "grid_thz": list(session.topology.grid_thz),
                "quantum_channel_thz": session.topology.quantum_channel_thz,
                "islands": [
                    {"id": i.id, "name": i.name, "port": i.port, "fibre_km": i.fibre_km}
                    for i in session.topology.islands
                ],
                "quantum_routes": sorted([list(r) for r in state.quantum_routes]),
                "crossconnects": sorted([list(c) for c in state.ofs_crossconnects]),
                "passbands": {
                    port: sorted(
                        [{"center_thz": b.center_thz, "width_ghz": b.width_ghz}
                         for b in bands], key=lambda d: d["center_thz"])
                    for port, bands in sorted(state.wss_passbands.items())
                },
                "drop_assignments": {str(d): sorted(c) for d, c
                                     in sorted(state.drop_assignments.items())},
            }

    @app.get("/v1/scenarios")
    def scenarios():
        return {"scenarios": shipped_scenarios()}

    @app.post("/v1/run/{name}")
    def run_shipped(name: str, payload: dict = Body(default={})):
        if name not in shipped_scenarios():
            raise NotFoundError(f"no shipped scenario {name!r}")
        script = load_script(name)
        seed = int(payload.get("seed", 0))
        with session.lock:
            session.reset(seed=seed)
            session.scenario_name = name
            if session.mode == "scaled":
                _schedule_script_onto(session, script)
                return {"run_id": session.run_id, "mode": "scaled",
                        "horizon_s": script.horizon_s}
            # fast mode: run to the horizon and swap the finished run in
            result = run_scenario(script, seed=seed, topology=session.topology,
                                  table=session.table)
            session.kernel = result.kernel
            session.orchestrator = result.orchestrator
            return {"run_id": session.run_id, "mode": session.mode,
                    "summary": result.summary()}

    return app


def _schedule_script_onto(session: GatewaySession, script) -> None:
    from .scenario import _execute_step

    alias_to_ins: dict = {}
    kernel = session.kernel
    orch = session.orchestrator

    def execute(index, step):
        kernel.emit("runner", "scenario-step", {"index": index, "action": step.action})
        try:
            _execute_step(orch, step, alias_to_ins)
        except QsnetError as e:
            kernel.emit("runner", "scenario-error", {"index": index, "error": str(e)})

    for i, step in enumerate(script.steps):
        kernel.schedule(step.at_s, execute, i, step)


def serve(host: str = "127.0.0.1", port: int = 8080, mode: str = "fast",
          scale: float = 10.0, seed: int = 0,
          topology_path: str | None = None) -> None:
    import uvicorn

    topology = load_topology(topology_path) if topology_path else None
    session = GatewaySession(topology=topology, mode=mode, scale=scale, seed=seed)
    app = create_app(session)
    uvicorn.run(app, host=host, port=port, log_level="warning")
