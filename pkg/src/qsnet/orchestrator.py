"""Control plane: island broker, service lifecycle manager, connectivity
manager and per-island proxies, executing over the simulation kernel.

Everything is event-driven on the kernel's single timeline.  Continuations
carry an (ins, epoch) guard so a failure, reconfiguration or termination
invalidates in-flight work deterministically.  Control-plane resources
(wavelengths, quantum routes) are reserved at plan time; the device events
narrate the physical rollout.
"""

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    InvalidArgumentError,
    InvalidStateError,
    NotFoundError,
    PlanInfeasibleError,
)
from .kernel import LatencyModel, SimKernel, sample_latency
from .keystore import STARVED, EncryptorSession, KeyPool
from .optical import (
    CalibrationTable,
    CoexistenceSpec,
    OpticalChannel,
    QkdLinkState,
    QuantumLink,
    estimate_prefec_ber,
    estimate_skr_qber,
)
from .planner import Assignment, NSRequest, build_config_delta, plan, replan_delta
from .roadm import SignalKind, apply_config, path_loss
from .topology import Topology


class Lifecycle(str, Enum):
    COMPOSED = "COMPOSED"
    PLANNING = "PLANNING"
    OPTICS_CONFIGURING = "OPTICS_CONFIGURING"
    QKD_INITIALIZING = "QKD_INITIALIZING"
    NS_DEPLOYING = "NS_DEPLOYING"
    L2_WIRING = "L2_WIRING"
    AWAITING_KEYS = "AWAITING_KEYS"
    OPERATIONAL = "OPERATIONAL"
    TERMINATED = "TERMINATED"
    FAILED = "FAILED"


#: legal lifecycle edges; anything else is a bug
ALLOWED_TRANSITIONS: frozenset = frozenset({
    (Lifecycle.COMPOSED, Lifecycle.PLANNING),
    (Lifecycle.PLANNING, Lifecycle.OPTICS_CONFIGURING),
    (Lifecycle.PLANNING, Lifecycle.FAILED),
    (Lifecycle.OPTICS_CONFIGURING, Lifecycle.QKD_INITIALIZING),
    (Lifecycle.OPTICS_CONFIGURING, Lifecycle.NS_DEPLOYING),
    (Lifecycle.OPTICS_CONFIGURING, Lifecycle.FAILED),
    (Lifecycle.QKD_INITIALIZING, Lifecycle.NS_DEPLOYING),
    (Lifecycle.QKD_INITIALIZING, Lifecycle.FAILED),
    (Lifecycle.NS_DEPLOYING, Lifecycle.L2_WIRING),
    (Lifecycle.NS_DEPLOYING, Lifecycle.FAILED),
    (Lifecycle.L2_WIRING, Lifecycle.AWAITING_KEYS),
    (Lifecycle.L2_WIRING, Lifecycle.OPERATIONAL),
    (Lifecycle.L2_WIRING, Lifecycle.FAILED),
    (Lifecycle.AWAITING_KEYS, Lifecycle.OPERATIONAL),
    (Lifecycle.AWAITING_KEYS, Lifecycle.FAILED),
    (Lifecycle.OPERATIONAL, Lifecycle.AWAITING_KEYS),
    (Lifecycle.COMPOSED, Lifecycle.TERMINATED),
    (Lifecycle.PLANNING, Lifecycle.TERMINATED),
    (Lifecycle.OPTICS_CONFIGURING, Lifecycle.TERMINATED),
    (Lifecycle.QKD_INITIALIZING, Lifecycle.TERMINATED),
    (Lifecycle.NS_DEPLOYING, Lifecycle.TERMINATED),
    (Lifecycle.L2_WIRING, Lifecycle.TERMINATED),
    (Lifecycle.AWAITING_KEYS, Lifecycle.TERMINATED),
    (Lifecycle.OPERATIONAL, Lifecycle.TERMINATED),
    (Lifecycle.FAILED, Lifecycle.TERMINATED),
})

ACTIVE_STATES = frozenset({
    Lifecycle.PLANNING, Lifecycle.OPTICS_CONFIGURING, Lifecycle.QKD_INITIALIZING,
    Lifecycle.NS_DEPLOYING, Lifecycle.L2_WIRING, Lifecycle.AWAITING_KEYS,
    Lifecycle.OPERATIONAL,
})

#: control message latencies; the QKD kick-off strictly precedes the first
#: proxy dispatch so the published causal order holds at distinct timestamps
QKD_DISPATCH_S = 0.2
PROXY_DISPATCH_S = 0.5


@dataclass
class IslandRegistration:
    island_id: int
    name: str
    catalogue: list
    proxy_endpoint: str
    certificate_id: str

    def find_service(self, ns_id: str) -> dict | None:
        return next((d for d in self.catalogue if d.get("ns_id") == ns_id), None)


@dataclass
class InterIslandNS:
    ins_id: str
    members: tuple  # ((island_id, local_ns_id), (island_id, local_ns_id))
    secured: bool
    request: NSRequest
    lifecycle: Lifecycle = Lifecycle.COMPOSED
    assignment: Assignment | None = None
    vlan: dict = field(default_factory=dict)
    epoch: int = 0
    l2_ready: bool = False
    key_acked: bool = False
    ttl_armed: bool = False
    failure_cause: str | None = None

    @property
    def islands(self) -> tuple[int, int]:
        return (self.members[0][0], self.members[1][0])


@dataclass(frozen=True)
class FaultPlan:
    """Deterministic fault injection for failure-path testing."""

    qkd_links: frozenset = frozenset()      # {(alice, bob)}
    proxy_timeouts: frozenset = frozenset() # {island_id}
    proxy_timeout_s: float = 60.0


class Orchestrator:
    """Broker + lifecycle manager + connectivity manager over one kernel."""

    def __init__(
        self,
        kernel: SimKernel,
        topology: Topology,
        table: CalibrationTable,
        latency: LatencyModel | None = None,
        faults: FaultPlan | None = None,
        rekey_interval_s: float = 60.0,
        telemetry_interval_s: float | None = None,
    ):
        self.kernel = kernel
        self.topology = topology
        self.table = table
        self.latency = latency or LatencyModel()
        self.faults = faults or FaultPlan()
        self.rekey_interval_s = rekey_interval_s
        self.islands: dict[int, IslandRegistration] = {}
        self._credentials: dict[str, int] = {}
        self._next_island_id = 1
        self._next_ins = 1
        self._next_vlan: dict[int, int] = {}
        self.ins: dict[str, InterIslandNS] = {}
        self.roadm_state = topology.initial_roadm_state()
        self.links: dict[tuple[int, int], QuantumLink] = {}
        self.pools: dict[str, KeyPool] = {}
        self.sessions: dict[str, EncryptorSession] = {}
        if telemetry_interval_s:
            self._telemetry_interval = telemetry_interval_s
            kernel.schedule(telemetry_interval_s, self._telemetry_tick)

    # -- island registration -------------------------------------------------

    def register_island(self, name: str, catalogue: list, certificate_id: str,
                        proxy_endpoint: str = "") -> int:
        """Register (or re-register) an island; returns its stable id."""
        if not certificate_id:
            raise InvalidArgumentError("a credential is required to register")
        if not catalogue:
            raise InvalidArgumentError("registration requires a non-empty catalogue")
        for d in catalogue:
            if "ns_id" not in d or "vnf" not in d:
                raise InvalidArgumentError("catalogue entries need ns_id and vnf")
        if certificate_id in self._credentials:
            island_id = self._credentials[certificate_id]
            reg = self.islands[island_id]
            reg.catalogue = list(catalogue)
            reg.name = name or reg.name
            self.kernel.emit("qnsb", "island-registered",
                             {"island_id": island_id, "re_register": True,
                              "n_services": len(catalogue)})
            return island_id
        island_id = self._next_island_id
        try:
            self.topology.island(island_id)
        except Exception:
            raise InvalidArgumentError(
                f"no optical attachment for a {island_id}th island in this topology")
        self._next_island_id += 1
        self.islands[island_id] = IslandRegistration(
            island_id=island_id, name=name, catalogue=list(catalogue),
            proxy_endpoint=proxy_endpoint, certificate_id=certificate_id)
        self._credentials[certificate_id] = island_id
        self.kernel.emit("qnsb", "island-registered",
                         {"island_id": island_id, "re_register": False,
                          "n_services": len(catalogue)})
        return island_id

    def reconnect_island(self, certificate_id: str) -> int:
        """Reconnect without updating the catalogue; id is preserved."""
        if certificate_id not in self._credentials:
            raise NotFoundError("unknown credential; register first")
        island_id = self._credentials[certificate_id]
        self.kernel.emit("qnsb", "island-reconnected", {"island_id": island_id})
        return island_id

    def catalogue(self) -> dict:
        return {
            island_id: {"name": reg.name, "services": list(reg.catalogue)}
            for island_id, reg in sorted(self.islands.items())
        }

    # -- composition -----------------------------------------------------------

    def compose_ins(self, members, secured: bool,
                    wavelength_hint_thz: float | None = None,
                    ttl_s: float | None = None) -> InterIslandNS:
        """Persist an inter-island service template; touches no resources."""
        if len(members) != 2:
            raise InvalidArgumentError("an inter-island service chains exactly two members")
        for island_id, ns_id in members:
            reg = self.islands.get(island_id)
            if reg is None:
                raise NotFoundError(f"island {island_id} is not registered")
            if reg.find_service(ns_id) is None:
                raise NotFoundError(f"island {island_id} has no service {ns_id!r}")
        if members[0][0] == members[1][0]:
            raise InvalidArgumentError("members must live on different islands")
        ins_id = f"ins-{self._next_ins}"
        self._next_ins += 1
        request = NSRequest(
            request_id=ins_id,
            src_island=members[0][0],
            dst_island=members[1][0],
            secured=secured,
            ttl_s=ttl_s,
            start_time_s=self.kernel.now,
            wavelength_hint_thz=wavelength_hint_thz,
        )
        ins = InterIslandNS(ins_id=ins_id, members=tuple(tuple(m) for m in members),
                            secured=secured, request=request)
        self.ins[ins_id] = ins
        self.kernel.emit("nsm", "ins-composed",
                         {"ins_id": ins_id, "members": [list(m) for m in members],
                          "secured": secured})
        return ins

    # -- lifecycle helpers -------------------------------------------------------

    def _transition(self, ins: InterIslandNS, to: Lifecycle) -> None:
        edge = (ins.lifecycle, to)
        assert edge in ALLOWED_TRANSITIONS, f"illegal lifecycle edge {edge}"
        self.kernel.emit("nsm", "lifecycle",
                         {"ins_id": ins.ins_id, "from": ins.lifecycle.value, "to": to.value})
        ins.lifecycle = to
        if to is Lifecycle.OPERATIONAL:
            self.kernel.emit("nsm", "ns-operational", {"ins_id": ins.ins_id})

    def _guard(self, ins: InterIslandNS, epoch: int) -> bool:
        return ins.epoch == epoch and ins.lifecycle in ACTIVE_STATES

    # -- deployment ----------------------------------------------------------------

    def deploy_ins(self, ins_id: str) -> None:
        self.deploy_batch([ins_id])

    def deploy_batch(self, ins_ids: list[str]) -> None:
        """Deploy one or more composed services as a single orchestration pass."""
        batch = []
        for ins_id in ins_ids:
            ins = self.ins.get(ins_id)
            if ins is None:
                raise NotFoundError(f"unknown service {ins_id}")
            if ins.lifecycle is not Lifecycle.COMPOSED:
                raise InvalidStateError(
                    f"{ins_id} is {ins.lifecycle.value}, only COMPOSED deploys")
            batch.append(ins)
        for ins in batch:
            self._transition(ins, Lifecycle.PLANNING)
        requests = [ins.request for ins in batch]
        try:
            assignments = plan(requests, self.topology, self.roadm_state, self.table)
        except PlanInfeasibleError as e:
            for ins in batch:
                ins.failure_cause = e.violations.get(ins.ins_id, "batch infeasible")
                self._transition(ins, Lifecycle.FAILED)
            raise
        delta = build_config_delta(assignments, self.topology)
        self.roadm_state = apply_config(self.roadm_state, delta)
        for ins, assignment in zip(batch, assignments):
            ins.assignment = assignment
            self._transition(ins, Lifecycle.OPTICS_CONFIGURING)
        self._configure_roadm(delta, lambda: self._after_optics(
            [(ins, ins.epoch) for ins in batch], full_deploy=True))

    def _after_optics(self, guarded: list, full_deploy: bool) -> None:
        live = [ins for ins, epoch in guarded if self._guard(ins, epoch)]
        for ins in sorted((i for i in live if i.assignment.secured),
                          key=lambda i: i.ins_id):
            self.kernel.schedule(QKD_DISPATCH_S, self._start_qkd, ins, ins.epoch)
        for ins in sorted(live, key=lambda i: i.ins_id):
            self.kernel.schedule(
                PROXY_DISPATCH_S, self._configure_transceivers,
                ins, ins.epoch, full_deploy, False)

    # -- q-ROADM configuration ------------------------------------------------------

    def _configure_roadm(self, delta, done) -> None:
        """OFS first, then each touched WSS, strictly sequentially."""
        if delta.is_empty():
            done()
            return
        steps = []
        if delta.touches_ofs():
            steps.append(("ofs", None, self.latency.ofs_s))
        for port in delta.touched_wss_ports():
            n = len(delta.add_passbands.get(port, ())) + len(delta.remove_passbands.get(port, ()))
            steps.append(("wss", port, self.latency.wss_s(n)))
        if not steps:
            done()
            return

        def run_step(index: int) -> None:
            kind, port, duration = steps[index]
            source = "ofs" if kind == "ofs" else f"wss:{port}"
            payload = {} if kind == "ofs" else {"port": port}
            self.kernel.emit(source, f"{kind}-config-start", payload)

            def finish():
                self.kernel.emit(source, f"{kind}-config-done", payload)
                if index + 1 < len(steps):
                    run_step(index + 1)
                else:
                    done()

            self.kernel.schedule(duration, finish)

        run_step(0)

    # -- QKD branch ---------------------------------------------------------------

    def _start_qkd(self, ins: InterIslandNS, epoch: int) -> None:
        if not self._guard(ins, epoch):
            return
        a = ins.assignment
        pair = (a.alice_island, a.bob_island)
        spans = self.topology.quantum_path(*pair)
        loss = path_loss(self.roadm_state, spans, SignalKind.QUANTUM,
                         self.topology.loss_table, self.topology.awg)
        link = QuantumLink(
            alice_island=pair[0], bob_island=pair[1],
            path_class=a.quantum_path_class, path_loss_db=loss,
            coexistence=CoexistenceSpec(1, a.modulation, a.launch_power_dbm),
            state=QkdLinkState.INITIALIZING)
        self.links[pair] = link
        if ins.lifecycle in (Lifecycle.OPTICS_CONFIGURING,):
            self._transition(ins, Lifecycle.QKD_INITIALIZING)
        self.kernel.emit(link.link_id, "qkd-start",
                         {"ins_id": ins.ins_id, "alice": pair[0], "bob": pair[1],
                          "path_loss_db": round(loss, 3),
                          "path_class": a.quantum_path_class.value})
        init_s = sample_latency(self.latency, "qkd_init", self.kernel.rng(link.link_id),
                                {"path_loss_db": loss})
        self.kernel.schedule(init_s, self._qkd_init_done, ins, epoch, pair)

    def _qkd_init_done(self, ins: InterIslandNS, epoch: int, pair) -> None:
        if not self._guard(ins, epoch):
            return
        link = self.links.get(pair)
        if link is None or link.state is not QkdLinkState.INITIALIZING:
            return
        if pair in self.faults.qkd_links:
            link.state = QkdLinkState.FAILED
            link.skr_bps = 0.0
            self.kernel.emit(link.link_id, "qkd-fail",
                             {"ins_id": ins.ins_id, "reason": "injected fault"})
            self._fail_ins(ins, "qkd initialisation failed")
            return
        skr, qber = estimate_skr_qber(link, self.table)
        link.skr_bps, link.qber = skr, qber
        link.state = QkdLinkState.KEYS_FLOWING if skr > 0 else QkdLinkState.FAILED
        if link.state is QkdLinkState.FAILED:
            self.kernel.emit(link.link_id, "qkd-fail",
                             {"ins_id": ins.ins_id, "reason": "no key rate at operating point"})
            self._fail_ins(ins, "quantum channel produced no keys")
            return
        pool = KeyPool(link_id=link.link_id, accrual_rate_bps=skr,
                       last_update_s=self.kernel.now, flowing=True)
        self.pools[link.link_id] = pool
        session = EncryptorSession(ins_id=ins.ins_id, pool=pool,
                                   rekey_interval_s=self.rekey_interval_s)
        self.sessions[ins.ins_id] = session
        self._schedule_key_check(ins, epoch, session)

    def _schedule_key_check(self, ins: InterIslandNS, epoch: int,
                            session: EncryptorSession) -> None:
        wait = session.pool.seconds_until(session.key_size_bits)
        if wait is None:
            return
        self.kernel.schedule(max(wait, 1e-6), self._first_key_check, ins, epoch, session)

    def _first_key_check(self, ins: InterIslandNS, epoch: int,
                         session: EncryptorSession) -> None:
        if not self._guard(ins, epoch):
            return
        outcome = session.draw_key(self.kernel.now)
        if outcome == STARVED:
            self._schedule_key_check(ins, epoch, session)
            return
        self.kernel.emit("keystore", "key-delivered",
                         {"ins_id": ins.ins_id, "link": session.pool.link_id,
                          "key_id": outcome.key_id, "pool_bits": session.pool.bits_available})
        self.kernel.emit(session.pool.link_id, "qkd-ack",
                         {"ins_id": ins.ins_id, "link": session.pool.link_id})
        ins.key_acked = True
        self._maybe_operational(ins)
        self.kernel.schedule(session.rekey_interval_s, self._rekey, ins, epoch, session)

    def _rekey(self, ins: InterIslandNS, epoch: int, session: EncryptorSession) -> None:
        if not self._guard(ins, epoch) or not session.pool.flowing:
            return
        outcome = session.draw_key(self.kernel.now)
        if outcome == STARVED:
            self.kernel.emit("keystore", "key-starved",
                             {"ins_id": ins.ins_id, "pool_bits": session.pool.bits_available})
        else:
            self.kernel.emit("keystore", "key-delivered",
                             {"ins_id": ins.ins_id, "link": session.pool.link_id,
                              "key_id": outcome.key_id,
                              "pool_bits": session.pool.bits_available})
        self.kernel.schedule(session.rekey_interval_s, self._rekey, ins, epoch, session)

    # -- classical branch ------------------------------------------------------------

    def _configure_transceivers(self, ins: InterIslandNS, epoch: int,
                                full_deploy: bool, modulation_change: bool) -> None:
        if not self._guard(ins, epoch):
            return
        a = ins.assignment
        pending = set(sorted(ins.islands))
        for island_id in sorted(ins.islands):
            source = f"transceiver:island{island_id}"
            payload = {
                "ins_id": ins.ins_id, "island": island_id,
                "wavelengths_thz": list(a.wavelength_pair),
                "modulation": a.modulation.value,
                "launch_power_dbm": a.launch_power_dbm,
                "modulation_change": modulation_change,
            }
            self.kernel.emit(source, "transceiver-config-start", payload)
            duration = sample_latency(self.latency, "transceiver", self.kernel.rng(source),
                                      {"modulation_change": modulation_change})

            def finish(island_id=island_id, source=source, payload=payload):
                if not self._guard(ins, epoch):
                    return
                self.kernel.emit(source, "transceiver-config-done", payload)
                pending.discard(island_id)
                if not pending:
                    if full_deploy:
                        self._deploy_services(ins, epoch)
                    # a reconfiguration ends here: the datapath survives

            self.kernel.schedule(duration, finish)

    def _deploy_services(self, ins: InterIslandNS, epoch: int) -> None:
        if not self._guard(ins, epoch):
            return
        if ins.lifecycle in (Lifecycle.OPTICS_CONFIGURING, Lifecycle.QKD_INITIALIZING):
            self._transition(ins, Lifecycle.NS_DEPLOYING)
        pending = set(sorted(ins.islands))
        for (island_id, ns_id) in ins.members:
            source = f"proxy:island{island_id}"
            payload = {"ins_id": ins.ins_id, "island": island_id, "ns_id": ns_id}
            self.kernel.emit(source, "vnf-deploy-start", payload)
            if island_id in self.faults.proxy_timeouts:
                self.kernel.schedule(self.faults.proxy_timeout_s,
                                     self._proxy_timeout, ins, epoch, island_id)
                continue
            duration = sample_latency(self.latency, "ns_deploy", self.kernel.rng(source))

            def finish(island_id=island_id, source=source, payload=payload):
                if not self._guard(ins, epoch):
                    return
                self.kernel.emit(source, "vnf-deploy-done", payload)
                pending.discard(island_id)
                if not pending:
                    self._install_l2(ins, epoch)

            self.kernel.schedule(duration, finish)

    def _proxy_timeout(self, ins: InterIslandNS, epoch: int, island_id: int) -> None:
        if not self._guard(ins, epoch):
            return
        self.kernel.emit(f"proxy:island{island_id}", "vnf-deploy-timeout",
                         {"ins_id": ins.ins_id, "island": island_id})
        self._fail_ins(ins, f"island {island_id} proxy timed out")

    def _install_l2(self, ins: InterIslandNS, epoch: int) -> None:
        if not self._guard(ins, epoch):
            return
        self._transition(ins, Lifecycle.L2_WIRING)
        pending = set(sorted(ins.islands))
        for island_id in sorted(ins.islands):
            vlan = self._next_vlan.get(island_id, 100)
            self._next_vlan[island_id] = vlan + 1
            ins.vlan[island_id] = vlan
            source = f"proxy:island{island_id}"
            payload = {"ins_id": ins.ins_id, "island": island_id, "vlan": vlan}
            self.kernel.emit(source, "l2-flow-start", payload)
            duration = sample_latency(self.latency, "l2_flow", self.kernel.rng(source))

            def finish(island_id=island_id, source=source, payload=payload):
                if not self._guard(ins, epoch):
                    return
                self.kernel.emit(source, "l2-flow-done", payload)
                pending.discard(island_id)
                if not pending:
                    ins.l2_ready = True
                    if ins.secured and not ins.key_acked:
                        self._transition(ins, Lifecycle.AWAITING_KEYS)
                    else:
                        self._maybe_operational(ins)

            self.kernel.schedule(duration, finish)

    def _maybe_operational(self, ins: InterIslandNS) -> None:
        if ins.lifecycle is Lifecycle.OPERATIONAL:
            return
        if ins.l2_ready and (not ins.secured or ins.key_acked):
            self._transition(ins, Lifecycle.OPERATIONAL)
            if ins.request.ttl_s and not ins.ttl_armed:
                ins.ttl_armed = True
                self.kernel.schedule(ins.request.ttl_s, self._ttl_expired, ins)

    def _ttl_expired(self, ins: InterIslandNS) -> None:
        # a TTL outlives reconfigurations, so no epoch guard here
        if ins.lifecycle is Lifecycle.TERMINATED:
            return
        self.kernel.emit("nsm", "ttl-expired", {"ins_id": ins.ins_id})
        self.terminate_ins(ins.ins_id)

    # -- reconfiguration ---------------------------------------------------------------

    def reconfigure(self, changes: dict) -> None:
        """Apply a roster change atomically.

        ``changes`` maps ins ids to {"secured": bool, "wavelength_hint_thz":
        float, "remove": bool}.  Composed-but-undeployed services named here
        join the roster (full deploy); deployed services are re-planned with
        minimal change.  Infeasibility leaves everything untouched.
        """
        deployed = [i for i in self.ins.values()
                    if i.assignment is not None and i.lifecycle in ACTIVE_STATES]
        joining = []
        for ins_id, change in changes.items():
            ins = self.ins.get(ins_id)
            if ins is None:
                raise NotFoundError(f"unknown service {ins_id}")
            if ins.lifecycle is Lifecycle.COMPOSED:
                joining.append(ins)
            elif ins not in deployed:
                raise InvalidStateError(f"{ins_id} is {ins.lifecycle.value}")
            elif ins.lifecycle is not Lifecycle.OPERATIONAL:
                raise InvalidStateError(
                    f"{ins_id} is being reconfigured or deployed ({ins.lifecycle.value})")
        roster = []
        for ins in deployed + joining:
            change = changes.get(ins.ins_id, {})
            if change.get("remove"):
                continue
            req = ins.request
            roster.append(NSRequest(
                request_id=req.request_id,
                src_island=req.src_island,
                dst_island=req.dst_island,
                secured=change.get("secured", req.secured),
                bandwidth_class=req.bandwidth_class,
                ttl_s=req.ttl_s,
                start_time_s=req.start_time_s,
                wavelength_hint_thz=change.get("wavelength_hint_thz",
                                               req.wavelength_hint_thz),
            ))
        old_assignments = [ins.assignment for ins in deployed]
        old_modulation = {a.request_id: a.modulation for a in old_assignments}
        result = replan_delta(old_assignments, roster, self.topology, self.table)
        # feasible: commit control-plane state, then roll the devices
        self.roadm_state = apply_config(self.roadm_state, result.delta)
        by_id = {a.request_id: a for a in result.assignments}
        changed = set(result.touched) | set(result.added)
        for ins in deployed + joining:
            if ins.ins_id in result.removed:
                continue
            a = by_id[ins.ins_id]
            was_secured = ins.secured
            ins.request = a.request
            ins.secured = a.secured
            ins.assignment = a
            if was_secured != a.secured or ins.ins_id in changed:
                ins.epoch += 1
            if was_secured and not a.secured:
                self.sessions.pop(ins.ins_id, None)
                ins.key_acked = False
        self.kernel.emit("qidcm", "reconfigure-accepted",
                         {"touched": sorted(result.touched),
                          "added": sorted(result.added),
                          "removed": sorted(result.removed),
                          "quantum_started": [list(p) for p in result.quantum_started],
                          "quantum_released": [list(p) for p in result.quantum_released]})
        for pair in result.quantum_released:
            self._release_link(pair)
        for ins_id in sorted(result.removed):
            self.terminate_ins(ins_id)
        deployed_ids = {x.ins_id for x in deployed}
        for ins_id in sorted(by_id):
            ins = self.ins[ins_id]
            if (ins_id in deployed_ids and ins_id not in result.removed
                    and ins.secured and not ins.key_acked
                    and ins.lifecycle is Lifecycle.OPERATIONAL):
                self._transition(ins, Lifecycle.AWAITING_KEYS)
        for ins_id in sorted(result.added):
            ins = self.ins[ins_id]
            self._transition(ins, Lifecycle.PLANNING)
            self._transition(ins, Lifecycle.OPTICS_CONFIGURING)
        guarded_touched = [(self.ins[i], self.ins[i].epoch) for i in sorted(result.touched)]
        guarded_added = [(self.ins[i], self.ins[i].epoch) for i in sorted(result.added)]
        mod_changes = {
            rid: old_modulation[rid] != by_id[rid].modulation
            for rid in result.touched
        }
        restarted = [
            (self.ins[i], self.ins[i].epoch) for i in sorted(deployed_ids - result.removed)
            if self.ins[i].secured and i not in result.added
            and (by_id[i].alice_island, by_id[i].bob_island) in result.quantum_started
        ]

        def rollout():
            for ins, epoch in restarted:
                self.kernel.schedule(QKD_DISPATCH_S, self._start_qkd, ins, epoch)
            for ins, epoch in guarded_touched:
                self.kernel.schedule(PROXY_DISPATCH_S, self._configure_transceivers,
                                     ins, epoch, False, mod_changes.get(ins.ins_id, False))
            self._after_optics(guarded_added, full_deploy=True)

        self._configure_roadm(result.delta, rollout)

    def _release_link(self, pair) -> None:
        link = self.links.get(pair)
        if link is None:
            return
        pool = self.pools.get(link.link_id)
        if pool is not None:
            pool.accrue(self.kernel.now)
            pool.flowing = False
        link.state = QkdLinkState.IDLE
        link.skr_bps = 0.0
        self.kernel.emit(link.link_id, "qkd-released",
                         {"alice": pair[0], "bob": pair[1]})
        self.links.pop(pair, None)

    # -- termination -------------------------------------------------------------------

    def terminate_ins(self, ins_id: str) -> None:
        """Release everything a service holds; idempotent."""
        ins = self.ins.get(ins_id)
        if ins is None:
            raise NotFoundError(f"unknown service {ins_id}")
        if ins.lifecycle is Lifecycle.TERMINATED:
            return
        deployed = ins.assignment is not None and ins.lifecycle in ACTIVE_STATES
        ins.epoch += 1
        if deployed:
            a = ins.assignment
            if a.secured:
                self._release_link((a.alice_island, a.bob_island))
                self.sessions.pop(ins.ins_id, None)
            delta = build_config_delta([a], self.topology).inverse()
            try:
                self.roadm_state = apply_config(self.roadm_state, delta)
            except Exception:
                pass  # resources already released by a wider reconfiguration
            for island_id in sorted(ins.islands):
                if ins.vlan.get(island_id) is not None:
                    self.kernel.emit(f"proxy:island{island_id}", "l2-flow-remove",
                                     {"ins_id": ins.ins_id, "island": island_id,
                                      "vlan": ins.vlan[island_id]})
                self.kernel.emit(f"proxy:island{island_id}", "vnf-release",
                                 {"ins_id": ins.ins_id, "island": island_id})
            ins.assignment = None
        self._transition(ins, Lifecycle.TERMINATED)

    # -- failure handling ----------------------------------------------------------------

    def _fail_ins(self, ins: InterIslandNS, cause: str) -> None:
        """Fail one service, cancel its sibling branch and roll back its optics."""
        ins.epoch += 1
        ins.failure_cause = cause
        a = ins.assignment
        if a is not None:
            if a.secured:
                self._release_link((a.alice_island, a.bob_island))
                self.sessions.pop(ins.ins_id, None)
            delta = build_config_delta([a], self.topology).inverse()
            try:
                self.roadm_state = apply_config(self.roadm_state, delta)
                self.kernel.emit("qidcm", "rollback", {"ins_id": ins.ins_id})
            except Exception:
                pass
            ins.assignment = None
        self._transition(ins, Lifecycle.FAILED)

    # -- telemetry ----------------------------------------------------------------------

    def _telemetry_tick(self) -> None:
        for ins_id in sorted(self.ins):
            ins = self.ins[ins_id]
            if ins.lifecycle not in (Lifecycle.OPERATIONAL, Lifecycle.AWAITING_KEYS):
                continue
            self.kernel.emit("nsm", "telemetry-sample", self.telemetry(ins_id))
        self.kernel.schedule(self._telemetry_interval, self._telemetry_tick)

    def telemetry(self, ins_id: str) -> dict:
        ins = self.ins[ins_id]
        a = ins.assignment
        sample: dict = {"ins_id": ins_id, "lifecycle": ins.lifecycle.value}
        if a is None:
            return sample
        channel = OpticalChannel(frequency_thz=a.wavelength_pair[0],
                                 modulation=a.modulation,
                                 launch_power_dbm=a.launch_power_dbm)
        sample.update({
            "wavelengths_thz": list(a.wavelength_pair),
            "modulation": a.modulation.value,
            "launch_power_dbm": a.launch_power_dbm,
            "ber": estimate_prefec_ber(channel, a.data_path_class, a.launch_power_dbm),
        })
        if a.secured:
            link = self.links.get((a.alice_island, a.bob_island))
            session = self.sessions.get(ins_id)
            if link is not None:
                pool = self.pools.get(link.link_id)
                if pool is not None and pool.flowing:
                    pool.accrue(self.kernel.now)
                sample.update({
                    "skr_bps": link.skr_bps, "qber": link.qber,
                    "link_state": link.state.value,
                    "pool_bits": pool.bits_available if pool else 0,
                })
            if session is not None:
                sample["session_state"] = session.state
        return sample

    def ins_status(self, ins_id: str) -> dict:
        ins = self.ins.get(ins_id)
        if ins is None:
            raise NotFoundError(f"unknown service {ins_id}")
        status = {
            "ins_id": ins_id,
            "members": [list(m) for m in ins.members],
            "secured": ins.secured,
            "lifecycle": ins.lifecycle.value,
            "vlan": {str(k): v for k, v in sorted(ins.vlan.items())},
            "failure_cause": ins.failure_cause,
            "assignment": ins.assignment.to_dict() if ins.assignment else None,
        }
        status["telemetry"] = self.telemetry(ins_id)
        return status
