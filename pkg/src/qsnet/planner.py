"""Quantum-aware routing, wavelength assignment and modulation selection.

Stateless: ``plan`` maps a request list plus the current node state onto
assignments (or raises ``PlanInfeasibleError`` carrying the first violated
constraint per request, refusing partial results).  First-fit in ascending
frequency with requests processed in (island pair, request id) order keeps
the output deterministic; optimality is explicitly not a goal.

Scenario files may pin a service's wavelength (the testbed's published
wavelength layout is not first-fit); the planner honours such hints and
validates them like any other choice.
"""

from dataclasses import dataclass, replace

from .errors import PlanInfeasibleError, UnknownPortError
from .optical import (
    BerModel,
    CalibrationTable,
    CoexistenceSpec,
    DEFAULT_BER_MODEL,
    Modulation,
    OpticalChannel,
    PathClass,
    coexistence_window,
    estimate_prefec_ber,
    estimate_skr_qber_at,
)
from .roadm import ConfigDelta, Passband, QRoadmState, passband_for
from .topology import Topology

#: densest first; the selector walks down until one fits
MODULATIONS_DENSEST_FIRST = (Modulation.PM_16QAM, Modulation.PM_8QAM, Modulation.PM_QPSK)


@dataclass(frozen=True)
class NSRequest:
    request_id: str
    src_island: int
    dst_island: int
    secured: bool = False
    bandwidth_class: str = "standard"
    ttl_s: float | None = None
    start_time_s: float = 0.0
    #: nominal wavelength pinned by a scenario file (THz); None = first fit
    wavelength_hint_thz: float | None = None

    def __post_init__(self):
        if self.src_island == self.dst_island:
            raise UnknownPortError(f"request {self.request_id}: src and dst must differ")

    @property
    def island_pair(self) -> tuple[int, int]:
        return (min(self.src_island, self.dst_island), max(self.src_island, self.dst_island))


@dataclass(frozen=True)
class Predicted:
    skr_bps: float
    qber: float
    ber: float


@dataclass(frozen=True)
class Assignment:
    request: NSRequest
    #: (src->dst, dst->src) carrier frequencies, THz
    wavelength_pair: tuple[float, float]
    modulation: Modulation
    launch_power_dbm: float
    data_path_class: PathClass
    #: Alice/Bob ends and path class of the protecting quantum channel
    alice_island: int | None = None
    bob_island: int | None = None
    quantum_path_class: PathClass | None = None
    predicted: Predicted = Predicted(0.0, 0.0, 0.0)

    @property
    def request_id(self) -> str:
        return self.request.request_id

    @property
    def secured(self) -> bool:
        return self.request.secured

    def optics_signature(self) -> tuple:
        """What the island transceivers are configured with."""
        return (self.wavelength_pair, self.modulation, self.launch_power_dbm)

    def to_dict(self) -> dict:
        return {
            "request_id": self.request_id,
            "src_island": self.request.src_island,
            "dst_island": self.request.dst_island,
            "secured": self.secured,
            "wavelength_pair_thz": list(self.wavelength_pair),
            "modulation": self.modulation.value,
            "launch_power_dbm": self.launch_power_dbm,
            "data_path_class": self.data_path_class.value,
            "alice_island": self.alice_island,
            "bob_island": self.bob_island,
            "quantum_path_class": self.quantum_path_class.value if self.quantum_path_class else None,
            "predicted": {
                "skr_bps": self.predicted.skr_bps,
                "qber": self.predicted.qber,
                "ber": self.predicted.ber,
            },
        }


def select_modulation(
    power_budget: tuple[float, float],
    coexists_with_quantum: bool,
    table: CalibrationTable,
    *,
    path_class: PathClass,
    n_channels: int = 1,
    ber_model: BerModel = DEFAULT_BER_MODEL,
    fec_overhead_pct: float = 25.0,
    unsecured_power_dbm: float = -15.0,
) -> tuple[Modulation, float] | None:
    """Densest modulation satisfiable inside ``power_budget``, with its launch power.

    Coexisting channels operate inside their coexistence window, at the
    calibration anchor nearest the window centre (operating at a measured
    point keeps the estimator exact there).  Channels free of quantum
    coexistence only need their pre-FEC BER under the FEC threshold.
    """
    lo, hi = power_budget
    if lo > hi:
        return None
    for modulation in MODULATIONS_DENSEST_FIRST:
        if coexists_with_quantum:
            window = coexistence_window(modulation, n_channels, path_class, table,
                                        ber_model, fec_overhead_pct)
            if window is None:
                continue
            wlo, whi = max(window[0], lo), min(window[1], hi)
            if wlo > whi:
                continue
            centre = (wlo + whi) / 2.0
            series = table.find(path_class, n_channels, modulation)
            anchors = [p.power_dbm for p in series.points if wlo <= p.power_dbm <= whi]
            if anchors:
                power = min(anchors, key=lambda a: (abs(a - centre), a))
            else:
                power = centre
            return (modulation, power)
        power = min(max(unsecured_power_dbm, lo), hi)
        channel = OpticalChannel(frequency_thz=195.0, modulation=modulation,
                                 fec_overhead_pct=fec_overhead_pct, launch_power_dbm=power)
        ber = estimate_prefec_ber(channel, path_class, power, ber_model)
        if ber < ber_model.fec_threshold(fec_overhead_pct):
            return (modulation, power)
    return None


class _Occupancy:
    """Mutable wavelength/quantum bookkeeping while a plan is being built."""

    def __init__(self, topology: Topology, state: QRoadmState):
        self.topology = topology
        self.port_freqs: dict[str, set[float]] = {}
        for port, bands in state.wss_passbands.items():
            self.port_freqs[port] = {b.center_thz for b in bands}
        self.quantum_out_ports = {o for _, o in state.quantum_routes}
        self.quantum_in_ports = {i for i, _ in state.quantum_routes}

    def freq_free(self, port: str, freq: float) -> bool:
        return freq not in self.port_freqs.get(port, set())

    def claim_freq(self, port: str, freq: float) -> None:
        self.port_freqs.setdefault(port, set()).add(freq)

    def claim_quantum(self, in_port: str, out_port: str) -> None:
        self.quantum_in_ports.add(in_port)
        self.quantum_out_ports.add(out_port)


def _pick_wavelengths(
    req: NSRequest, topology: Topology, occ: _Occupancy,
    preferred: tuple[float, ...] = (),
) -> tuple[float, float] | str:
    """First free wavelength(s) for a request, or a violation string.

    ``preferred`` frequencies (a service's previous wavelength during a
    replan) are tried before the rest of the grid; an explicit hint pins the
    choice outright.
    """
    src = topology.island(req.src_island)
    dst = topology.island(req.dst_island)
    candidates = tuple(f for f in preferred if f in topology.grid_thz) \
        + tuple(f for f in topology.grid_thz if f not in preferred)
    if req.wavelength_hint_thz is not None:
        if req.wavelength_hint_thz not in topology.grid_thz:
            return f"hinted wavelength {req.wavelength_hint_thz} THz not on the grid"
        candidates = (req.wavelength_hint_thz,)
    if topology.single_wavelength_per_ns:
        for freq in candidates:
            if occ.freq_free(dst.egress_port, freq) and occ.freq_free(src.egress_port, freq):
                occ.claim_freq(dst.egress_port, freq)
                occ.claim_freq(src.egress_port, freq)
                return (freq, freq)
        return (f"no wavelength free on both {src.egress_port} and {dst.egress_port}"
                f" (grid of {len(topology.grid_thz)})")
    fwd = next((f for f in candidates if occ.freq_free(dst.egress_port, f)), None)
    if fwd is None:
        return f"no wavelength free toward {dst.egress_port}"
    occ.claim_freq(dst.egress_port, fwd)
    rev = next((f for f in candidates if occ.freq_free(src.egress_port, f)), None)
    if rev is None:
        return f"no wavelength free toward {src.egress_port}"
    occ.claim_freq(src.egress_port, rev)
    return (fwd, rev)


def _plan_one(
    req: NSRequest,
    topology: Topology,
    occ: _Occupancy,
    table: CalibrationTable,
    ber_model: BerModel,
    preferred: tuple[float, ...] = (),
) -> Assignment | str:
    try:
        topology.island(req.src_island), topology.island(req.dst_island)
    except UnknownPortError as e:
        return str(e)
    wavelengths = _pick_wavelengths(req, topology, occ, preferred)
    if isinstance(wavelengths, str):
        return wavelengths
    data_class = topology.quantum_path_class(req.src_island, req.dst_island)
    alice = bob = None
    q_class = None
    if req.secured:
        alice, bob = req.island_pair
        in_port = topology.island(alice).ingress_port
        out_port = topology.island(bob).egress_port
        if out_port in occ.quantum_out_ports:
            return f"quantum collision: a quantum channel already reaches {out_port}"
        if in_port in occ.quantum_in_ports:
            return f"quantum collision: {in_port} already feeds a quantum channel"
        occ.claim_quantum(in_port, out_port)
        q_class = topology.quantum_path_class(alice, bob)
    budget_lo = -35.0
    budget_hi = topology.secured_power_cap_dbm if req.secured else 5.0
    picked = select_modulation(
        (budget_lo, budget_hi), req.secured, table,
        path_class=q_class if req.secured else data_class,
        ber_model=ber_model,
        unsecured_power_dbm=topology.unsecured_launch_power_dbm,
    )
    if picked is None:
        return "no modulation satisfies the power budget"
    modulation, power = picked
    channel = OpticalChannel(frequency_thz=wavelengths[0], modulation=modulation,
                             launch_power_dbm=power)
    ber = estimate_prefec_ber(channel, data_class, power, ber_model)
    if ber >= ber_model.fec_threshold(channel.fec_overhead_pct):
        return f"predicted pre-FEC BER {ber:.2e} breaches the FEC threshold"
    skr = qber = 0.0
    if req.secured:
        skr, qber = estimate_skr_qber_at(table, q_class, 1, modulation, power)
        if skr <= 0.0:
            return "predicted secret key rate is zero at the chosen operating point"
    return Assignment(
        request=req,
        wavelength_pair=wavelengths,
        modulation=modulation,
        launch_power_dbm=power,
        data_path_class=data_class,
        alice_island=alice,
        bob_island=bob,
        quantum_path_class=q_class,
        predicted=Predicted(skr_bps=skr, qber=qber, ber=ber),
    )


def plan(
    requests: list[NSRequest],
    topology: Topology,
    state: QRoadmState,
    table: CalibrationTable,
    ber_model: BerModel = DEFAULT_BER_MODEL,
) -> list[Assignment]:
    """Assign wavelengths, modulation and powers to every request, or raise.

    All-or-nothing: any violation refuses the whole plan so scenario
    transitions stay atomic.
    """
    occ = _Occupancy(topology, state)
    order = sorted(requests, key=lambda r: (r.island_pair, r.request_id))
    results: dict[str, Assignment] = {}
    violations: dict[str, str] = {}
    for req in order:
        if req.request_id in results or req.request_id in violations:
            violations.setdefault(req.request_id, "duplicate request id")
            continue
        outcome = _plan_one(req, topology, occ, table, ber_model)
        if isinstance(outcome, str):
            violations[req.request_id] = outcome
        else:
            results[req.request_id] = outcome
    if violations:
        raise PlanInfeasibleError(violations)
    return [results[r.request_id] for r in requests]


def build_config_delta(
    assignments: list[Assignment], topology: Topology,
) -> ConfigDelta:
    """Node configuration additions realising the given assignments."""
    add_passbands: dict[str, list[Passband]] = {}
    add_drops: dict[int, list[float]] = {}
    add_quantum = []
    for a in assignments:
        src = topology.island(a.request.src_island)
        dst = topology.island(a.request.dst_island)
        fwd, rev = a.wavelength_pair
        add_passbands.setdefault(dst.egress_port, []).append(passband_for(fwd))
        add_passbands.setdefault(src.egress_port, []).append(passband_for(rev))
        if dst.is_local:
            add_drops.setdefault(dst.degree, []).append(fwd)
        if src.is_local:
            add_drops.setdefault(src.degree, []).append(rev)
        if a.secured:
            add_quantum.append((topology.island(a.alice_island).ingress_port,
                                topology.island(a.bob_island).egress_port))
    return ConfigDelta(
        add_passbands={p: tuple(b) for p, b in add_passbands.items()},
        add_drops={d: tuple(f) for d, f in add_drops.items()},
        add_quantum_routes=tuple(add_quantum),
    )


def _teardown_delta(assignments: list[Assignment], topology: Topology) -> ConfigDelta:
    return build_config_delta(assignments, topology).inverse()


def _merge_deltas(a: ConfigDelta, b: ConfigDelta) -> ConfigDelta:
    def merge_dicts(x: dict, y: dict) -> dict:
        out = {k: tuple(v) for k, v in x.items()}
        for k, v in y.items():
            out[k] = tuple(out.get(k, ())) + tuple(v)
        return out

    return ConfigDelta(
        add_crossconnects=a.add_crossconnects + b.add_crossconnects,
        remove_crossconnects=a.remove_crossconnects + b.remove_crossconnects,
        add_quantum_routes=a.add_quantum_routes + b.add_quantum_routes,
        remove_quantum_routes=a.remove_quantum_routes + b.remove_quantum_routes,
        add_passbands=merge_dicts(a.add_passbands, b.add_passbands),
        remove_passbands=merge_dicts(a.remove_passbands, b.remove_passbands),
        add_drops=merge_dicts(a.add_drops, b.add_drops),
        remove_drops=merge_dicts(a.remove_drops, b.remove_drops),
    )


@dataclass(frozen=True)
class ReplanResult:
    delta: ConfigDelta
    assignments: list[Assignment]
    #: ids needing a transceiver reconfiguration
    touched: frozenset
    #: ids entering service for the first time (full deploy)
    added: frozenset
    #: ids leaving service
    removed: frozenset
    #: (alice, bob) pairs whose quantum channel must (re)initialise
    quantum_started: tuple
    quantum_released: tuple


def _simplify(delta: ConfigDelta) -> ConfigDelta:
    """Cancel remove/add pairs that would reinstate the identical item."""
    def cancel_dicts(removes: dict, adds: dict) -> tuple[dict, dict]:
        out_r, out_a = {}, {}
        for key in set(removes) | set(adds):
            r = list(removes.get(key, ()))
            a = list(adds.get(key, ()))
            for item in list(r):
                if item in a:
                    r.remove(item)
                    a.remove(item)
            if r:
                out_r[key] = tuple(r)
            if a:
                out_a[key] = tuple(a)
        return out_r, out_a

    def cancel_tuples(removes: tuple, adds: tuple) -> tuple[tuple, tuple]:
        r, a = list(removes), list(adds)
        for item in list(r):
            if item in a:
                r.remove(item)
                a.remove(item)
        return tuple(r), tuple(a)

    rem_x, add_x = cancel_tuples(delta.remove_crossconnects, delta.add_crossconnects)
    rem_q, add_q = cancel_tuples(delta.remove_quantum_routes, delta.add_quantum_routes)
    rem_p, add_p = cancel_dicts(delta.remove_passbands, delta.add_passbands)
    rem_d, add_d = cancel_dicts(delta.remove_drops, delta.add_drops)
    return ConfigDelta(
        add_crossconnects=add_x, remove_crossconnects=rem_x,
        add_quantum_routes=add_q, remove_quantum_routes=rem_q,
        add_passbands=add_p, remove_passbands=rem_p,
        add_drops=add_d, remove_drops=rem_d,
    )


def _release_security(a: Assignment, req: NSRequest) -> Assignment:
    return replace(a, request=req, alice_island=None, bob_island=None,
                   quantum_path_class=None,
                   predicted=Predicted(0.0, 0.0, a.predicted.ber))


def replan_delta(
    old: list[Assignment],
    new_requests: list[NSRequest],
    topology: Topology,
    table: CalibrationTable,
    ber_model: BerModel = DEFAULT_BER_MODEL,
) -> ReplanResult:
    """Minimal-change plan moving the network from ``old`` to the new roster.

    Services whose endpoints are unchanged keep their deployment; only
    wavelengths, modulation, power and quantum routes may move, and a
    service keeps its optics verbatim unless a new constraint (security,
    pinned wavelength) forces a change.  Dropping the security flag releases
    the quantum route but does not touch the service's optics: upgrading its
    modulation back would burn a transceiver reconfiguration the roster
    change never asked for.
    """
    old_by_id = {a.request_id: a for a in old}
    new_by_id = {r.request_id: r for r in new_requests}
    removed = frozenset(old_by_id) - frozenset(new_by_id)
    # endpoint changes are a redeploy: same id, but nothing survives
    for rid in set(old_by_id) & set(new_by_id):
        if old_by_id[rid].request.island_pair != new_by_id[rid].island_pair:
            removed |= {rid}
    kept_ids = [a.request_id for a in old
                if a.request_id in new_by_id and a.request_id not in removed]

    kept: dict[str, Assignment] = {}
    replan_fresh: list[str] = []
    for rid in kept_ids:
        a, r = old_by_id[rid], new_by_id[rid]
        hint_moved = (r.wavelength_hint_thz is not None
                      and r.wavelength_hint_thz not in a.wavelength_pair)
        if hint_moved or (r.secured and not a.secured):
            replan_fresh.append(rid)
        elif a.secured and not r.secured:
            kept[rid] = _release_security(a, r)
        else:
            kept[rid] = replace(a, request=r)
    added = frozenset(rid for rid in new_by_id if rid not in old_by_id or rid in removed)

    occ_state = QRoadmState(degrees=topology.degrees,
                            quantum_channel_thz=topology.quantum_channel_thz)
    occ = _Occupancy(topology, occ_state)
    for a in kept.values():
        src, dst = topology.island(a.request.src_island), topology.island(a.request.dst_island)
        occ.claim_freq(dst.egress_port, a.wavelength_pair[0])
        occ.claim_freq(src.egress_port, a.wavelength_pair[1])
        if a.secured:
            occ.claim_quantum(topology.island(a.alice_island).ingress_port,
                              topology.island(a.bob_island).egress_port)

    violations: dict[str, str] = {}
    fresh: dict[str, Assignment] = {}
    todo = sorted((new_by_id[rid] for rid in list(replan_fresh) + sorted(added)),
                  key=lambda r: (r.island_pair, r.request_id))
    for req in todo:
        old_pair = old_by_id[req.request_id].wavelength_pair \
            if req.request_id in replan_fresh else ()
        outcome = _plan_one(req, topology, occ, table, ber_model, preferred=tuple(old_pair))
        if isinstance(outcome, str):
            violations[req.request_id] = outcome
        else:
            fresh[req.request_id] = outcome
    if violations:
        raise PlanInfeasibleError(violations)

    new_assignments: list[Assignment] = []
    for a in old:
        rid = a.request_id
        if rid in kept:
            new_assignments.append(kept[rid])
        elif rid in fresh and rid not in added:
            new_assignments.append(fresh[rid])
    for r in new_requests:
        if r.request_id in added:
            new_assignments.append(fresh[r.request_id])

    new_ids = {a.request_id for a in new_assignments}
    touched = frozenset(
        rid for rid in (set(old_by_id) & new_ids) - added
        if old_by_id[rid].optics_signature()
        != next(a for a in new_assignments if a.request_id == rid).optics_signature()
    )

    gone = [old_by_id[rid] for rid in sorted(removed)] + \
        [old_by_id[rid] for rid in sorted(replan_fresh)]
    born = [a for a in new_assignments
            if a.request_id in added or a.request_id in replan_fresh]
    delta = _merge_deltas(_teardown_delta(gone, topology),
                          build_config_delta(born, topology))
    # quantum routes surrendered by services that merely dropped the flag
    released_routes = []
    for rid, a in kept.items():
        old_a = old_by_id[rid]
        if old_a.secured and not a.secured:
            released_routes.append((topology.island(old_a.alice_island).ingress_port,
                                    topology.island(old_a.bob_island).egress_port))
    if released_routes:
        delta = _merge_deltas(delta, ConfigDelta(remove_quantum_routes=tuple(released_routes)))
    delta = _simplify(delta)

    old_quantum = {(a.alice_island, a.bob_island) for a in old if a.secured}
    new_quantum = {(a.alice_island, a.bob_island) for a in new_assignments if a.secured}
    return ReplanResult(
        delta=delta,
        assignments=new_assignments,
        touched=touched,
        added=added,
        removed=removed,
        quantum_started=tuple(sorted(new_quantum - old_quantum)),
        quantum_released=tuple(sorted(old_quantum - new_quantum)),
    )
