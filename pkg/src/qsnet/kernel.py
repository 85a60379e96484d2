"""Deterministic discrete-event kernel and device latency models.

One logical timeline: the kernel is the only mutator of simulated state and
invokes agent callbacks sequentially in (time, sequence) order, so a run is
a pure function of (scenario, seed).  Every agent draws randomness from its
own substream, derived from the master seed by stable hashing, so adding an
agent never perturbs another agent's draws.
"""

import csv
import hashlib
import heapq
import io
import json
import random
from dataclasses import dataclass, field

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class SimEvent:
    time: float
    seq: int
    source: str
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {"time": self.time, "seq": self.seq, "source": self.source,
                "kind": self.kind, "payload": self.payload}


class EventLog:
    """Totally ordered record of everything that happened in a run."""

    def __init__(self):
        self.events: list[SimEvent] = []

    def append(self, event: SimEvent) -> None:
        if self.events:
            last = self.events[-1]
            assert (event.time, event.seq) > (last.time, last.seq), "log order violated"
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def since(self, seq: int) -> list[SimEvent]:
        return [e for e in self.events if e.seq > seq]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), separators=(",", ":")) + "\n"
                       for e in self.events)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["time", "seq", "source", "kind", "payload"])
        for e in self.events:
            writer.writerow([e.time, e.seq, e.source, e.kind,
                             json.dumps(e.payload, separators=(",", ":"))])
        return buf.getvalue()


def read_jsonl(text: str) -> list[SimEvent]:
    events = []
    for line in text.splitlines():
        if not line.strip():
            continue
        raw = json.loads(line)
        events.append(SimEvent(time=raw["time"], seq=raw["seq"], source=raw["source"],
                               kind=raw["kind"], payload=raw.get("payload", {})))
    return events


@dataclass(frozen=True)
class QkdInitModel:
    """Initialisation time of a QKD pair as an affine function of path loss.

    Parameterised by two (loss, time) calibration anchors instead of raw
    slope/intercept so a topology change recalibrates legibly.  The measured
    behaviour this encodes: a two-bypass path (~10.7 dB) initialises in
    ~190 s while a bypass-drop path (~7.4 dB) takes ~100 s, i.e. ~90%
    longer and ~90 s apart.
    """

    loss_low_db: float = 7.4
    time_at_low_s: float = 100.0
    loss_high_db: float = 10.7
    time_at_high_s: float = 190.0
    floor_s: float = 1.0

    def __call__(self, path_loss_db: float) -> float:
        if path_loss_db <= 0:
            raise InvalidArgumentError(f"path loss must be positive, got {path_loss_db}")
        k = (self.time_at_high_s - self.time_at_low_s) / (self.loss_high_db - self.loss_low_db)
        t0 = self.time_at_high_s - k * self.loss_high_db
        return max(self.floor_s, t0 + k * path_loss_db)


def qkd_init_time(path_loss_db: float, model: QkdInitModel | None = None) -> float:
    return (model or QkdInitModel())(path_loss_db)


@dataclass(frozen=True)
class LatencyModel:
    transceiver_basic_s: tuple[float, float] = (45.0, 55.0)
    transceiver_with_modulation_change_s: tuple[float, float] = (80.0, 90.0)
    ofs_s: float = 5.0
    wss_base_s: float = 8.0
    wss_per_passband_s: float = 2.0
    ns_deploy_s: tuple[float, float] = (27.0, 33.0)   # SYNTHETIC default
    l2_flow_s: tuple[float, float] = (2.0, 4.0)       # SYNTHETIC default
    qkd_init: QkdInitModel = field(default_factory=QkdInitModel)

    def __post_init__(self):
        for name, rng in (("transceiver_basic_s", self.transceiver_basic_s),
                          ("transceiver_with_modulation_change_s",
                           self.transceiver_with_modulation_change_s),
                          ("ns_deploy_s", self.ns_deploy_s),
                          ("l2_flow_s", self.l2_flow_s)):
            lo, hi = rng
            if not 0 < lo <= hi:
                raise InvalidArgumentError(f"{name} must be a positive range, got {rng}")
        if self.ofs_s <= 0 or self.wss_base_s <= 0 or self.wss_per_passband_s < 0:
            raise InvalidArgumentError("device latencies must be positive")
        basic, slow = self.transceiver_basic_s, self.transceiver_with_modulation_change_s
        if slow[0] < basic[0] or slow[1] < basic[1]:
            raise InvalidArgumentError(
                "a modulation change cannot be faster than a basic transceiver config")

    def wss_s(self, n_passband_changes: int) -> float:
        return self.wss_base_s + self.wss_per_passband_s * n_passband_changes


def sample_latency(model: LatencyModel, device_kind: str, rng: random.Random,
                   context: dict | None = None) -> float:
    """Draw one configuration latency for a device kind (sim-seconds)."""
    context = context or {}
    if device_kind == "transceiver":
        rng_range = (model.transceiver_with_modulation_change_s
                     if context.get("modulation_change") else model.transceiver_basic_s)
        return rng.uniform(*rng_range)
    if device_kind == "ofs":
        return model.ofs_s
    if device_kind == "wss":
        return model.wss_s(context.get("n_passband_changes", 1))
    if device_kind == "ns_deploy":
        return rng.uniform(*model.ns_deploy_s)
    if device_kind == "l2_flow":
        return rng.uniform(*model.l2_flow_s)
    if device_kind == "qkd_init":
        return model.qkd_init(context["path_loss_db"])
    raise InvalidArgumentError(f"unknown device kind {device_kind!r}")


class SimKernel:
    """Priority-queue clock plus the event log and per-agent RNG substreams."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.now = 0.0
        self.log = EventLog()
        self._heap: list[tuple[float, int, object]] = []
        self._sched_seq = 0
        self._log_seq = 0
        self._rngs: dict[str, random.Random] = {}

    def rng(self, agent_id: str) -> random.Random:
        """Stable per-agent substream of the master seed."""
        if agent_id not in self._rngs:
            digest = hashlib.sha256(f"{self.seed}:{agent_id}".encode()).digest()
            self._rngs[agent_id] = random.Random(int.from_bytes(digest[:8], "big"))
        return self._rngs[agent_id]

    def schedule(self, delay: float, callback, *args) -> int:
        """Run ``callback(*args)`` after ``delay`` sim-seconds; returns an id."""
        if delay < 0:
            raise InvalidArgumentError(f"cannot schedule {delay}s in the past")
        self._sched_seq += 1
        heapq.heappush(self._heap, (self.now + delay, self._sched_seq, (callback, args)))
        return self._sched_seq

    def emit(self, source: str, kind: str, payload: dict | None = None) -> SimEvent:
        """Append an event to the log at the current sim time."""
        self._log_seq += 1
        event = SimEvent(time=self.now, seq=self._log_seq, source=source,
                         kind=kind, payload=payload or {})
        self.log.append(event)
        return event

    def run_until(self, t: float) -> list[SimEvent]:
        """Fire everything scheduled up to and including ``t``.

        Returns the slice of the log produced by this call.  Events at equal
        times fire in schedule order.
        """
        start = len(self.log.events)
        while self._heap and self._heap[0][0] <= t:
            time, _, (callback, args) = heapq.heappop(self._heap)
            assert time >= self.now, "clock went backwards"
            self.now = time
            callback(*args)
        self.now = max(self.now, t)
        return self.log.events[start:]

    def run_to_quiescence(self, limit_s: float = 1e7) -> list[SimEvent]:
        start = len(self.log.events)
        while self._heap:
            if self._heap[0][0] > limit_s:
                break
            time, _, (callback, args) = heapq.heappop(self._heap)
            self.now = time
            callback(*args)
        return self.log.events[start:]
