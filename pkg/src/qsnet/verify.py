"""Assertion patterns evaluated over a finished event log.

Pure functions over the log: no simulation access.  The pattern language
covers precedence (A before B), interval overlap, absence in a window,
match-count bounds and numeric bounds on payload fields.  Window boundaries
may be literal times, ``"start"``/``"end"``, or ``"step:N"`` referring to the
Nth scenario step marker.
"""

import fnmatch
from dataclasses import dataclass

from .errors import SchemaError
from .kernel import SimEvent


@dataclass(frozen=True)
class CheckResult:
    description: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.description}: {self.detail}"


def _match_one(event: SimEvent, spec: dict) -> bool:
    for key, expected in spec.items():
        if key == "kind":
            patterns = expected if isinstance(expected, list) else [expected]
            if not any(fnmatch.fnmatchcase(event.kind, p) for p in patterns):
                return False
        elif key == "source":
            if not fnmatch.fnmatchcase(event.source, expected):
                return False
        elif key.startswith("payload."):
            if event.payload.get(key[len("payload."):]) != expected:
                return False
        else:
            raise SchemaError(f"unknown match key {key!r}")
    return True


def _select(events: list[SimEvent], spec: dict) -> list[SimEvent]:
    if not isinstance(spec, dict) or not spec:
        raise SchemaError(f"match spec must be a non-empty object, got {spec!r}")
    return [e for e in events if _match_one(e, spec)]


def _resolve_time(bound, events: list[SimEvent]) -> float:
    if isinstance(bound, (int, float)):
        return float(bound)
    if bound == "start":
        return float("-inf")
    if bound == "end":
        return float("inf")
    if isinstance(bound, str) and bound.startswith("step:"):
        index = int(bound.split(":", 1)[1])
        for e in events:
            if e.kind == "scenario-step" and e.payload.get("index") == index:
                return e.time
        raise SchemaError(f"no scenario-step marker with index {index}")
    raise SchemaError(f"cannot resolve time bound {bound!r}")


def _window(events: list[SimEvent], assertion: dict) -> list[SimEvent]:
    between = assertion.get("between")
    if between is None:
        return events
    if not isinstance(between, list) or len(between) != 2:
        raise SchemaError(f"'between' must be [start, end], got {between!r}")
    t0 = _resolve_time(between[0], events)
    t1 = _resolve_time(between[1], events)
    return [e for e in events if t0 <= e.time <= t1]


def _first_time(matches: list[SimEvent]) -> float | None:
    return matches[0].time if matches else None


def check(events: list[SimEvent], assertion: dict) -> CheckResult:
    """Evaluate one assertion; malformed assertions raise SchemaError."""
    if "check" not in assertion:
        raise SchemaError(f"assertion missing 'check': {assertion!r}")
    kind = assertion["check"]
    description = assertion.get("description", kind)
    scoped = _window(events, assertion)
    if kind == "precede":
        first = _select(scoped, assertion["first"])
        then = _select(scoped, assertion["then"])
        if not first:
            return CheckResult(description, False, f"no event matches {assertion['first']}")
        if not then:
            return CheckResult(description, False, f"no event matches {assertion['then']}")
        t_first, t_then = _first_time(first), _first_time(then)
        ok = (t_first, first[0].seq) < (t_then, then[0].seq)
        return CheckResult(description, ok,
                           f"first at t={t_first:.3f}, then at t={t_then:.3f}")
    if kind == "absent":
        matches = _select(scoped, assertion["match"])
        return CheckResult(description, not matches,
                           f"{len(matches)} forbidden event(s)" if matches else "clean")
    if kind == "count":
        matches = _select(scoped, assertion["match"])
        lo = assertion.get("min", 0)
        hi = assertion.get("max")
        ok = len(matches) >= lo and (hi is None or len(matches) <= hi)
        bounds = f">={lo}" + (f", <={hi}" if hi is not None else "")
        return CheckResult(description, ok, f"{len(matches)} match(es), wanted {bounds}")
    if kind == "overlap":
        a0 = _first_time(_select(scoped, assertion["a_start"]))
        a1 = _first_time(_select(scoped, assertion["a_end"]))
        b0 = _first_time(_select(scoped, assertion["b_start"]))
        b1 = _first_time(_select(scoped, assertion["b_end"]))
        if None in (a0, a1, b0, b1):
            return CheckResult(description, False, "one of the interval endpoints is missing")
        ok = a0 < b1 and b0 < a1
        return CheckResult(description, ok,
                           f"A=[{a0:.3f},{a1:.3f}] B=[{b0:.3f},{b1:.3f}]")
    if kind == "bound":
        matches = _select(scoped, assertion["match"])
        fieldname = assertion["field"]
        if not fieldname.startswith("payload."):
            raise SchemaError("'bound' field must start with 'payload.'")
        key = fieldname[len("payload."):]
        values = [e.payload.get(key) for e in matches if e.payload.get(key) is not None]
        if not values:
            return CheckResult(description, False, f"no values for {fieldname}")
        lo = assertion.get("min")
        hi = assertion.get("max")
        bad = [v for v in values
               if (lo is not None and v < lo) or (hi is not None and v > hi)]
        return CheckResult(description, not bad,
                           f"{len(values)} value(s), {len(bad)} out of bounds")
    raise SchemaError(f"unknown check kind {kind!r}")


def verify(events: list[SimEvent], assertions: list[dict]) -> list[CheckResult]:
    if not isinstance(assertions, list):
        raise SchemaError("assertions must be a list")
    return [check(events, a) for a in assertions]
