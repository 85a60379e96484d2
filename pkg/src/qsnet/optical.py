"""Physical-layer model: coexistence power aggregation, AWG filtering loss,
calibration-table driven SKR/QBER estimation, operating windows, and a
pre-FEC BER curve for the classical channels.

Everything here is a pure function over immutable inputs; safe to call
concurrently.  Measured operating points ship in a JSON calibration table
(``data/calibration.json``) with per-point provenance tags, never hard-coded,
so measured vs synthetic values stay auditable.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import InvalidArgumentError, SchemaError, UnsupportedConfigurationError


class Modulation(str, Enum):
    PM_QPSK = "PM-QPSK"
    PM_8QAM = "PM-8QAM"
    PM_16QAM = "PM-16QAM"


class PathClass(str, Enum):
    BYPASS_BYPASS = "BYPASS_BYPASS"
    BYPASS_DROP = "BYPASS_DROP"


class QkdLinkState(str, Enum):
    IDLE = "IDLE"
    INITIALIZING = "INITIALIZING"
    KEYS_FLOWING = "KEYS_FLOWING"
    FAILED = "FAILED"


class Provenance(str, Enum):
    PAPER = "PAPER"
    SYNTHETIC = "SYNTHETIC"


#: 100 GHz grid used by the shipped 4-island topology (THz).
DEFAULT_GRID_THZ = (195.00, 195.10, 195.20, 195.30)

#: Model validity range for launch/coexistence powers (dBm).
POWER_MODEL_RANGE_DBM = (-35.0, 5.0)

#: Hard ceiling on drop-port secret key rate (bits/s).
DROP_PORT_SKR_CAP_BPS = 1100.0


@dataclass(frozen=True)
class OpticalChannel:
    """One classical data channel."""

    frequency_thz: float
    modulation: Modulation
    fec_overhead_pct: float = 25.0
    launch_power_dbm: float = -15.0

    def __post_init__(self):
        lo, hi = POWER_MODEL_RANGE_DBM
        if not lo <= self.launch_power_dbm <= hi:
            raise InvalidArgumentError(
                f"launch power {self.launch_power_dbm} dBm outside model range [{lo}, {hi}]"
            )


@dataclass(frozen=True)
class CoexistenceSpec:
    """Classical channels co-propagating with one quantum channel."""

    n_channels: int
    modulation: Modulation
    per_channel_dbm: float

    @property
    def aggregated_dbm(self) -> float:
        return aggregate_coexistence_power(self.per_channel_dbm, self.n_channels)


@dataclass
class QuantumLink:
    """An Alice->Bob pairing with its accumulated loss and key-rate state."""

    alice_island: int
    bob_island: int
    path_class: PathClass
    path_loss_db: float = 0.0
    coexistence: CoexistenceSpec | None = None
    skr_bps: float = 0.0
    qber: float = 0.0
    state: QkdLinkState = QkdLinkState.IDLE

    @property
    def link_id(self) -> str:
        return f"qkd:{self.alice_island}-{self.bob_island}"

    @property
    def coexistence_power_dbm(self) -> float | None:
        return None if self.coexistence is None else self.coexistence.aggregated_dbm


@dataclass(frozen=True)
class CalibrationPoint:
    power_dbm: float
    skr_bps: float
    qber: float
    provenance: Provenance


@dataclass(frozen=True)
class CalibrationSeries:
    path_class: PathClass
    n_channels: int
    modulation: Modulation
    points: tuple[CalibrationPoint, ...]

    @property
    def key(self) -> tuple[PathClass, int, Modulation]:
        return (self.path_class, self.n_channels, self.modulation)

    @property
    def window(self) -> tuple[float, float]:
        return (self.points[0].power_dbm, self.points[-1].power_dbm)


@dataclass(frozen=True)
class CalibrationTable:
    series: tuple[CalibrationSeries, ...]

    def find(self, path_class: PathClass, n_channels: int, modulation: Modulation) -> CalibrationSeries | None:
        for s in self.series:
            if s.key == (path_class, n_channels, modulation):
                return s
        return None


@dataclass(frozen=True)
class AwgModel:
    """Temperature-tuned arrayed waveguide grating filtering the quantum channel.

    The quadratic detuning penalty is a modelling choice: the measured curve
    only fixes the minimum (2.9 dB at the optimal temperature) and the fact
    that loss grows away from it.
    """

    center_frequency_thz: float = 193.20
    optimal_temperature: float = 30.0
    insertion_loss_at_optimum_db: float = 2.9
    detuning_coefficient_db: float = 1.5  # dB per temperature-unit^2


def aggregate_coexistence_power(per_channel_dbm: float, n_channels: int) -> float:
    """Total coexistence power of ``n_channels`` equal-power channels, in dBm.

    Power addition in the linear domain: p + 10*log10(n).
    """
    if n_channels < 1:
        raise InvalidArgumentError(f"n_channels must be >= 1, got {n_channels}")
    return per_channel_dbm + 10.0 * math.log10(n_channels)


def awg_quantum_loss(temperature: float, model: AwgModel) -> float:
    """Quantum-channel loss through the AWG at a given temperature (dB)."""
    detuning = temperature - model.optimal_temperature
    return model.insertion_loss_at_optimum_db + model.detuning_coefficient_db * detuning * detuning


def estimate_skr_qber_at(
    table: CalibrationTable,
    path_class: PathClass,
    n_channels: int,
    modulation: Modulation,
    per_channel_dbm: float,
) -> tuple[float, float]:
    """SKR (bits/s) and QBER for one coexistence configuration.

    Piecewise-linear interpolation in per-channel dBm between calibration
    points; at a calibration point the stored value is returned verbatim.
    Outside the series' operating window the SKR is 0 by construction (below
    it the classical channel fails its BER budget, above it the quantum
    channel dies) and the QBER is clamped to the nearest endpoint.
    """
    series = table.find(path_class, n_channels, modulation)
    if series is None:
        raise UnsupportedConfigurationError(
            f"no calibration series for ({path_class.value}, {n_channels}ch, {modulation.value})"
        )
    pts = series.points
    lo, hi = series.window
    if per_channel_dbm < lo:
        return (0.0, pts[0].qber)
    if per_channel_dbm > hi:
        return (0.0, pts[-1].qber)
    for pt in pts:
        if per_channel_dbm == pt.power_dbm:
            return (_cap_skr(pt.skr_bps, path_class), pt.qber)
    for left, right in zip(pts, pts[1:]):
        if left.power_dbm <= per_channel_dbm <= right.power_dbm:
            frac = (per_channel_dbm - left.power_dbm) / (right.power_dbm - left.power_dbm)
            skr = left.skr_bps + frac * (right.skr_bps - left.skr_bps)
            qber = left.qber + frac * (right.qber - left.qber)
            return (_cap_skr(skr, path_class), qber)
    raise AssertionError("unreachable: window bounds checked above")


def _cap_skr(skr: float, path_class: PathClass) -> float:
    if path_class is PathClass.BYPASS_DROP:
        return min(skr, DROP_PORT_SKR_CAP_BPS)
    return skr


def estimate_skr_qber(link: QuantumLink, table: CalibrationTable) -> tuple[float, float]:
    """SKR/QBER for a quantum link from its coexistence configuration."""
    if link.coexistence is None:
        raise InvalidArgumentError(f"{link.link_id} has no coexistence configuration")
    co = link.coexistence
    return estimate_skr_qber_at(table, link.path_class, co.n_channels, co.modulation, co.per_channel_dbm)


@dataclass(frozen=True)
class BerModel:
    """Pre-FEC BER vs per-channel power.

    Logistic in the dB domain: log-linear in the operating region and
    saturating at 0.5 toward very low powers, which keeps the curve strictly
    decreasing and physically bounded over the whole model validity range.
    ``threshold_power_dbm`` anchors each modulation at the 25%-overhead FEC
    limit; denser formats need more power.  Drop-port paths see an effective
    power advantage (shorter span, band-pass filtering).
    """

    slope_per_db: float = 0.5
    threshold_power_dbm: dict = field(
        default_factory=lambda: {
            Modulation.PM_QPSK: -28.5,
            Modulation.PM_8QAM: -24.5,
            Modulation.PM_16QAM: -21.9,
        }
    )
    drop_gain_db: float = 3.0
    fec_threshold_by_overhead: dict = field(
        default_factory=lambda: {7.0: 8.5e-3, 15.0: 2.0e-2, 25.0: 4.0e-2}
    )

    def fec_threshold(self, overhead_pct: float) -> float:
        try:
            return self.fec_threshold_by_overhead[float(overhead_pct)]
        except KeyError:
            raise UnsupportedConfigurationError(f"no FEC threshold for {overhead_pct}% overhead")


DEFAULT_BER_MODEL = BerModel()


def estimate_prefec_ber(
    channel: OpticalChannel,
    path_class: PathClass,
    per_channel_dbm: float,
    model: BerModel = DEFAULT_BER_MODEL,
) -> float:
    """Pre-FEC BER of a classical channel at the given per-channel power."""
    p_eff = per_channel_dbm
    if path_class is PathClass.BYPASS_DROP:
        p_eff += model.drop_gain_db
    p_thr = model.threshold_power_dbm[channel.modulation]
    # anchor: ber(p_thr) equals the 25%-overhead FEC threshold
    anchor = model.fec_threshold(25.0)
    p50 = p_thr - math.log10(0.5 / anchor - 1.0) / model.slope_per_db
    return 0.5 / (1.0 + 10.0 ** (model.slope_per_db * (p_eff - p50)))


def coexistence_window(
    modulation: Modulation,
    n_channels: int,
    path_class: PathClass,
    table: CalibrationTable,
    ber_model: BerModel = DEFAULT_BER_MODEL,
    fec_overhead_pct: float = 25.0,
) -> tuple[float, float] | None:
    """Per-channel power interval where SKR > 0 and pre-FEC BER < threshold.

    None when the combination has no calibration data (infeasible) or the
    two constraints do not intersect.
    """
    series = table.find(path_class, n_channels, modulation)
    if series is None:
        return None
    lo, hi = series.window
    # lowest power at which the classical channel still meets its FEC budget
    threshold = ber_model.fec_threshold(fec_overhead_pct)
    probe = OpticalChannel(frequency_thz=DEFAULT_GRID_THZ[0], modulation=modulation,
                           fec_overhead_pct=fec_overhead_pct, launch_power_dbm=-15.0)
    ber_min = _power_at_ber(probe, path_class, threshold, ber_model)
    lo = max(lo, ber_min)
    if lo >= hi:
        return None
    return (lo, hi)


def _power_at_ber(channel: OpticalChannel, path_class: PathClass, ber: float, model: BerModel) -> float:
    """Invert the logistic BER curve: power at which the BER equals ``ber``."""
    p_thr = model.threshold_power_dbm[channel.modulation]
    anchor = model.fec_threshold(25.0)
    p50 = p_thr - math.log10(0.5 / anchor - 1.0) / model.slope_per_db
    p_eff = p50 + math.log10(0.5 / ber - 1.0) / model.slope_per_db
    if path_class is PathClass.BYPASS_DROP:
        p_eff -= model.drop_gain_db
    return p_eff


# --- calibration table loading -------------------------------------------

DATA_DIR = Path(__file__).parent / "data"


def load_calibration_table(path: str | Path | None = None) -> CalibrationTable:
    """Load and validate a calibration table JSON file.

    Schema: {"series": [{"path_class", "n_channels", "modulation",
    "points": [{"power_dbm", "skr_bps", "qber", "provenance"}]}]}.
    Violations are rejected with the offending series/point index.
    """
    path = Path(path) if path is not None else DATA_DIR / "calibration.json"
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}", location=str(path))
    if not isinstance(raw, dict) or "series" not in raw:
        raise SchemaError("top-level object must contain 'series'", location=str(path))
    series_list = []
    seen_keys = set()
    for i, s in enumerate(raw["series"]):
        loc = f"{path}: series[{i}]"
        for field_name in ("path_class", "n_channels", "modulation", "points"):
            if field_name not in s:
                raise SchemaError(f"missing field '{field_name}'", location=loc)
        try:
            path_class = PathClass(s["path_class"])
            modulation = Modulation(s["modulation"])
        except ValueError as e:
            raise SchemaError(str(e), location=loc)
        n_channels = s["n_channels"]
        if not isinstance(n_channels, int) or n_channels < 1:
            raise SchemaError(f"n_channels must be a positive int, got {n_channels!r}", location=loc)
        key = (path_class, n_channels, modulation)
        if key in seen_keys:
            raise SchemaError(f"duplicate series {key}", location=loc)
        seen_keys.add(key)
        pts = []
        for j, p in enumerate(s["points"]):
            ploc = f"{loc}.points[{j}]"
            for field_name in ("power_dbm", "skr_bps", "qber", "provenance"):
                if field_name not in p:
                    raise SchemaError(f"missing field '{field_name}'", location=ploc)
            try:
                prov = Provenance(p["provenance"])
            except ValueError as e:
                raise SchemaError(str(e), location=ploc)
            if p["skr_bps"] < 0:
                raise SchemaError(f"skr_bps must be >= 0, got {p['skr_bps']}", location=ploc)
            if not 0.0 <= p["qber"] <= 1.0:
                raise SchemaError(f"qber must be in [0, 1], got {p['qber']}", location=ploc)
            pts.append(CalibrationPoint(
                power_dbm=float(p["power_dbm"]), skr_bps=float(p["skr_bps"]),
                qber=float(p["qber"]), provenance=prov,
            ))
        if len(pts) < 2:
            raise SchemaError("series needs at least 2 points", location=loc)
        for j, (a, b) in enumerate(zip(pts, pts[1:])):
            ploc = f"{loc}.points[{j + 1}]"
            if b.power_dbm <= a.power_dbm:
                raise SchemaError(
                    f"points must be strictly increasing in power ({a.power_dbm} -> {b.power_dbm})",
                    location=ploc)
            if b.skr_bps > a.skr_bps:
                raise SchemaError(
                    f"skr must be non-increasing in power ({a.skr_bps} -> {b.skr_bps})",
                    location=ploc)
            if b.qber < a.qber:
                raise SchemaError(
                    f"qber must be non-decreasing in power ({a.qber} -> {b.qber})",
                    location=ploc)
        if path_class is PathClass.BYPASS_DROP:
            for j, p in enumerate(pts):
                if p.skr_bps > DROP_PORT_SKR_CAP_BPS:
                    raise SchemaError(
                        f"drop-port skr {p.skr_bps} exceeds cap {DROP_PORT_SKR_CAP_BPS}",
                        location=f"{loc}.points[{j}]")
        series_list.append(CalibrationSeries(
            path_class=path_class, n_channels=n_channels, modulation=modulation, points=tuple(pts)))
    return CalibrationTable(series=tuple(series_list))
