"""Hub topology: islands attached to the 4-degree node, loss table, AWG,
wavelength grid, and planning knobs.  Loaded from a JSON file so the shipped
testbed layout is data, not code.

Islands attach either to a line degree (``degN``: quantum and data arrive
multiplexed, demuxed by the island's AWG) or to a degree's local add/drop
ports (``localN``: the node separates quantum from data before the drop
span).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError, UnknownPortError
from .optical import AwgModel, PathClass
from .roadm import AwgSpan, FibreSpan, LossTable, NodeSpan, QRoadmState, Span

DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class Island:
    id: int
    name: str
    fibre_km: float
    port: str  # "degN" or "localN"

    @property
    def degree(self) -> int:
        return int(self.port[3:]) if self.port.startswith("deg") else int(self.port[5:])

    @property
    def is_local(self) -> bool:
        return self.port.startswith("local")

    @property
    def ingress_port(self) -> str:
        """Node input port carrying this island's outbound signals."""
        return f"add{self.degree}" if self.is_local else f"deg{self.degree}"

    @property
    def egress_port(self) -> str:
        """Node output port toward this island."""
        return f"drop{self.degree}" if self.is_local else f"deg{self.degree}"


@dataclass(frozen=True)
class Topology:
    islands: tuple[Island, ...]
    degrees: int = 4
    grid_thz: tuple[float, ...] = (195.00, 195.10, 195.20, 195.30)
    quantum_channel_thz: float = 193.20
    loss_table: LossTable = field(default_factory=LossTable)
    awg: AwgModel = field(default_factory=AwgModel)
    #: one wavelength per service used in both directions (vs one per direction)
    single_wavelength_per_ns: bool = False
    #: WSS equalisation cap on any channel sharing fibre with a quantum signal (dBm)
    secured_power_cap_dbm: float = -22.0
    #: default launch power for channels free of quantum coexistence (dBm)
    unsecured_launch_power_dbm: float = -15.0

    def island(self, island_id: int) -> Island:
        for isl in self.islands:
            if isl.id == island_id:
                return isl
        raise UnknownPortError(f"unknown island {island_id}")

    def initial_roadm_state(self) -> QRoadmState:
        return QRoadmState(degrees=self.degrees, quantum_channel_thz=self.quantum_channel_thz)

    # -- route construction ------------------------------------------------

    def quantum_path(self, alice_id: int, bob_id: int) -> list[Span]:
        alice, bob = self.island(alice_id), self.island(bob_id)
        spans: list[Span] = [
            FibreSpan(alice.fibre_km),
            NodeSpan(alice.ingress_port, bob.egress_port),
            FibreSpan(bob.fibre_km),
        ]
        if not bob.is_local:
            # mixed quantum+data arrives at the island and is AWG-demuxed
            spans.append(AwgSpan())
        return spans

    def data_path(self, src_id: int, dst_id: int, frequency_thz: float) -> list[Span]:
        src, dst = self.island(src_id), self.island(dst_id)
        return [
            FibreSpan(src.fibre_km),
            NodeSpan(src.ingress_port, dst.egress_port, frequency_thz=frequency_thz),
            FibreSpan(dst.fibre_km),
        ]

    def quantum_path_class(self, alice_id: int, bob_id: int) -> PathClass:
        bob = self.island(bob_id)
        return PathClass.BYPASS_DROP if bob.is_local else PathClass.BYPASS_BYPASS


def load_topology(path: str | Path | None = None) -> Topology:
    """Load and validate a topology + loss-table JSON file."""
    path = Path(path) if path is not None else DATA_DIR / "topology.json"
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}", location=str(path))
    for required in ("degrees", "islands", "loss_table"):
        if required not in raw:
            raise SchemaError(f"missing field '{required}'", location=str(path))
    degrees = raw["degrees"]
    islands = []
    seen_ids: set[int] = set()
    seen_ports: set[str] = set()
    for i, entry in enumerate(raw["islands"]):
        loc = f"{path}: islands[{i}]"
        for required in ("id", "fibre_km", "port"):
            if required not in entry:
                raise SchemaError(f"missing field '{required}'", location=loc)
        port = entry["port"]
        if not (port.startswith("deg") or port.startswith("local")):
            raise SchemaError(f"port must be 'degN' or 'localN', got {port!r}", location=loc)
        isl = Island(
            id=int(entry["id"]),
            name=entry.get("name", f"island{entry['id']}"),
            fibre_km=float(entry["fibre_km"]),
            port=port,
        )
        if isl.id in seen_ids:
            raise SchemaError(f"duplicate island id {isl.id}", location=loc)
        if isl.port in seen_ports:
            raise SchemaError(f"duplicate island port {isl.port}", location=loc)
        if not 1 <= isl.degree <= degrees:
            raise SchemaError(f"port {port!r} outside {degrees}-degree node", location=loc)
        seen_ids.add(isl.id)
        seen_ports.add(isl.port)
        islands.append(isl)
    lt = raw["loss_table"]
    loss_table = LossTable(
        quantum_bypass_db=lt.get("quantum_bypass_db", 5.3),
        quantum_drop_db=lt.get("quantum_drop_db", 5.9),
        quantum_add_db=lt.get("quantum_add_db", 1.2),
        data_bypass_db=lt.get("data_bypass_db", 23.0),
        data_add_db=lt.get("data_add_db", 21.5),
        data_drop_db=lt.get("data_drop_db", 8.5),
        coupler_95_5_quantum_db=lt.get("coupler_95_5_quantum_db", 0.0),
        fibre_loss_per_km_db=lt.get("fibre_loss_per_km_db", 0.25),
    )
    awg_raw = raw.get("awg", {})
    awg = AwgModel(
        center_frequency_thz=awg_raw.get("center_frequency_thz", raw.get("quantum_channel_thz", 193.20)),
        optimal_temperature=awg_raw.get("optimal_temperature", 30.0),
        insertion_loss_at_optimum_db=awg_raw.get("insertion_loss_at_optimum_db", 2.9),
        detuning_coefficient_db=awg_raw.get("detuning_coefficient_db", 1.5),
    )
    return Topology(
        islands=tuple(islands),
        degrees=degrees,
        grid_thz=tuple(raw.get("grid_thz", (195.00, 195.10, 195.20, 195.30))),
        quantum_channel_thz=raw.get("quantum_channel_thz", 193.20),
        loss_table=loss_table,
        awg=awg,
        single_wavelength_per_ns=raw.get("single_wavelength_per_ns", False),
        secured_power_cap_dbm=raw.get("secured_power_cap_dbm", -22.0),
        unsecured_launch_power_dbm=raw.get("unsecured_launch_power_dbm", -15.0),
    )
