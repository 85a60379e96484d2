"""Deterministic simulator and control plane for quantum-secured,
multi-domain network-service chaining over a flex-grid optical hub."""

__version__ = "0.1.0"

from .optical import (  # noqa: F401
    AwgModel,
    CalibrationTable,
    Modulation,
    OpticalChannel,
    PathClass,
    QuantumLink,
    aggregate_coexistence_power,
    awg_quantum_loss,
    coexistence_window,
    estimate_prefec_ber,
    estimate_skr_qber,
    load_calibration_table,
)
from .roadm import ConfigDelta, LossTable, QRoadmState, apply_config, path_loss  # noqa: F401
from .topology import Topology, load_topology  # noqa: F401
from .planner import Assignment, NSRequest, plan, replan_delta, select_modulation  # noqa: F401
from .kernel import EventLog, LatencyModel, SimEvent, SimKernel, qkd_init_time  # noqa: F401
from .keystore import EncryptorSession, KeyPool  # noqa: F401
from .orchestrator import InterIslandNS, Lifecycle, Orchestrator  # noqa: F401
from .scenario import ScenarioScript, load_script, run  # noqa: F401
