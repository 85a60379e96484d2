"""Exception hierarchy shared across the simulator and control plane.

Every error carries a short machine-readable ``code`` so the gateway can map
failures onto structured HTTP error bodies without string matching.
"""


class QsnetError(Exception):
    code = "internal"

    def __init__(self, message: str, *, constraint: str | None = None):
        super().__init__(message)
        self.message = message
        # name of the violated constraint, when one is identifiable
        self.constraint = constraint


class InvalidArgumentError(QsnetError):
    code = "invalid-argument"


class SchemaError(QsnetError):
    """A data file (calibration table, topology, scenario) failed validation."""

    code = "schema-error"

    def __init__(self, message: str, *, location: str | None = None):
        super().__init__(message)
        self.location = location

    def __str__(self) -> str:
        if self.location:
            return f"{self.location}: {self.message}"
        return self.message


class UnsupportedConfigurationError(QsnetError):
    code = "unsupported-configuration"


class QuantumCollisionError(QsnetError):
    code = "quantum-collision"


class WavelengthCollisionError(QsnetError):
    code = "wavelength-collision"


class UnknownPortError(QsnetError):
    code = "unknown-port"


class DegreeInUseError(QsnetError):
    code = "degree-in-use"


class DisconnectedPathError(QsnetError):
    code = "disconnected-path"


class PlanInfeasibleError(QsnetError):
    """Planning failed; ``violations`` maps request id -> first violated constraint."""

    code = "infeasible"

    def __init__(self, violations: dict[str, str]):
        self.violations = dict(violations)
        detail = "; ".join(f"{rid}: {why}" for rid, why in self.violations.items())
        super().__init__(f"plan infeasible: {detail}")


class NotFoundError(QsnetError):
    code = "not-found"


class InvalidStateError(QsnetError):
    code = "invalid-state"
