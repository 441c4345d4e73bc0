"""
Exception hierarchy shared by every solver path.

Each error can render itself as a flat dictionary so the command-line front
end can emit machine-readable diagnostics on stderr.
"""

from typing import Any, Dict


class SuperradianceError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        payload = {"error": type(self).__name__, "message": self.message}
        payload.update(self.context)
        return payload


class ParameterError(SuperradianceError, ValueError):
    """A physical parameter violates one of the SystemParams invariants."""


class UndefinedRateError(ParameterError):
    """A quantity that only exists for a lossy cavity was requested at lambda = 0."""


class PoleError(SuperradianceError, ArithmeticError):
    """Evaluation too close to a pole of the single-atom decay rate."""


class DegenerateParametersError(SuperradianceError, ArithmeticError):
    """Two roots of the two-atom characteristic cubic coincide."""


class CapacityError(SuperradianceError, MemoryError):
    """The block-reduced state does not fit into the configured memory budget."""


class StiffnessError(SuperradianceError, RuntimeError):
    pass


class AccuracyError(SuperradianceError, RuntimeError):
    pass


class IncompleteTraceError(SuperradianceError, RuntimeError):
    """The sampled trace ends before its first intensity maximum."""


class BracketError(SuperradianceError, ValueError):
    pass


class ExponentDataError(SuperradianceError, ValueError):
    pass


class ConfigError(SuperradianceError, ValueError):
    """Configuration could not be parsed; carries the offending line and field."""
