"""Exception types shared by the simulator.

Every error carries the name of the module that raised it so the CLI can
report provenance and pick an exit code.
"""

from typing import List, Optional, Tuple


class SimulationError(Exception):
    """Base class for all simulator errors."""

    module: str = "core"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module

    def __str__(self) -> str:
        return f"[{self.module}] {super().__str__()}"


class ConfigError(SimulationError):
    """Invalid, missing or contradictory run configuration."""

    module = "config"

    def __init__(
        self,
        message: str,
        details: Optional[List[Tuple[str, str, str]]] = None,
        module: Optional[str] = None,
    ):
        super().__init__(message, module)
        # (field path, expected, actual)
        self.details: List[Tuple[str, str, str]] = list(details or [])


class ParameterError(SimulationError, ValueError):
    """Physical parameter outside its admissible range."""


class ContractViolation(SimulationError, ValueError):
    """Caller broke a documented precondition."""


class ComputationError(SimulationError):
    """Numerical failure while evaluating a scenario."""


class DressedPoleError(ComputationError):
    """Dressed propagator evaluated on (or numerically at) a pole."""

    module = "dressed_green"


class EmptyAccumulatorError(ComputationError):
    """Statistics requested from an accumulator that holds no energy."""

    module = "diffuse_mc"


class OutputError(SimulationError):
    """Failure while writing run artifacts."""

    module = "output"
