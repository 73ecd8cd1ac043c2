"""Utility modules."""

from .logger import setup_logger, get_logger
from .errors import (
    SimulationError,
    ConfigError,
    ParameterError,
    ContractViolation,
    ComputationError,
    DressedPoleError,
    EmptyAccumulatorError,
    OutputError,
)

__all__ = [
    "setup_logger",
    "get_logger",
    "SimulationError",
    "ConfigError",
    "ParameterError",
    "ContractViolation",
    "ComputationError",
    "DressedPoleError",
    "EmptyAccumulatorError",
    "OutputError",
]
