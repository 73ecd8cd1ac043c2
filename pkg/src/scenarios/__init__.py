"""Runnable scenarios: spectrum, scatter, diffuse and memory."""

from .base import BaseScenario, ScenarioResult
from .registry import ScenarioRegistry
from .spectrum import SpectrumScenario
from .scatter import ScatterScenario
from .diffuse import DiffuseScenario
from .memory import MemoryScenario

__all__ = [
    "BaseScenario",
    "ScenarioResult",
    "ScenarioRegistry",
    "SpectrumScenario",
    "ScatterScenario",
    "DiffuseScenario",
    "MemoryScenario",
]
