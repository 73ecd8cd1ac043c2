"""Base class for runnable scenarios."""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.config import RunConfig
from src.output.writers import CsvTable
from src.physics.atomic_data import TransitionTable
from src.utils.errors import SimulationError

logger = logging.getLogger(__name__)


@dataclass
class ScenarioResult:
    """Tables and summary of one scenario run."""

    scenario: str
    tables: List[CsvTable] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[str] = None
    exception: Optional[SimulationError] = None

    @property
    def success(self) -> bool:
        return self.error is None

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            logger.warning(f"[{self.scenario}] {message}")
            self.warnings.append(message)


class BaseScenario(ABC):
    """Abstract base class for all scenarios."""

    name: str = "base"
    display_name: str = "Base Scenario"
    description: str = ""

    def __init__(self, config: RunConfig, table: Optional[TransitionTable] = None, workers: int = 1):
        """
        Args:
            config: validated run configuration
            table: level table; the compiled-in 85Rb data by default
            workers: default worker count where the scenario parallelizes
        """
        self.config = config
        self.table = table or TransitionTable.default()
        self.workers = workers

    @abstractmethod
    def run(self) -> ScenarioResult:
        """Compute the scenario; errors propagate as SimulationError subclasses."""

    def execute(self) -> ScenarioResult:
        """Run and capture simulator errors on the result instead of raising."""
        started = time.perf_counter()
        try:
            result = self.run()
        except SimulationError as e:
            logger.error(f"[{self.display_name}] {e}")
            result = ScenarioResult(scenario=self.name, error=str(e), exception=e)
        result.wall_time = time.perf_counter() - started
        if result.warnings:
            result.summary["warnings"] = list(result.warnings)
        return result

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__} name={self.name}>"
