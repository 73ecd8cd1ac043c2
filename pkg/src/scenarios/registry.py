"""Scenario registry for the runnable simulations."""

import logging
from typing import Dict, List, Type

from src.scenarios.base import BaseScenario
from src.scenarios.diffuse import DiffuseScenario
from src.scenarios.memory import MemoryScenario
from src.scenarios.scatter import ScatterScenario
from src.scenarios.spectrum import SpectrumScenario
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)


class ScenarioRegistry:
    """Registry of all scenarios, keyed by CLI subcommand."""

    _scenarios: Dict[str, Type[BaseScenario]] = {
        "spectrum": SpectrumScenario,
        "scatter": ScatterScenario,
        "diffuse": DiffuseScenario,
        "memory": MemoryScenario,
    }

    @classmethod
    def get_scenario_class(cls, name: str) -> Type[BaseScenario]:
        """Get scenario class by name."""
        try:
            return cls._scenarios[name.lower()]
        except KeyError:
            raise ConfigError(
                f"unknown scenario '{name}'",
                details=[("scenario", " | ".join(cls._scenarios), name)],
            ) from None

    @classmethod
    def create(cls, name: str, *args, **kwargs) -> BaseScenario:
        return cls.get_scenario_class(name)(*args, **kwargs)

    @classmethod
    def register(cls, name: str, scenario_class: Type[BaseScenario]) -> None:
        cls._scenarios[name.lower()] = scenario_class
        logger.debug(f"[Registry] Registered scenario {name}")

    @classmethod
    def get_all_names(cls) -> List[str]:
        """Get list of all registered scenario names."""
        return list(cls._scenarios)

    @classmethod
    def get_all(cls) -> Dict[str, Type[BaseScenario]]:
        return dict(cls._scenarios)
