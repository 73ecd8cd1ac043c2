"""Shared fixtures."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.physics.atomic_data import TransitionTable
from src.physics.dressed_green import ControlField
from src.physics.medium import CloudConfig
from src.physics.pulse_transport import PulseConfig


@pytest.fixture(scope="session")
def table() -> TransitionTable:
    return TransitionTable.default()


@pytest.fixture(scope="session")
def control_on() -> ControlField:
    return ControlField(rabi=3.0, offset=-0.4)


@pytest.fixture(scope="session")
def control_off() -> ControlField:
    return ControlField()


@pytest.fixture(scope="session")
def cloud() -> CloudConfig:
    return CloudConfig.from_b0(10.0, 200.0)


@pytest.fixture(scope="session")
def pulse() -> PulseConfig:
    return PulseConfig()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)
