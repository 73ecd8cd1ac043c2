"""Data models shared across the simulator."""

from .levels import LevelId, Manifold, ground_levels, excited_levels, GROUND_F, EXCITED_F
from .optics import ScatteringChannel, SusceptibilityTensor, ScatteringAmplitude
from .signals import TimeSeries, Spectrum
from .channel import ChannelState, WignerGrid, WernerState, FidelityClass

__all__ = [
    "LevelId",
    "Manifold",
    "ground_levels",
    "excited_levels",
    "GROUND_F",
    "EXCITED_F",
    "ScatteringChannel",
    "SusceptibilityTensor",
    "ScatteringAmplitude",
    "TimeSeries",
    "Spectrum",
    "ChannelState",
    "WignerGrid",
    "WernerState",
    "FidelityClass",
]
