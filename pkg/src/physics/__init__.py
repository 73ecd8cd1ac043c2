"""Atomic response and single-scattering optics of the 85Rb D2 line."""

from .atomic_data import TransitionTable, dipole_matrix_element, relative_strength
from .dressed_green import ControlField, excited_green, narrow_resonance, at_width_scale
from .response import (
    susceptibility,
    susceptibility_spectrum,
    scattering_tensor,
    differential_cross_section,
    total_scattering_cross_section,
    extinction_cross_section,
    kramers_kronig,
    sigma0,
)
from .medium import CloudConfig, GaussianProfile, UniformSlab, column_density, optical_depth, transfer_function
from .pulse_transport import PulseConfig, TimeGrid, single_scatter_signal

__all__ = [
    "TransitionTable",
    "dipole_matrix_element",
    "relative_strength",
    "ControlField",
    "excited_green",
    "narrow_resonance",
    "at_width_scale",
    "susceptibility",
    "susceptibility_spectrum",
    "scattering_tensor",
    "differential_cross_section",
    "total_scattering_cross_section",
    "extinction_cross_section",
    "kramers_kronig",
    "sigma0",
    "CloudConfig",
    "GaussianProfile",
    "UniformSlab",
    "column_density",
    "optical_depth",
    "transfer_function",
    "PulseConfig",
    "TimeGrid",
    "single_scatter_signal",
]
