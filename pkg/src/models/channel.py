"""Quantum-memory channel data types."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import trapezoid

from src.utils.errors import ParameterError


@dataclass(frozen=True)
class ChannelState:
    """Loss-and-noise channel: efficiency eta and mean thermal photons per mode."""

    eta: float
    nbar: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"efficiency eta must lie in [0, 1], got {self.eta}", "memory_channel")
        if self.nbar < 0.0:
            raise ParameterError(f"thermal occupancy nbar must be >= 0, got {self.nbar}", "memory_channel")

    @property
    def variance(self) -> float:
        """Quadrature variance of the output Gaussian, nbar + 1/2."""
        return self.nbar + 0.5


@dataclass
class WignerGrid:
    """Wigner function W(x + ip) sampled on a square (x, p) grid."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # indexed [ix, ip]

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def normalization(self) -> float:
        """Trapezoidal estimate of the phase-space integral."""
        return float(trapezoid(trapezoid(self.values, self.p, axis=1), self.x))

    def value_at_origin(self) -> float:
        ix = int(np.argmin(np.abs(self.x)))
        ip = int(np.argmin(np.abs(self.p)))
        return float(self.values[ix, ip])


@dataclass(frozen=True)
class WernerState:
    """x |psi><psi| + (1 - x)/2 I on a polarization qubit."""

    x: float
    psi: tuple = (1.0 + 0j, 0j)

    def __post_init__(self) -> None:
        if not 0.0 <= self.x <= 1.0:
            raise ParameterError(f"Werner weight must lie in [0, 1], got {self.x}", "memory_channel")
        norm = float(np.linalg.norm(np.asarray(self.psi, dtype=complex)))
        if abs(norm - 1.0) > 1e-9:
            raise ParameterError(f"polarization state must be normalized, |psi| = {norm}", "memory_channel")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.psi, dtype=complex)

    @property
    def density_matrix(self) -> np.ndarray:
        v = self.vector
        return self.x * np.outer(v, np.conj(v)) + 0.5 * (1.0 - self.x) * np.eye(2)


class FidelityClass(Enum):
    """Position of a fidelity relative to the classical and cloning benchmarks."""
    BELOW_CLASSICAL = "below_classical"
    BETWEEN = "between"
    ABOVE_CLONING = "above_cloning"
