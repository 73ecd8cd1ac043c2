"""
Single-vertex scattering kernels for the diffusion Monte Carlo.

A kernel supplies the per-density susceptibility seen by each propagation
mode and samples what happens at a vertex. Everything is importance-sampled
at the carrier frequency; the frequency dependence travels with the path as
amplitude ratios f(omega) / f(carrier).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Type

import numpy as np

from src.models.optics import ScatteringChannel
from src.physics.atomic_data import TransitionTable
from src.physics.dressed_green import ControlField
from src.physics.medium import mode_susceptibility, mode_transfer
from src.physics.response import (
    POPULATED_F0,
    scattering_tensor_grid,
    susceptibility_grid,
    transverse_basis,
)
from src.utils.errors import ComputationError, ParameterError

logger = logging.getLogger(__name__)

# Total dipole scattering cross section is (8 pi / 3) |alpha . e|^2 for k = 1
DIPOLE_TOTAL = 8.0 * math.pi / 3.0


def uniform_direction(rng: np.random.Generator) -> np.ndarray:
    """Isotropically distributed unit vector."""
    cos_t = 2.0 * rng.random() - 1.0
    phi = 2.0 * math.pi * rng.random()
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    return np.array([sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t])


@dataclass
class VertexSample:
    """Outcome of one scattering event."""

    initial: int
    final: int
    direction: np.ndarray
    polarization: np.ndarray
    ratio: np.ndarray  # f(omega) / f(carrier) on the band
    albedo: float
    inelastic: bool
    induced_carrier: Optional[np.ndarray] = None  # alpha . e at the carrier
    induced_band: Optional[np.ndarray] = None  # alpha . e on the band, shape (w, 3)


@dataclass
class Emission:
    """Probability per steradian of leaving a vertex in one polarization mode."""

    polarization: np.ndarray
    probability: float
    ratio: np.ndarray


class ScatteringKernel(ABC):
    """
    Base class for vertex kernels.

    ``bind`` must be called with the band of detunings and the carrier before
    any other method; afterwards the kernel is read-only and may be shared
    between worker threads.
    """

    name: str = "base"
    display_name: str = "Base"

    def __init__(self):
        self.omega: Optional[np.ndarray] = None
        self.carrier: Optional[float] = None

    def bind(self, omega: np.ndarray, carrier: float) -> "ScatteringKernel":
        self.omega = np.asarray(omega, dtype=float)
        self.carrier = float(carrier)
        self._prepare()
        return self

    @abstractmethod
    def _prepare(self) -> None:
        """Precompute band and carrier quantities."""

    @abstractmethod
    def modes(self, direction: np.ndarray) -> Tuple[np.ndarray, ...]:
        """Propagation eigenmodes for a direction."""

    @abstractmethod
    def chi_mode(self, mode: np.ndarray) -> np.ndarray:
        """Per-density susceptibility of a mode on the band."""

    @abstractmethod
    def chi_mode_carrier(self, mode: np.ndarray) -> complex:
        """Per-density susceptibility of a mode at the carrier."""

    @abstractmethod
    def sample_vertex(self, direction: np.ndarray, polarization: np.ndarray, rng: np.random.Generator) -> VertexSample:
        """Draw the scattering outcome for light arriving in ``polarization``."""

    @abstractmethod
    def emission(self, vertex: VertexSample, direction: np.ndarray) -> List[Emission]:
        """Emission into ``direction`` for the channel already chosen at ``vertex``."""

    def extinction(self, mode: np.ndarray) -> float:
        """Extinction cross section 4 pi Im chi_e at the carrier."""
        return float(4.0 * math.pi * self.chi_mode_carrier(mode).imag)

    def transfer(self, mode: np.ndarray, column: float) -> Tuple[np.ndarray, float]:
        """Band transfer across a column and its carrier modulus."""
        band = mode_transfer(self.chi_mode(mode), column)
        carrier = abs(complex(mode_transfer(self.chi_mode_carrier(mode), column)))
        return band, carrier

    def describe(self) -> Dict[str, object]:
        return {"kernel": self.name}


class AtomicKernel(ScatteringKernel):
    """
    85Rb scattering from the equally populated F0=3 sublevels.

    The atom state m is drawn in proportion to its scattering cross section
    for the incoming polarization, the final state m'' in proportion to its
    share, the direction from the dipole pattern |v|^2 - |k.v|^2 of the
    induced dipole v = alpha . e, and the output mode in proportion to
    |e'* . v|^2. The walker weight is multiplied by the albedo
    sigma_sc / sigma_ext of the medium.
    """

    name = "atomic"
    display_name = "85Rb D2 (dressed)"

    def __init__(self, control: Optional[ControlField] = None, table: Optional[TransitionTable] = None):
        super().__init__()
        self.control = control or ControlField()
        self.table = table or TransitionTable.default()
        initial = self.table.manifold_members(POPULATED_F0)
        # Channel of every (final, initial) pair
        self._channels = [
            [ScatteringChannel.classify(self.table.ground[m], final) for m in initial] for final in self.table.ground
        ]
        self._inelastic = np.array([[not c.is_elastic for c in row] for row in self._channels])

    def _prepare(self) -> None:
        self._alpha_band = scattering_tensor_grid(self.omega, self.control, self.table)
        self._alpha_carrier = scattering_tensor_grid(np.array([self.carrier]), self.control, self.table)[0]
        self._chi_band = susceptibility_grid(self.omega, self.control, self.table)
        self._chi_carrier = susceptibility_grid(np.array([self.carrier]), self.control, self.table)[0]
        logger.debug(f"[Kernel] Atomic kernel bound to {self.omega.size} bins around {self.carrier:+.4f}")

    def modes(self, direction: np.ndarray) -> Tuple[np.ndarray, ...]:
        return transverse_basis(direction)

    def chi_mode(self, mode: np.ndarray) -> np.ndarray:
        return mode_susceptibility(self._chi_band, mode)

    def chi_mode_carrier(self, mode: np.ndarray) -> complex:
        return complex(mode_susceptibility(self._chi_carrier, mode))

    def _induced(self, polarization: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        induced = self._alpha_carrier @ np.asarray(polarization, dtype=complex)
        strength = np.sum(np.abs(induced) ** 2, axis=-1)
        return induced, strength

    def channel_probabilities(self, polarization: np.ndarray) -> Dict[str, float]:
        """Probability of each channel class at a vertex, for the given incoming polarization."""
        _, strength = self._induced(polarization)
        total = strength.sum()
        if total <= 0:
            raise ComputationError("zero scattering cross section at vertex", "diffuse_mc")
        result = {c.value: 0.0 for c in ScatteringChannel}
        for s, row in enumerate(self._channels):
            for col, channel in enumerate(row):
                result[channel.value] += float(strength[s, col] / total)
        return result

    def sample_vertex(self, direction: np.ndarray, polarization: np.ndarray, rng: np.random.Generator) -> VertexSample:
        induced, strength = self._induced(polarization)
        per_state = strength.sum(axis=0)
        total = per_state.sum()
        if total <= 0:
            raise ComputationError("zero scattering cross section at vertex", "diffuse_mc")
        albedo = DIPOLE_TOTAL * per_state.mean() / self.extinction(polarization)

        m = int(rng.choice(per_state.size, p=per_state / total))
        column = strength[:, m]
        s = int(rng.choice(column.size, p=column / column.sum()))
        v = induced[s, m]
        norm2 = float(np.sum(np.abs(v) ** 2))

        while True:
            k = uniform_direction(rng)
            if rng.random() * norm2 <= norm2 - abs(k @ v) ** 2:
                break

        modes = self.modes(k)
        weights = np.array([abs(e @ v) ** 2 for e in modes])
        pick = int(rng.choice(len(modes), p=weights / weights.sum()))
        e_out = modes[pick]

        band = self._alpha_band[:, s, m] @ np.asarray(polarization, dtype=complex)
        ratio = (band @ e_out) / (v @ e_out)
        return VertexSample(
            initial=m,
            final=s,
            direction=k,
            polarization=e_out,
            ratio=ratio,
            albedo=float(albedo),
            inelastic=bool(self._inelastic[s, m]),
            induced_carrier=v,
            induced_band=band,
        )

    def emission(self, vertex: VertexSample, direction: np.ndarray) -> List[Emission]:
        v = vertex.induced_carrier
        norm2 = float(np.sum(np.abs(v) ** 2))
        result = []
        for e in self.modes(direction):
            amplitude = complex(e @ v)
            if abs(amplitude) ** 2 < 1e-24 * norm2:
                continue
            result.append(
                Emission(
                    polarization=e,
                    probability=abs(amplitude) ** 2 / (DIPOLE_TOTAL * norm2),
                    ratio=(vertex.induced_band @ e) / amplitude,
                )
            )
        return result

    def describe(self) -> Dict[str, object]:
        return {"kernel": self.name, "rabi": self.control.rabi, "offset": self.control.offset}


class IsotropicKernel(ScatteringKernel):
    """
    Synthetic scalar two-level scatterer with isotropic phase function and unit albedo.

    With ``linewidth`` None the response is flat in frequency, which makes the
    run directly comparable to monochromatic transport integrals.
    """

    name = "isotropic"
    display_name = "Isotropic two-level"

    def __init__(self, cross_section: float = 1.0, linewidth: Optional[float] = None, resonance: float = 0.0):
        super().__init__()
        if cross_section <= 0:
            raise ParameterError(f"cross section must be positive, got {cross_section}", "diffuse_mc")
        if linewidth is not None and linewidth <= 0:
            raise ParameterError(f"linewidth must be positive, got {linewidth}", "diffuse_mc")
        self.cross_section = float(cross_section)
        self.linewidth = linewidth
        self.resonance = float(resonance)

    def _profile(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        if self.linewidth is None:
            return np.ones_like(omega, dtype=complex)
        half = 0.5 * self.linewidth
        return half / (half - 1j * (omega - self.resonance))

    def _prepare(self) -> None:
        self._line_band = self._profile(self.omega)
        self._line_carrier = complex(self._profile(np.array([self.carrier]))[0])

    def modes(self, direction: np.ndarray) -> Tuple[np.ndarray, ...]:
        return (transverse_basis(direction)[0],)

    def chi_mode(self, mode: np.ndarray) -> np.ndarray:
        return 1j * self.cross_section / (4.0 * math.pi) * self._line_band

    def chi_mode_carrier(self, mode: np.ndarray) -> complex:
        return 1j * self.cross_section / (4.0 * math.pi) * self._line_carrier

    def sample_vertex(self, direction: np.ndarray, polarization: np.ndarray, rng: np.random.Generator) -> VertexSample:
        k = uniform_direction(rng)
        return VertexSample(
            initial=0,
            final=0,
            direction=k,
            polarization=self.modes(k)[0],
            ratio=self._line_band / self._line_carrier,
            albedo=1.0,
            inelastic=False,
        )

    def emission(self, vertex: VertexSample, direction: np.ndarray) -> List[Emission]:
        return [
            Emission(
                polarization=self.modes(direction)[0],
                probability=1.0 / (4.0 * math.pi),
                ratio=self._line_band / self._line_carrier,
            )
        ]

    def describe(self) -> Dict[str, object]:
        return {"kernel": self.name, "cross_section": self.cross_section, "linewidth": self.linewidth}


class KernelRegistry:
    """Registry of scattering kernels by name."""

    _registry: Dict[str, Type[ScatteringKernel]] = {
        "atomic": AtomicKernel,
        "isotropic": IsotropicKernel,
    }

    @classmethod
    def get(cls, name: str) -> Type[ScatteringKernel]:
        try:
            return cls._registry[name.lower()]
        except KeyError:
            raise ParameterError(f"unknown scattering kernel '{name}' (have {sorted(cls._registry)})", "diffuse_mc")

    @classmethod
    def create(cls, name: str, **kwargs) -> ScatteringKernel:
        return cls.get(name)(**kwargs)

    @classmethod
    def register(cls, name: str, kernel_class: Type[ScatteringKernel]) -> None:
        cls._registry[name.lower()] = kernel_class

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(cls._registry)
