"""Result types of the optical response: susceptibility and scattering amplitudes."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .levels import LevelId


class ScatteringChannel(Enum):
    """Classification of a single-atom scattering event by its final state."""
    RAYLEIGH_ELASTIC = "rayleigh_elastic"  # m'' = m
    RAMAN_ELASTIC = "raman_elastic"  # m'' != m, same F0
    RAMAN_INELASTIC = "raman_inelastic"  # m'' in the other F0

    @property
    def is_elastic(self) -> bool:
        return self is not ScatteringChannel.RAMAN_INELASTIC

    @classmethod
    def classify(cls, initial: LevelId, final: LevelId) -> "ScatteringChannel":
        """Channel fixed entirely by the hyperfine manifolds of (m, m'')."""
        if final.F != initial.F:
            return cls.RAMAN_INELASTIC
        if final.M == initial.M:
            return cls.RAYLEIGH_ELASTIC
        return cls.RAMAN_ELASTIC


@dataclass
class SusceptibilityTensor:
    """
    Mesoscopic susceptibility in the principal frame (Z along the control).

    Values are per unit density, i.e. in units of n0 * lambdabar^3.
    """

    detuning: float
    chi_perp: complex
    chi_par: complex
    # Full Cartesian tensor, kept for basis-covariance checks
    cartesian: np.ndarray = field(repr=False, default=None)

    def __post_init__(self) -> None:
        if self.cartesian is None:
            self.cartesian = np.diag([self.chi_perp, self.chi_perp, self.chi_par]).astype(complex)

    @property
    def isotropic_part(self) -> complex:
        return (2.0 * self.chi_perp + self.chi_par) / 3.0

    @property
    def anisotropy(self) -> complex:
        return self.chi_par - self.chi_perp

    def rotate(self, rotation: np.ndarray) -> np.ndarray:
        """Cartesian tensor expressed in a frame rotated by ``rotation`` (3x3 orthogonal)."""
        return rotation @ self.cartesian @ rotation.T

    def project(self, polarization: np.ndarray) -> complex:
        """e* . chi . e for a unit polarization vector."""
        e = np.asarray(polarization, dtype=complex)
        return complex(np.conj(e) @ self.cartesian @ e)


@dataclass(frozen=True)
class ScatteringAmplitude:
    """One element alpha_{pq}^{(m''m)} of the single-atom scattering tensor."""

    initial: LevelId
    final: LevelId
    in_pol: int  # q in {-1, 0, +1}
    out_pol: int  # p in {-1, 0, +1}
    amplitude: complex
    channel: ScatteringChannel
    out_frequency_shift: float  # (E_m - E_m'') in units of gamma

    @property
    def strength(self) -> float:
        return abs(self.amplitude) ** 2
