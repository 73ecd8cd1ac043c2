"""
Cloud geometry, column densities and ray transfer functions.

The susceptibility is linear in density, so along a ray only the column
density N = int n ds matters: a principal polarization mode e picks up

    T_e(omega) = exp(2 pi i chi_e(omega) N)

with chi_e = e . chi . e per unit density. This is the dilute-gas
linearization k - 1 = 2 pi chi of k = sqrt(1 + 4 pi chi); the intensity
optical depth is 4 pi Im chi_e N.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Type, Union

import numpy as np
from scipy import integrate, special

from src.physics.atomic_data import TransitionTable
from src.physics.dressed_green import ControlField
from src.physics.response import sigma0 as resonant_cross_section
from src.physics.response import susceptibility_grid, transverse_basis
from src.utils.errors import ParameterError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


class DensityProfile(ABC):
    """
    Atomic density n(r) in 1/lambdabar^3 with analytic ray integrals.

    Subclasses provide the column density from a point along a direction and
    its inverse, which the Monte-Carlo free-path sampling relies on.
    """

    name: str = "base"
    display_name: str = "Base"

    @abstractmethod
    def density(self, r: np.ndarray) -> np.ndarray:
        """Density at positions r[..., 3]."""

    @abstractmethod
    def column_density(self, origin: np.ndarray, direction: np.ndarray, s_max: float = math.inf) -> float:
        """int_0^s_max n(origin + s * direction) ds."""

    @abstractmethod
    def path_for_column(self, origin: np.ndarray, direction: np.ndarray, column: float) -> float:
        """Distance s at which the column density reaches ``column``, or inf if it never does."""

    @abstractmethod
    def entry_point(self, transverse: np.ndarray) -> np.ndarray:
        """Launch point of an input ray travelling along +Y with X-Z offset ``transverse``."""

    def to_dict(self) -> Dict[str, object]:
        return {"profile": self.name}


class GaussianProfile(DensityProfile):
    """Spherical Gaussian n(r) = n0 exp(-r^2 / 2 r0^2)."""

    name = "gaussian"
    display_name = "Gaussian cloud"

    # Launch distance in units of r0; the column density behind it is e^-32 of the peak
    ENTRY_DISTANCE = 8.0

    def __init__(self, n0: float, r0: float):
        if n0 <= 0 or r0 <= 0:
            raise ParameterError(f"Gaussian profile needs n0 > 0 and r0 > 0, got n0={n0}, r0={r0}", "medium")
        self.n0 = float(n0)
        self.r0 = float(r0)

    def density(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.n0 * np.exp(-np.sum(r * r, axis=-1) / (2.0 * self.r0 ** 2))

    def _chord(self, origin: np.ndarray, direction: np.ndarray) -> Tuple[float, float]:
        """Scale factor and starting argument of the erfc form of the chord integral."""
        origin = np.asarray(origin, dtype=float)
        u = np.asarray(direction, dtype=float)
        s0 = float(origin @ u)
        rho2 = max(0.0, float(origin @ origin) - s0 * s0)
        scale = self.n0 * math.exp(-rho2 / (2.0 * self.r0 ** 2)) * self.r0 * math.sqrt(math.pi / 2.0)
        return scale, s0 / (SQRT2 * self.r0)

    def column_density(self, origin: np.ndarray, direction: np.ndarray, s_max: float = math.inf) -> float:
        scale, a0 = self._chord(origin, direction)
        if math.isinf(s_max):
            return scale * float(special.erfc(a0))
        a1 = a0 + s_max / (SQRT2 * self.r0)
        return scale * float(special.erfc(a0) - special.erfc(a1))

    def path_for_column(self, origin: np.ndarray, direction: np.ndarray, column: float) -> float:
        scale, a0 = self._chord(origin, direction)
        remaining = float(special.erfc(a0)) - column / scale if scale > 0 else 0.0
        if remaining <= 0.0:
            return math.inf
        a1 = float(special.erfcinv(remaining))
        return max(0.0, (a1 - a0) * SQRT2 * self.r0)

    def entry_point(self, transverse: np.ndarray) -> np.ndarray:
        x, z = transverse
        return np.array([x, -self.ENTRY_DISTANCE * self.r0, z])

    @property
    def total_atoms(self) -> float:
        """int n d^3r = (2 pi)^(3/2) n0 r0^3."""
        return (2.0 * math.pi) ** 1.5 * self.n0 * self.r0 ** 3

    def to_dict(self) -> Dict[str, object]:
        return {"profile": self.name, "n0": self.n0, "r0": self.r0}


class UniformSlab(DensityProfile):
    """Constant density between the planes y = 0 and y = thickness, unbounded in X and Z."""

    name = "slab"
    display_name = "Uniform slab"

    def __init__(self, density: float, thickness: float):
        if density <= 0 or thickness <= 0:
            raise ParameterError(
                f"slab needs positive density and thickness, got {density}, {thickness}", "medium"
            )
        self.n = float(density)
        self.thickness = float(thickness)

    def density(self, r: np.ndarray) -> np.ndarray:
        y = np.asarray(r, dtype=float)[..., 1]
        return np.where((y >= 0.0) & (y <= self.thickness), self.n, 0.0)

    def _inside_interval(self, origin: np.ndarray, direction: np.ndarray) -> Tuple[float, float]:
        """Ray parameters [s_in, s_out] spent inside the slab (empty when s_in >= s_out)."""
        y, uy = float(origin[1]), float(direction[1])
        if abs(uy) < 1e-15:
            return (0.0, math.inf) if 0.0 <= y <= self.thickness else (0.0, 0.0)
        s_a = (0.0 - y) / uy
        s_b = (self.thickness - y) / uy
        lo, hi = min(s_a, s_b), max(s_a, s_b)
        return max(lo, 0.0), max(hi, 0.0)

    def column_density(self, origin: np.ndarray, direction: np.ndarray, s_max: float = math.inf) -> float:
        s_in, s_out = self._inside_interval(origin, direction)
        length = max(0.0, min(s_out, s_max) - s_in)
        return self.n * length

    def path_for_column(self, origin: np.ndarray, direction: np.ndarray, column: float) -> float:
        s_in, s_out = self._inside_interval(origin, direction)
        s = s_in + column / self.n
        return s if s < s_out else math.inf

    def entry_point(self, transverse: np.ndarray) -> np.ndarray:
        x, z = transverse
        return np.array([x, 0.0, z])

    def to_dict(self) -> Dict[str, object]:
        return {"profile": self.name, "density": self.n, "thickness": self.thickness}


class ProfileRegistry:
    """Registry of density profiles available to the diffusion run."""

    _registry: Dict[str, Type[DensityProfile]] = {
        "gaussian": GaussianProfile,
        "slab": UniformSlab,
    }

    @classmethod
    def get(cls, name: str) -> Type[DensityProfile]:
        try:
            return cls._registry[name.lower()]
        except KeyError:
            raise ParameterError(f"unknown density profile '{name}' (have {sorted(cls._registry)})", "medium")

    @classmethod
    def register(cls, name: str, profile_class: Type[DensityProfile]) -> None:
        cls._registry[name.lower()] = profile_class

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(cls._registry)


@dataclass(frozen=True)
class CloudConfig:
    """
    Spherical Gaussian cloud.

    Attributes:
        n0: peak density in 1/lambdabar^3
        r0: Gaussian radius in lambdabar
        sigma0: resonant cross section in lambdabar^2
    """

    n0: float
    r0: float
    sigma0: float = field(default_factory=resonant_cross_section)

    def __post_init__(self) -> None:
        if self.n0 <= 0 or self.r0 <= 0:
            raise ParameterError(f"cloud needs n0 > 0 and r0 > 0, got n0={self.n0}, r0={self.r0}", "medium")

    @classmethod
    def from_b0(cls, b0: float, r0: float, sigma0: Optional[float] = None) -> "CloudConfig":
        """Derive n0 from the peak optical depth b0 = sqrt(2 pi) sigma0 n0 r0."""
        if b0 <= 0:
            raise ParameterError(f"optical depth b0 must be positive, got {b0}", "medium")
        sigma = resonant_cross_section() if sigma0 is None else sigma0
        return cls(n0=b0 / (math.sqrt(2.0 * math.pi) * sigma * r0), r0=r0, sigma0=sigma)

    @property
    def b0(self) -> float:
        return math.sqrt(2.0 * math.pi) * self.sigma0 * self.n0 * self.r0

    @property
    def mean_free_path(self) -> float:
        """Resonant free path l0 = 1/(n0 sigma0) at the cloud centre."""
        return 1.0 / (self.n0 * self.sigma0)

    @property
    def profile(self) -> GaussianProfile:
        return GaussianProfile(self.n0, self.r0)


ProfileLike = Union[CloudConfig, DensityProfile]


def _profile(cloud: ProfileLike) -> DensityProfile:
    return cloud.profile if isinstance(cloud, CloudConfig) else cloud


def _unit(direction: np.ndarray) -> np.ndarray:
    u = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ParameterError("ray direction must be non-zero", "medium")
    return u / norm


def density(r: np.ndarray, cloud: ProfileLike) -> np.ndarray:
    """Atomic density at r, in 1/lambdabar^3."""
    return _profile(cloud).density(r)


def column_density(
    origin: np.ndarray,
    direction: np.ndarray,
    cloud: ProfileLike,
    s_max: float = math.inf,
) -> float:
    """Analytic column density along a ray."""
    return _profile(cloud).column_density(np.asarray(origin, dtype=float), _unit(direction), s_max)


def column_density_quad(
    origin: np.ndarray,
    direction: np.ndarray,
    cloud: ProfileLike,
    s_max: float = math.inf,
    epsrel: float = 1e-12,
) -> float:
    """Column density by adaptive quadrature, as a cross-check of the analytic form."""
    profile = _profile(cloud)
    origin = np.asarray(origin, dtype=float)
    u = _unit(direction)

    def integrand(s: float) -> float:
        return float(profile.density(origin + s * u))

    points = None
    if isinstance(profile, UniformSlab):
        s_in, s_out = profile._inside_interval(origin, u)
        if s_out <= s_in:
            return 0.0
        return integrate.quad(integrand, s_in, min(s_out, s_max), epsabs=0.0, epsrel=epsrel)[0]
    if isinstance(profile, GaussianProfile):
        # Split at the closest approach so quad sees the peak
        s0 = float(-(origin @ u))
        if 0.0 < s0 < s_max:
            points = s0
    if points is not None:
        first = integrate.quad(integrand, 0.0, points, epsabs=0.0, epsrel=epsrel, limit=200)[0]
        second = integrate.quad(integrand, points, s_max, epsabs=0.0, epsrel=epsrel, limit=200)[0]
        return first + second
    return integrate.quad(integrand, 0.0, s_max, epsabs=0.0, epsrel=epsrel, limit=200)[0]


def free_path_for_depth(
    origin: np.ndarray,
    direction: np.ndarray,
    cloud: ProfileLike,
    depth: float,
    cross_section: float,
) -> float:
    """
    Distance at which the optical depth reaches ``depth`` for a given cross section.

    Returns inf when the ray leaves the medium first.
    """
    if cross_section <= 0:
        return math.inf
    return _profile(cloud).path_for_column(np.asarray(origin, dtype=float), _unit(direction), depth / cross_section)


@dataclass
class ModeTransfer:
    """
    Transfer of the two principal polarization modes across one segment.

    Attributes:
        modes: (ordinary, extraordinary) real unit vectors
        values: complex transfer per mode, shape (w, 2)
        column: column density of the segment
    """

    modes: Tuple[np.ndarray, np.ndarray]
    values: np.ndarray
    column: float

    def apply(self, polarization: np.ndarray) -> np.ndarray:
        """Transmitted field vectors (w, 3) for an input polarization."""
        e = np.asarray(polarization, dtype=complex)
        out = np.zeros((self.values.shape[0], 3), dtype=complex)
        for j, mode in enumerate(self.modes):
            out += np.outer(self.values[:, j] * (mode @ e), mode)
        return out

    def for_polarization(self, polarization: np.ndarray) -> np.ndarray:
        """Co-polarized transfer e* . T . e per frequency."""
        e = np.asarray(polarization, dtype=complex)
        return self.apply(e) @ np.conj(e)


def eigenmodes(direction: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Principal polarization modes of the uniaxial medium for a propagation direction."""
    return transverse_basis(_unit(direction))


def mode_susceptibility(chi: np.ndarray, mode: np.ndarray) -> np.ndarray:
    """chi_e = e . chi . e for chi of shape (..., 3, 3) and a real mode vector."""
    return np.einsum("i,...ij,j->...", mode, np.asarray(chi), mode)


def mode_transfer(chi_mode: np.ndarray, column: float) -> np.ndarray:
    """exp(2 pi i chi_e N) for per-density susceptibility chi_e."""
    return np.exp(2j * np.pi * np.asarray(chi_mode) * column)


def _chi_grid(delta: np.ndarray, control: ControlField, table: Optional[TransitionTable]) -> np.ndarray:
    return susceptibility_grid(np.atleast_1d(np.asarray(delta, dtype=float)), control, table)


def optical_depth(
    origin: np.ndarray,
    direction: np.ndarray,
    cloud: ProfileLike,
    delta: float,
    polarization: Optional[np.ndarray] = None,
    control: Optional[ControlField] = None,
    table: Optional[TransitionTable] = None,
) -> Union[float, Tuple[float, float]]:
    """
    Intensity optical depth 4 pi Im chi_e N from ``origin`` to infinity.

    Returns the (ordinary, extraordinary) pair when ``polarization`` is None;
    otherwise the depth -ln(|T e|^2) seen by that polarization, which equals
    the mode depth for a principal polarization.
    """
    control = control or ControlField()
    u = _unit(direction)
    column = column_density(origin, u, cloud)
    chi = _chi_grid(delta, control, table)[0]
    modes = eigenmodes(u)
    depths = tuple(float(4.0 * np.pi * mode_susceptibility(chi, mode).imag * column) for mode in modes)
    if polarization is None:
        return depths
    e = np.asarray(polarization, dtype=complex)
    e = e / np.linalg.norm(e)
    transmitted = sum(abs(mode @ e) ** 2 * math.exp(-d) for mode, d in zip(modes, depths))
    return float(-math.log(transmitted))


def transfer_function(
    start: np.ndarray,
    end: np.ndarray,
    cloud: ProfileLike,
    delta: np.ndarray,
    control: Optional[ControlField] = None,
    table: Optional[TransitionTable] = None,
    chi: Optional[np.ndarray] = None,
    vacuum_phase: bool = False,
) -> ModeTransfer:
    """
    Frequency-resolved transfer of the principal modes across a segment.

    Args:
        start: segment start, or (origin, direction) for a ray to infinity
        end: segment end, or None
        cloud: density profile
        delta: detuning grid
        chi: per-density susceptibility (w, 3, 3) on ``delta`` (computed if omitted)
        vacuum_phase: include the free-space phase exp(i L) of a finite segment
    """
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if end is None:
        origin, direction = (np.asarray(v, dtype=float) for v in start)
        u = _unit(direction)
        length = math.inf
    else:
        origin = np.asarray(start, dtype=float)
        span = np.asarray(end, dtype=float) - origin
        length = float(np.linalg.norm(span))
        u = _unit(span) if length > 0 else np.array([0.0, 1.0, 0.0])

    column = column_density(origin, u, cloud, length) if length > 0 else 0.0
    if chi is None:
        chi = _chi_grid(delta, control or ControlField(), table)
    modes = eigenmodes(u)
    values = np.stack([mode_transfer(mode_susceptibility(chi, mode), column) for mode in modes], axis=-1)
    if vacuum_phase and math.isfinite(length):
        values = values * np.exp(1j * length)
    return ModeTransfer(modes=modes, values=values, column=column)


def group_delay(delta: np.ndarray, transfer: np.ndarray) -> np.ndarray:
    """d arg T / d omega; positive values delay the pulse for the exp(-i omega t) convention."""
    phase = np.unwrap(np.angle(np.asarray(transfer)))
    return np.gradient(phase, np.asarray(delta, dtype=float))
