"""
85Rb D2 hyperfine structure and dipole matrix elements.

Frequencies are in units of the natural linewidth gamma and energies in
hbar*gamma. Level energies live in the frame rotating at the F0=3 -> F=4
optical frequency: the excited F=4 level and the ground F0=3 level both sit
at zero, the other excited levels sit below by the excited splittings and
the ground F0=2 level sits at -delta_g.

Dipole elements follow the Wigner-Eckart factorization

    <F M|d_q|F0 M0> = (-1)^(F-M) (F 1 F0; -M q M0) <F||d||F0>
    <F||d||F0> = (-1)^(J+I+F0+1) sqrt((2F+1)(2F0+1)) {J F I; F0 J0 1} <J||d||J0>

with |<J||d||J0>|^2 = 3, so every excited sublevel has a summed squared
coupling of 3/4. Together with gamma = 4|d|^2 k^3/3 (k = 1 in lambdabar
units) this fixes the decay rate of each excited sublevel to gamma = 1.
"""

import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from src.models.levels import LevelId, ground_levels, excited_levels, EXCITED_F, GROUND_F
from src.physics.angular import wigner3j, wigner6j, spherical_vector
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

# Fine and nuclear angular momenta of the D2 line
J_GROUND = 0.5
J_EXCITED = 1.5
NUCLEAR_SPIN = 2.5

# |<J||d||J0>|^2 in units where each excited sublevel decays at gamma = 1
REDUCED_FINE_SQUARED = 3.0

# Default tabulated data (MHz)
DEFAULT_GAMMA_MHZ = 6.0666
DEFAULT_SPLITTINGS_MHZ: Dict[str, float] = {
    "delta43": 120.640,
    "delta32": 63.401,
    "delta21": 29.372,
    "delta_g": 3035.732,
}

DEFAULT_DATA_FILE = Path(__file__).resolve().parent.parent.parent / "data" / "rb85_d2.toml"

DipoleKey = Tuple[LevelId, LevelId, int]


@lru_cache(maxsize=None)
def dipole_matrix_element(n: LevelId, m: LevelId, q: int) -> float:
    """
    Reduced-units matrix element <n|d_q|m> for excited n and ground m.

    Zero unless M = M0 + q and |F - F0| <= 1.
    """
    if not (n.is_excited and m.is_ground):
        raise ValueError(f"dipole element needs an excited and a ground level, got {n}, {m}")
    if q not in (-1, 0, 1):
        raise ValueError(f"polarization index must be -1, 0 or +1, got {q}")
    F, M, F0, M0 = n.F, n.M, m.F, m.M
    if abs(M - (M0 + q)) > 1e-9 or abs(F - F0) > 1:
        return 0.0

    three_j = wigner3j(F, 1, F0, -M, q, M0)
    if three_j == 0.0:
        return 0.0
    six_j = wigner6j(J_EXCITED, F, NUCLEAR_SPIN, F0, J_GROUND, 1)
    reduced_hyperfine = (
        _parity(J_EXCITED + NUCLEAR_SPIN + F0 + 1)
        * math.sqrt((2 * F + 1) * (2 * F0 + 1))
        * six_j
        * math.sqrt(REDUCED_FINE_SQUARED)
    )
    return _parity(F - M) * three_j * reduced_hyperfine


def _parity(exponent: float) -> int:
    return -1 if int(round(exponent)) % 2 else 1


def dipole_vector(n: LevelId, m: LevelId) -> np.ndarray:
    """Cartesian complex vector <n|d|m> = sum_q <n|d_q|m> e_q*."""
    vector = np.zeros(3, dtype=complex)
    for q in (-1, 0, 1):
        d = dipole_matrix_element(n, m, q)
        if d:
            vector += d * np.conj(spherical_vector(q))
    return vector


def relative_strength(F: int, F0: int) -> float:
    """
    Hyperfine transition strength S_{F0 F} = (2F+1)(2J0+1){J J0 1; F0 F I}^2.

    Sums to one over excited F for fixed ground F0.
    """
    six_j = wigner6j(J_EXCITED, J_GROUND, 1, F0, F, NUCLEAR_SPIN)
    return (2 * F + 1) * (2 * J_GROUND + 1) * six_j ** 2


def control_coupling(n: LevelId, amplitude_scale: float) -> complex:
    """
    Coupling V_{nm'} of excited n to the pi-polarized control on m' = (F0=2, M).

    ``amplitude_scale`` is the Rabi frequency Omega_c; V is scaled so that
    Omega_c = 2|V| on the reference transition n = (3, 2), m' = (2, 2), with V
    real positive there. Uncoupled states (F = 4, |M| > 2) give 0.
    """
    if not n.is_excited:
        raise ValueError(f"control couples excited levels only, got {n}")
    if int(round(n.F)) not in (1, 2, 3) or abs(n.M) > 2:
        return 0j
    partner = LevelId.ground(2, n.M)
    d = dipole_matrix_element(n, partner, 0)
    return complex(0.5 * amplitude_scale * d / _reference_control_element())


@lru_cache(maxsize=1)
def _reference_control_element() -> float:
    return dipole_matrix_element(LevelId.excited(3, 2), LevelId.ground(2, 2), 0)


@dataclass(frozen=True)
class TransitionTable:
    """
    Level energies and dipole couplings of the 85Rb D2 line in gamma units.

    Immutable after construction.
    """

    energies: Dict[LevelId, float]
    dipole: Dict[DipoleKey, float]
    hyperfine_splittings: Dict[str, float]
    gamma: float = 1.0
    gamma_mhz: float = DEFAULT_GAMMA_MHZ
    source: str = "compiled-in defaults"
    ground: Tuple[LevelId, ...] = field(default_factory=ground_levels)
    excited: Tuple[LevelId, ...] = field(default_factory=excited_levels)

    def __post_init__(self) -> None:
        s = self.hyperfine_splittings
        if min(s.values()) <= 0:
            raise ConfigError(f"hyperfine splittings must be positive, got {s}", module="atomic_data")
        if not s["delta_g"] > s["delta43"] > s["delta32"] > s["delta21"]:
            raise ConfigError(
                "expected delta_g > delta43 > delta32 > delta21, got "
                + ", ".join(f"{k}={v:.4g}" for k, v in s.items()),
                module="atomic_data",
            )

    @classmethod
    def from_splittings(
        cls,
        splittings_mhz: Dict[str, float],
        gamma_mhz: float = DEFAULT_GAMMA_MHZ,
        source: str = "compiled-in defaults",
    ) -> "TransitionTable":
        """Build the table from splittings given in MHz."""
        missing = set(DEFAULT_SPLITTINGS_MHZ) - set(splittings_mhz)
        if missing:
            raise ConfigError(f"atomic data lacks splittings: {sorted(missing)}", module="atomic_data")
        if gamma_mhz <= 0:
            raise ConfigError(f"linewidth must be positive, got {gamma_mhz}", module="atomic_data")
        s = {key: float(splittings_mhz[key]) / gamma_mhz for key in DEFAULT_SPLITTINGS_MHZ}

        excited_energy = {
            4: 0.0,
            3: -s["delta43"],
            2: -s["delta43"] - s["delta32"],
            1: -s["delta43"] - s["delta32"] - s["delta21"],
        }
        ground_energy = {3: 0.0, 2: -s["delta_g"]}

        energies: Dict[LevelId, float] = {}
        for level in excited_levels():
            energies[level] = excited_energy[int(round(level.F))]
        for level in ground_levels():
            energies[level] = ground_energy[int(round(level.F))]

        dipole: Dict[DipoleKey, float] = {}
        for n in excited_levels():
            for m in ground_levels():
                for q in (-1, 0, 1):
                    d = dipole_matrix_element(n, m, q)
                    if d != 0.0:
                        dipole[(n, m, q)] = d

        return cls(
            energies=energies,
            dipole=dipole,
            hyperfine_splittings=s,
            gamma_mhz=float(gamma_mhz),
            source=source,
        )

    @classmethod
    def default(cls) -> "TransitionTable":
        return _default_table()

    @classmethod
    def load(cls, path: "str | Path") -> "TransitionTable":
        """
        Load splittings from a TOML file with [linewidth] and [splittings] tables.

        Raises:
            ConfigError: missing or malformed file
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"atomic data file not found: {path}", module="atomic_data")
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"malformed atomic data file {path}: {e}", module="atomic_data") from e

        gamma_mhz = float(data.get("linewidth", {}).get("gamma_mhz", DEFAULT_GAMMA_MHZ))
        raw = data.get("splittings", {})
        splittings = {key.removesuffix("_mhz"): float(value) for key, value in raw.items()}
        logger.debug(f"[Atomic Data] Loaded splittings from {path}")
        return cls.from_splittings(splittings, gamma_mhz=gamma_mhz, source=str(path))

    def energy(self, level: LevelId) -> float:
        return self.energies[level]

    def dipole_element(self, n: LevelId, m: LevelId, q: int) -> float:
        return self.dipole.get((n, m, q), 0.0)

    @property
    def delta43(self) -> float:
        return self.hyperfine_splittings["delta43"]

    @property
    def delta32(self) -> float:
        return self.hyperfine_splittings["delta32"]

    @property
    def delta21(self) -> float:
        return self.hyperfine_splittings["delta21"]

    @property
    def delta_g(self) -> float:
        return self.hyperfine_splittings["delta_g"]

    def resonance_detunings(self) -> Dict[int, float]:
        """Detuning Delta = omega - omega43 of each F0=3 -> F line."""
        return {F: self.energies[LevelId.excited(F, 0)] for F in EXCITED_F}

    def excited_index(self) -> Dict[LevelId, int]:
        return {level: i for i, level in enumerate(self.excited)}

    def ground_index(self) -> Dict[LevelId, int]:
        return {level: i for i, level in enumerate(self.ground)}

    def dipole_array(self) -> np.ndarray:
        """D[n, m, :] = <n|d|m> as Cartesian vectors, shape (excited, ground, 3)."""
        return _dipole_array(self.excited, self.ground)

    def manifold_members(self, F0: int) -> Tuple[int, ...]:
        """Indices into ``ground`` belonging to hyperfine level F0."""
        if F0 not in GROUND_F:
            raise ValueError(f"no ground level F0={F0}")
        return tuple(i for i, m in enumerate(self.ground) if int(round(m.F)) == F0)


@lru_cache(maxsize=4)
def _dipole_array(excited: Tuple[LevelId, ...], ground: Tuple[LevelId, ...]) -> np.ndarray:
    D = np.zeros((len(excited), len(ground), 3), dtype=complex)
    for i, n in enumerate(excited):
        for j, m in enumerate(ground):
            D[i, j] = dipole_vector(n, m)
    D.setflags(write=False)
    return D


@lru_cache(maxsize=1)
def _default_table() -> TransitionTable:
    override = os.getenv("COLDLIGHT_ATOMIC_DATA", "")
    if override:
        return TransitionTable.load(override)
    return TransitionTable.from_splittings(DEFAULT_SPLITTINGS_MHZ)
