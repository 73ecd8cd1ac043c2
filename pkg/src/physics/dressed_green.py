"""
Retarded Green's functions of the excited hyperfine manifold.

F=4 sublevels are not touched by the control and keep the bare propagator
1/(E - E_n + i gamma/2). For F in {3, 2, 1} the pi-polarized control couples
every sublevel with projection M to the same ground sublevel (F0=2, M), so
the sublevels sharing M form one block

    [(E - E_n + i gamma/2) delta_nn'' - V_n V_n''* / (E - omega_c - E_m')] G = 1

of dimension 3 (|M| <= 1), 2 (|M| = 2) or 1 (|M| = 3, undressed). Blocks are
solved densely per energy sample.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from src.models.levels import LevelId
from src.physics.atomic_data import TransitionTable, control_coupling
from src.utils.errors import DressedPoleError

logger = logging.getLogger(__name__)

# Imaginary shift standing in for the +i0 of the retarded prescription
DEFAULT_EPSILON = 1e-8

# |det A| below this marks a numerically singular block
DET_TOLERANCE = 1e-12

DRESSED_F = (3, 2, 1)


@dataclass(frozen=True)
class ControlField:
    """
    Stationary pi-polarized control field.

    Attributes:
        rabi: Omega_c on the reference transition, in gamma
        offset: omega_c - omega42 in gamma, where omega42 is the F0=2 -> F=4 frequency
        epsilon: imaginary energy shift realizing the retarded +i0
    """

    rabi: float = 0.0
    offset: float = -0.4
    epsilon: float = DEFAULT_EPSILON

    @property
    def enabled(self) -> bool:
        return self.rabi > 0.0

    def off(self) -> "ControlField":
        return ControlField(rabi=0.0, offset=self.offset, epsilon=self.epsilon)

    def frequency(self, table: TransitionTable) -> float:
        """Control frequency omega_c in the rotating frame of the level table."""
        upper = table.energy(LevelId.excited(4, 0))
        lower = table.energy(LevelId.ground(2, 0))
        return upper - lower + self.offset

    def coupling_pole(self, table: TransitionTable) -> float:
        """Energy at which E - omega_c - E_m' vanishes."""
        return self.frequency(table) + table.energy(LevelId.ground(2, 0))


@dataclass
class DressedGreenBlock:
    """Dressed propagator restricted to the excited sublevels sharing M."""

    M: int
    members: Tuple[LevelId, ...]
    gmatrix: np.ndarray
    energy: complex

    @property
    def dimension(self) -> int:
        return len(self.members)

    def element(self, n: LevelId, n2: LevelId) -> complex:
        i = self.members.index(n)
        j = self.members.index(n2)
        return complex(self.gmatrix[i, j])


@dataclass(frozen=True)
class QuasiEnergyPole:
    """Complex pole of one dressed block."""

    M: int
    energy: complex
    narrow: bool

    @property
    def position(self) -> float:
        return float(self.energy.real)

    @property
    def width(self) -> float:
        """Full width at half maximum, -2 Im E."""
        return float(-2.0 * self.energy.imag)


def bare_green(E: complex, n: LevelId, table: Optional[TransitionTable] = None, gamma: float = 1.0) -> complex:
    """Undressed propagator 1/(E - E_n + i gamma/2) in units of 1/gamma."""
    table = table or TransitionTable.default()
    return 1.0 / (E - table.energy(n) + 0.5j * gamma)


@lru_cache(maxsize=None)
def block_members(M: int) -> Tuple[LevelId, ...]:
    """Control-coupled excited sublevels with projection M, ordered F = 3, 2, 1."""
    return tuple(LevelId.excited(F, M) for F in DRESSED_F if abs(M) <= F)


def block_matrix(
    E: np.ndarray,
    energies: Sequence[float],
    couplings: Sequence[complex],
    pole: float,
    gamma: float = 1.0,
) -> np.ndarray:
    """
    Left-hand matrix A(E) of the dressed block equations, broadcast over E.

    Returns:
        Array of shape E.shape + (k, k)
    """
    E = np.asarray(E, dtype=complex)
    energies = np.asarray(energies, dtype=float)
    V = np.asarray(couplings, dtype=complex)
    k = len(energies)

    diagonal = E[..., None] - energies + 0.5j * gamma
    A = np.zeros(E.shape + (k, k), dtype=complex)
    idx = np.arange(k)
    A[..., idx, idx] = diagonal
    if np.any(V != 0):
        denominator = E - pole
        if np.any(denominator == 0):
            raise DressedPoleError(
                "energy sits exactly on the control coupling pole; evaluate at E + i*epsilon"
            )
        A -= np.outer(V, np.conj(V)) / denominator[..., None, None]
    return A


def solve_block(A: np.ndarray, tolerance: float = DET_TOLERANCE) -> np.ndarray:
    """Invert a stack of block matrices, refusing numerically singular ones."""
    det = np.linalg.det(A)
    if np.any(np.abs(det) < tolerance):
        worst = float(np.min(np.abs(det)))
        raise DressedPoleError(
            f"dressed block is singular (|det| = {worst:.3e}); shift the energy by +i*epsilon"
        )
    identity = np.broadcast_to(np.eye(A.shape[-1], dtype=complex), A.shape)
    return np.linalg.solve(A, identity)


def block_couplings(M: int, control: ControlField) -> np.ndarray:
    return np.array([control_coupling(n, control.rabi) for n in block_members(M)], dtype=complex)


def dressed_block(
    E: complex,
    M: int,
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> DressedGreenBlock:
    """
    Dressed Green's-function block for projection M at complex energy E.

    Raises:
        DressedPoleError: E on the coupling pole or on a dressed resonance
    """
    table = table or TransitionTable.default()
    members = block_members(M)
    if not members:
        raise ValueError(f"no control-coupled excited sublevel has M={M}")
    energies = [table.energy(n) for n in members]
    A = block_matrix(
        np.asarray(E, dtype=complex),
        energies,
        block_couplings(M, control),
        control.coupling_pole(table),
    )
    G = solve_block(A)
    return DressedGreenBlock(M=M, members=members, gmatrix=G, energy=complex(E))


def excited_green(
    E: np.ndarray,
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> np.ndarray:
    """
    Full excited-manifold propagator over an energy grid.

    Returns:
        Array G[w, n, n'] indexed by ``table.excited`` order
    """
    table = table or TransitionTable.default()
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    index = table.excited_index()
    size = len(table.excited)
    G = np.zeros((E.size, size, size), dtype=complex)

    for n in table.excited:
        if int(round(n.F)) == 4:
            i = index[n]
            G[:, i, i] = 1.0 / (E - table.energy(n) + 0.5j * table.gamma)

    pole = control.coupling_pole(table)
    for M in range(-3, 4):
        members = block_members(M)
        rows = np.array([index[n] for n in members])
        A = block_matrix(E, [table.energy(n) for n in members], block_couplings(M, control), pole, table.gamma)
        G[:, rows[:, None], rows[None, :]] = solve_block(A)
    return G


def at_resonances(
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> List[QuasiEnergyPole]:
    """
    Quasi-energy poles of every dressed block.

    Poles are the roots of (E - p) prod(E - c_n) - sum_n |V_n|^2 prod_{l != n}(E - c_l)
    with c_n = E_n - i gamma/2 and p the coupling pole. The pole closest to p in
    each block is the narrow control-induced resonance.
    """
    table = table or TransitionTable.default()
    pole = control.coupling_pole(table)
    result: List[QuasiEnergyPole] = []
    for M in range(-3, 4):
        members = block_members(M)
        V = block_couplings(M, control)
        if not np.any(V != 0):
            continue
        c = [table.energy(n) - 0.5j * table.gamma for n in members]
        characteristic = Polynomial.fromroots([pole] + c)
        for i, v in enumerate(V):
            others = [c[j] for j in range(len(c)) if j != i]
            characteristic = characteristic - abs(v) ** 2 * Polynomial.fromroots(others)
        roots = characteristic.roots()
        narrow = int(np.argmin(np.abs(roots - pole)))
        for j in np.argsort(roots.real):
            result.append(QuasiEnergyPole(M=M, energy=complex(roots[j]), narrow=bool(j == narrow)))
    return result


def narrow_resonance(
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> Tuple[float, float]:
    """
    Mean position and width of the narrow control-induced poles.

    Returns:
        (position, width) in gamma; (nan, nan) with the control off
    """
    poles = [p for p in at_resonances(control, table) if p.narrow]
    if not poles:
        return float("nan"), float("nan")
    position = float(np.mean([p.position for p in poles]))
    width = float(np.mean([p.width for p in poles]))
    logger.debug(f"[Dressed Green] Narrow resonance at {position:+.4f} with width {width:.4f}")
    return position, width


def at_width_scale(control: ControlField, table: Optional[TransitionTable] = None) -> float:
    """Order-of-magnitude AT bandwidth Omega_c^2 gamma / delta43^2."""
    table = table or TransitionTable.default()
    return control.rabi ** 2 * table.gamma / table.delta43 ** 2
