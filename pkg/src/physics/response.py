"""
Mesoscopic susceptibility and single-atom scattering tensors.

Both quantities are contractions of the excited-state propagator with the
dipole vectors,

    alpha_ij^(m''m)(w) = - sum_{n n'} <m''|d_i|n> G_nn'(w + E_m + i eps) <n'|d_j|m>

and the susceptibility per unit density is the average of the diagonal
(m'' = m) tensors over the equally populated F0=3 sublevels. Units are
hbar = gamma = 1 and lambdabar = 1, so chi is reported in n0 lambdabar^3 and
cross sections in lambdabar^2.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import curve_fit

from src.models.levels import LevelId
from src.models.optics import ScatteringAmplitude, ScatteringChannel, SusceptibilityTensor
from src.physics.angular import spherical_basis
from src.physics.atomic_data import TransitionTable
from src.physics.dressed_green import ControlField, excited_green
from src.utils.errors import ContractViolation

logger = logging.getLogger(__name__)

POPULATED_F0 = 3

# Transversality tolerance for polarization vectors
TRANSVERSE_TOLERANCE = 1e-9


def green_contraction(
    G: np.ndarray,
    D_out: np.ndarray,
    D_in: np.ndarray,
    diagonal: bool = False,
) -> np.ndarray:
    """
    Contract propagators with dipole vectors.

    Args:
        G: propagators [w, n, n']
        D_out: emission dipoles <n|d|m''> as [n, m'', 3]
        D_in: absorption dipoles <n'|d|m> as [n', m, 3]
        diagonal: keep only m'' = m (D_out and D_in must then share the m axis)

    Returns:
        alpha[w, m'', m, i, j], or alpha[w, m, i, j] when ``diagonal``
    """
    absorbed = np.einsum("wnk,kmj->wnmj", G, D_in, optimize=True)
    if diagonal:
        return -np.einsum("nmi,wnmj->wmij", np.conj(D_out), absorbed, optimize=True)
    return -np.einsum("nsi,wnmj->wsmij", np.conj(D_out), absorbed, optimize=True)


def _energies(delta: np.ndarray, control: ControlField) -> np.ndarray:
    # Initial states all sit in F0=3 at zero energy of the rotating frame
    return np.atleast_1d(np.asarray(delta, dtype=float)) + 1j * control.epsilon


def scattering_tensor_grid(
    delta: np.ndarray,
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> np.ndarray:
    """
    Scattering tensors from every F0=3 sublevel to every ground sublevel.

    Returns:
        alpha[w, m'', m, i, j] with m'' over ``table.ground`` and m over F0=3
    """
    table = table or TransitionTable.default()
    G = excited_green(_energies(delta, control), control, table)
    D = table.dipole_array()
    initial = list(table.manifold_members(POPULATED_F0))
    return green_contraction(G, D, D[:, initial, :])


def susceptibility_grid(
    delta: np.ndarray,
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> np.ndarray:
    """
    Cartesian susceptibility tensor per unit density over a detuning grid.

    Returns:
        chi[w, i, j] in units of n0 lambdabar^3
    """
    table = table or TransitionTable.default()
    G = excited_green(_energies(delta, control), control, table)
    D = table.dipole_array()[:, list(table.manifold_members(POPULATED_F0)), :]
    per_state = green_contraction(G, D, D, diagonal=True)
    return per_state.mean(axis=1)


def susceptibility(
    delta: float,
    control: ControlField,
    cloud_density: float = 1.0,
    table: Optional[TransitionTable] = None,
) -> SusceptibilityTensor:
    """
    Susceptibility tensor at one detuning Delta = omega - omega43.

    ``cloud_density`` is n * lambdabar^3; the default of 1 reports chi in
    units of n0 lambdabar^3.
    """
    chi = cloud_density * susceptibility_grid(np.array([delta]), control, table)[0]
    return SusceptibilityTensor(
        detuning=float(delta),
        chi_perp=complex(chi[0, 0]),
        chi_par=complex(chi[2, 2]),
        cartesian=chi,
    )


def at_decomposition(
    delta: float,
    control: ControlField,
    cloud_density: float = 1.0,
    table: Optional[TransitionTable] = None,
) -> Tuple[complex, np.ndarray]:
    """
    Split chi into its isotropic control-free part and the AT correction.

    Returns:
        (chi0, chi_at) with chi_at = chi - chi0 * I as a 3x3 tensor
    """
    chi0 = susceptibility(delta, control.off(), cloud_density, table).chi_perp
    full = susceptibility(delta, control, cloud_density, table).cartesian
    return chi0, full - chi0 * np.eye(3)


def susceptibility_spectrum(
    delta: np.ndarray,
    control: ControlField,
    table: Optional[TransitionTable] = None,
) -> Dict[str, np.ndarray]:
    """Principal components and control-free reference over a grid."""
    chi = susceptibility_grid(delta, control, table)
    chi0 = susceptibility_grid(delta, control.off(), table)[:, 0, 0]
    return {
        "delta": np.asarray(delta, dtype=float),
        "chi_perp": chi[:, 0, 0],
        "chi_par": chi[:, 2, 2],
        "chi0": chi0,
    }


def scattering_tensor(
    omega: float,
    m: LevelId,
    control: ControlField,
    table: Optional[TransitionTable] = None,
    threshold: float = 1e-14,
) -> List[ScatteringAmplitude]:
    """
    All non-vanishing amplitudes alpha_pq^(m''m)(omega) in the cyclic basis.

    ``omega`` is the detuning of the incident light from omega43.
    """
    table = table or TransitionTable.default()
    if not m.is_ground or int(round(m.F)) != POPULATED_F0:
        raise ContractViolation(f"initial state must belong to F0={POPULATED_F0}, got {m}", "response")

    alpha = scattering_tensor_grid(np.array([omega]), control, table)[0]
    initial = list(table.manifold_members(POPULATED_F0))
    column = initial.index(table.ground_index()[m])
    basis = spherical_basis()

    amplitudes: List[ScatteringAmplitude] = []
    for s, final in enumerate(table.ground):
        tensor = alpha[s, column]
        # alpha_pq = e_p* . alpha . e_q
        cyclic = np.conj(basis) @ tensor @ basis.T
        channel = ScatteringChannel.classify(m, final)
        shift = table.energy(m) - table.energy(final)
        for p in (-1, 0, 1):
            for q in (-1, 0, 1):
                value = complex(cyclic[p + 1, q + 1])
                if abs(value) > threshold:
                    amplitudes.append(
                        ScatteringAmplitude(
                            initial=m,
                            final=final,
                            in_pol=q,
                            out_pol=p,
                            amplitude=value,
                            channel=channel,
                            out_frequency_shift=shift,
                        )
                    )
    return amplitudes


def amplitudes_to_tensors(amplitudes: Sequence[ScatteringAmplitude]) -> Dict[LevelId, np.ndarray]:
    """Rebuild Cartesian tensors alpha = sum_pq e_p alpha_pq e_q^dagger per final state."""
    basis = spherical_basis()
    tensors: Dict[LevelId, np.ndarray] = {}
    for amp in amplitudes:
        tensor = tensors.setdefault(amp.final, np.zeros((3, 3), dtype=complex))
        tensor += amp.amplitude * np.outer(basis[amp.out_pol + 1], np.conj(basis[amp.in_pol + 1]))
    return tensors


def _check_transverse(direction: np.ndarray, polarization: np.ndarray, what: str) -> None:
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise ContractViolation(f"{what} direction must be a unit vector", "response")
    if abs(np.dot(direction, polarization)) > TRANSVERSE_TOLERANCE:
        raise ContractViolation(f"{what} polarization is not transverse to its direction", "response")


def differential_cross_section(
    amplitudes: Sequence[ScatteringAmplitude],
    in_dir: np.ndarray,
    out_dir: np.ndarray,
    in_pol: np.ndarray,
    out_pol: np.ndarray,
) -> float:
    """
    d sigma / d Omega = sum_m'' |e'* . alpha^(m''m) . e|^2 with k = 1.

    Integrated over angles, output polarizations and final states this
    reproduces the extinction 4 pi Im(e* . alpha^(mm) . e) at Omega_c = 0.

    Raises:
        ContractViolation: polarization not transverse to its direction
    """
    in_dir = np.asarray(in_dir, dtype=float)
    out_dir = np.asarray(out_dir, dtype=float)
    e_in = np.asarray(in_pol, dtype=complex)
    e_out = np.asarray(out_pol, dtype=complex)
    _check_transverse(in_dir, e_in, "incident")
    _check_transverse(out_dir, e_out, "scattered")

    total = 0.0
    for tensor in amplitudes_to_tensors(amplitudes).values():
        total += abs(np.conj(e_out) @ tensor @ e_in) ** 2
    return float(total)


def transverse_basis(direction: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Two real unit vectors spanning the plane transverse to ``direction``.

    The first is perpendicular to Z (the ordinary mode of the uniaxial
    medium); along Z the pair is (X, Y).
    """
    k = np.asarray(direction, dtype=float)
    k = k / np.linalg.norm(k)
    ordinary = np.cross([0.0, 0.0, 1.0], k)
    norm = np.linalg.norm(ordinary)
    if norm < 1e-12:
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]) * np.sign(k[2] or 1.0)
    ordinary = ordinary / norm
    extraordinary = np.cross(k, ordinary)
    return ordinary, extraordinary


def total_scattering_cross_section(
    amplitudes: Sequence[ScatteringAmplitude],
    in_dir: np.ndarray,
    in_pol: np.ndarray,
    n_theta: int = 48,
    n_phi: int = 96,
) -> float:
    """Angle- and polarization-integrated cross section by Gauss-Legendre x trapezoid quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    d_phi = 2.0 * np.pi / n_phi
    total = 0.0
    for cos_t, w in zip(nodes, weights):
        sin_t = math.sqrt(max(0.0, 1.0 - cos_t ** 2))
        for phi in phis:
            out_dir = np.array([sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t])
            for e_out in transverse_basis(out_dir):
                total += w * d_phi * differential_cross_section(amplitudes, in_dir, out_dir, in_pol, e_out)
    return float(total)


def extinction_cross_section(
    delta: float,
    polarization: np.ndarray,
    control: ControlField,
    m: Optional[LevelId] = None,
    table: Optional[TransitionTable] = None,
) -> float:
    """
    Optical-theorem extinction 4 pi Im(e* . alpha^(mm) . e).

    Averaged over the F0=3 sublevels when ``m`` is None.
    """
    table = table or TransitionTable.default()
    e = np.asarray(polarization, dtype=complex)
    if m is None:
        chi = susceptibility_grid(np.array([delta]), control, table)[0]
        return float(4.0 * np.pi * (np.conj(e) @ chi @ e).imag)
    alpha = scattering_tensor_grid(np.array([delta]), control, table)[0]
    s = table.ground_index()[m]
    column = list(table.manifold_members(POPULATED_F0)).index(s)
    return float(4.0 * np.pi * (np.conj(e) @ alpha[s, column] @ e).imag)


@lru_cache(maxsize=8)
def _sigma0(table_source: str) -> float:
    table = TransitionTable.default() if table_source == "default" else TransitionTable.load(table_source)
    return extinction_cross_section(0.0, np.array([1.0, 0.0, 0.0]), ControlField(), table=table)


def sigma0(table: Optional[TransitionTable] = None) -> float:
    """
    Resonant extinction cross section at the F0=3 -> F=4 peak without control.

    Defined through n0 sigma0 = 2 Im k, i.e. sigma0 = 4 pi Im chi per unit density.
    """
    if table is None or table is TransitionTable.default():
        return _sigma0("default")
    return extinction_cross_section(0.0, np.array([1.0, 0.0, 0.0]), ControlField(), table=table)


def complex_wavenumber(chi: np.ndarray) -> np.ndarray:
    """k / k0 = sqrt(1 + 4 pi chi) for a local susceptibility chi (Gaussian units)."""
    return np.sqrt(1.0 + 4.0 * np.pi * np.asarray(chi, dtype=complex))


def extinction_coefficient(chi: np.ndarray) -> np.ndarray:
    """Intensity extinction 2 Im k in units of 1/lambdabar."""
    return 2.0 * complex_wavenumber(chi).imag


# ---------------------------------------------------------------------------
# Spectral analysis helpers
# ---------------------------------------------------------------------------


def refined_grid(base: np.ndarray, centre: float, half_width: float, factor: int = 8) -> np.ndarray:
    """Insert a ``factor`` times denser sub-grid across [centre - half_width, centre + half_width]."""
    base = np.asarray(base, dtype=float)
    step = float(np.min(np.diff(base))) / factor
    lo, hi = centre - half_width, centre + half_width
    fine = np.arange(lo, hi + 0.5 * step, step)
    return np.unique(np.concatenate([base[(base < lo) | (base > hi)], fine]))


def _tail_integral(x: np.ndarray, edge: float) -> np.ndarray:
    """Integral of 1/(y^2 (y - x)) for y from ``edge`` > 0 to infinity."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3 * edge
    safe = np.where(small, 1.0, x)
    exact = -np.log1p(-safe / edge) / safe ** 2 - 1.0 / (safe * edge)
    series = 1.0 / (2.0 * edge ** 2) + x / (3.0 * edge ** 3) + x ** 2 / (4.0 * edge ** 4)
    return np.where(small, series, exact)


def kramers_kronig(
    delta: np.ndarray,
    chi_imag: np.ndarray,
    at: Optional[np.ndarray] = None,
    chi_imag_at: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Real part of chi from its imaginary part, chi'(x) = (1/pi) P int chi''(y)/(y - x) dy.

    The principal value is handled by subtracting chi''(x) and adding its
    analytic log integral; the parts of the integral beyond the grid use a
    C/y^2 tail fitted to the end points.

    Args:
        delta: sorted detuning grid (must straddle zero)
        chi_imag: chi'' sampled on ``delta``
        at: evaluation points inside the grid (defaults to ``delta``)
        chi_imag_at: chi'' at ``at`` (interpolated when omitted)
    """
    y = np.asarray(delta, dtype=float)
    f = np.asarray(chi_imag, dtype=float)
    x = y if at is None else np.atleast_1d(np.asarray(at, dtype=float))
    fx = np.interp(x, y, f) if chi_imag_at is None else np.asarray(chi_imag_at, dtype=float)
    slope = np.gradient(f, y)
    a, b = y[0], y[-1]

    result = np.empty(x.shape, dtype=float)
    for i, (xi, fi) in enumerate(zip(x, fx)):
        gap = y - xi
        coincident = np.abs(gap) < 1e-12
        integrand = np.where(coincident, np.interp(xi, y, slope), (f - fi) / np.where(coincident, 1.0, gap))
        inner = trapezoid(integrand, y) + fi * math.log((b - xi) / (xi - a))
        upper = f[-1] * b ** 2 * _tail_integral(np.array([xi]), b)[0]
        lower = -f[0] * a ** 2 * _tail_integral(np.array([-xi]), -a)[0]
        result[i] = (inner + upper + lower) / math.pi
    return result


@dataclass
class LorentzianFit:
    """Lorentzian peak with a linear baseline."""

    centre: float
    fwhm: float
    height: float
    offset: float
    slope: float


def _lorentzian(x, centre, fwhm, height, offset, slope):
    half = 0.5 * fwhm
    return height * half ** 2 / ((x - centre) ** 2 + half ** 2) + offset + slope * (x - centre)


def fit_lorentzian(
    delta: np.ndarray,
    values: np.ndarray,
    centre: float,
    half_window: float,
    width_guess: float = 1.0,
) -> LorentzianFit:
    """Least-squares Lorentzian-plus-line fit within ``half_window`` of ``centre``."""
    delta = np.asarray(delta, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = np.abs(delta - centre) <= half_window
    x, y = delta[mask], values[mask]
    peak = int(np.argmax(np.abs(y)))
    guess = [x[peak], width_guess, y[peak] - np.median(y), float(np.median(y)), 0.0]
    params, _ = curve_fit(_lorentzian, x, y, p0=guess, maxfev=20000)
    fit = LorentzianFit(*[float(p) for p in params])
    fit.fwhm = abs(fit.fwhm)
    return fit
