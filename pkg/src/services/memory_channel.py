"""
Memory Channel Service

Figures of merit of a single photon released from the memory through a
channel with loss (efficiency eta) and thermal noise (nbar photons per
mode): Wigner functions, photon-number statistics, the Werner weight of the
polarization qubit and two-photon anti-bunching at the Bell beamsplitter.

Wigner functions use the convention where the vacuum is (2/pi) exp(-2|a|^2)
and Tr(rho sigma) = pi int W_rho W_sigma d^2a.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import special
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from src.models.channel import ChannelState, FidelityClass, WernerState, WignerGrid
from src.models.signals import TimeSeries
from src.utils.errors import ContractViolation, ParameterError

logger = logging.getLogger(__name__)

CLASSICAL_BENCHMARK = 2.0 / 3.0
CLONING_BENCHMARK = 5.0 / 6.0

NORMALIZATION_TOLERANCE = 1e-6
WAVEPACKET_TOLERANCE = 1e-6

DEFAULT_EXTENT = 4.0
DEFAULT_POINTS = 257
MAX_STEP = 0.05


def phase_space_grid(extent: float = DEFAULT_EXTENT, points: int = DEFAULT_POINTS) -> np.ndarray:
    """Symmetric axis [-extent, extent] with at least ``points`` samples and step <= 0.05."""
    if extent <= 0 or points < 3:
        raise ParameterError(f"invalid phase-space grid: extent={extent}, points={points}", "memory_channel")
    needed = int(math.ceil(2.0 * extent / MAX_STEP)) + 1
    points = max(points, needed)
    if points % 2 == 0:
        points += 1
    return np.linspace(-extent, extent, points)


def grid_extent(ch: ChannelState) -> float:
    """Half-width that contains the channel Gaussian to e^-20."""
    return max(DEFAULT_EXTENT, math.sqrt(20.0 * ch.variance))


def _radius_squared(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return x[:, None] ** 2 + p[None, :] ** 2


def wigner_single_photon(x: Optional[np.ndarray] = None, p: Optional[np.ndarray] = None) -> WignerGrid:
    """W(a) = (8/pi)(|a|^2 - 1/4) exp(-2|a|^2) of the one-photon Fock state."""
    x = phase_space_grid() if x is None else np.asarray(x, dtype=float)
    p = x if p is None else np.asarray(p, dtype=float)
    r2 = _radius_squared(x, p)
    values = (8.0 / math.pi) * (r2 - 0.25) * np.exp(-2.0 * r2)
    return WignerGrid(x=x, p=p, values=values)


def wigner_channel_values(r2: np.ndarray, ch: ChannelState) -> np.ndarray:
    """Output Wigner function of the lossy, noisy single-photon channel at |a|^2 = r2."""
    s = ch.variance
    bracket = ch.eta * r2 / (4.0 * s * s) - 0.25 + (ch.nbar + 0.5 * (1.0 - ch.eta)) / (2.0 * s)
    return (4.0 / (math.pi * s)) * bracket * np.exp(-r2 / s)


def wigner_channel(
    ch: ChannelState,
    x: Optional[np.ndarray] = None,
    p: Optional[np.ndarray] = None,
) -> WignerGrid:
    """
    Wigner function after loss and thermal noise.

    Reduces to the single-photon function at (eta, nbar) = (1, 0) and to the
    thermal Gaussian of variance nbar + 1/2 at eta = 0. The grid default grows
    with the Gaussian width; a failed normalization is logged, never rescaled.
    """
    x = phase_space_grid(grid_extent(ch)) if x is None else np.asarray(x, dtype=float)
    p = x if p is None else np.asarray(p, dtype=float)
    grid = WignerGrid(x=x, p=p, values=wigner_channel_values(_radius_squared(x, p), ch))
    norm = grid.normalization
    if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
        logger.warning(
            f"[Memory] Wigner normalization {norm:.9f} at eta={ch.eta}, nbar={ch.nbar} misses 1 by more than "
            f"{NORMALIZATION_TOLERANCE:g}"
        )
    return grid


def fock_wigner(n: int, r2: np.ndarray) -> np.ndarray:
    """W_n(a) = (2/pi)(-1)^n L_n(4|a|^2) exp(-2|a|^2)."""
    return (2.0 / math.pi) * (-1.0) ** n * special.eval_laguerre(n, 4.0 * r2) * np.exp(-2.0 * r2)


def _thermal(n: np.ndarray, nbar: float) -> np.ndarray:
    return nbar ** n / (nbar + 1.0) ** (n + 1)


def _signal(n: np.ndarray, nbar: float) -> np.ndarray:
    """n nbar^(n-1) / (nbar+1)^(n+2); zero at n = 0."""
    safe = np.maximum(n - 1, 0)
    return np.where(n > 0, n * nbar ** safe / (nbar + 1.0) ** (n + 2), 0.0)


@dataclass
class PhotonNumberDistribution:
    """P(n) for n = 0..n_max and the probability left beyond n_max."""

    probabilities: np.ndarray
    signal: np.ndarray
    tail: float

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.probabilities.size)

    @property
    def noise(self) -> np.ndarray:
        return self.probabilities - self.signal

    @property
    def mean(self) -> float:
        return float(np.sum(self.n * self.probabilities))


def photon_number_distribution(ch: ChannelState, n_max: int = 20) -> PhotonNumberDistribution:
    """
    Closed-form photon statistics of the channel output.

    The output is the mixture (1 - eta) thermal + eta (photon-added thermal);
    the signal part counts events where the released photon is among the n.
    """
    if n_max < 2:
        raise ParameterError(f"n_max must be >= 2, got {n_max}", "memory_channel")
    n = np.arange(n_max + 1)
    nbar = ch.nbar
    thermal = _thermal(n, nbar)
    added = nbar * _thermal(n, nbar) / (nbar + 1.0) + _signal(n, nbar)
    probabilities = (1.0 - ch.eta) * thermal + ch.eta * added
    signal = ch.eta * _signal(n, nbar)
    tail = max(0.0, 1.0 - float(probabilities.sum()))
    return PhotonNumberDistribution(probabilities=probabilities, signal=signal, tail=tail)


def photon_number_by_quadrature(ch: ChannelState, n_max: int = 6, grid: Optional[WignerGrid] = None) -> np.ndarray:
    """P(n) = pi int W W_n d^2a on the phase-space grid."""
    grid = grid or wigner_channel(ch)
    r2 = _radius_squared(grid.x, grid.p)
    result = np.empty(n_max + 1)
    for n in range(n_max + 1):
        integrand = grid.values * fock_wigner(n, r2)
        result[n] = math.pi * trapezoid(trapezoid(integrand, grid.p, axis=1), grid.x)
    return result


def signal_noise_split(ch: ChannelState, n: int) -> Dict[str, float]:
    """Signal and noise-only probabilities at photon number n and the conditional signal share."""
    dist = photon_number_distribution(ch, max(n, 2))
    total = float(dist.probabilities[n])
    signal = float(dist.signal[n])
    return {
        "probability": total,
        "signal": signal,
        "noise": total - signal,
        "signal_fraction": signal / total if total > 0 else 0.0,
    }


def werner_from_channel(ch: ChannelState, psi: Sequence[complex] = (1.0, 0.0)) -> WernerState:
    """
    Werner weight from the one-photon events of the channel.

    A one-photon click carries the stored polarization with the signal share
    and a random polarization otherwise.
    """
    split = signal_noise_split(ch, 1)
    x = min(1.0, max(0.0, split["signal_fraction"]))
    return WernerState(x=x, psi=tuple(complex(c) for c in psi))


def werner_density_matrix(w: WernerState) -> np.ndarray:
    return w.density_matrix


def werner_fidelity(w: WernerState) -> float:
    """F = <psi|rho|psi> = x + (1 - x)/2."""
    v = w.vector
    return float(np.real(np.conj(v) @ w.density_matrix @ v))


def benchmark_comparison(fidelity: float) -> FidelityClass:
    """
    Place a fidelity against the measure-and-resend (2/3) and optimal-cloning (5/6) bounds.

    A fidelity equal to a bound counts as not exceeding it.
    """
    if not 0.0 <= fidelity <= 1.0:
        raise ParameterError(f"fidelity must lie in [0, 1], got {fidelity}", "memory_channel")
    if fidelity <= CLASSICAL_BENCHMARK:
        return FidelityClass.BELOW_CLASSICAL
    if fidelity <= CLONING_BENCHMARK:
        return FidelityClass.BETWEEN
    return FidelityClass.ABOVE_CLONING


def fidelity_sweep(xs: Optional[Sequence[float]] = None) -> Dict[str, np.ndarray]:
    """Fidelity against Werner weight with the benchmark lines."""
    xs = np.linspace(0.0, 1.0, 101) if xs is None else np.asarray(xs, dtype=float)
    fidelity = np.array([werner_fidelity(WernerState(x=float(x))) for x in xs])
    return {
        "x": xs,
        "fidelity": fidelity,
        "classical": np.full_like(xs, CLASSICAL_BENCHMARK),
        "cloning": np.full_like(xs, CLONING_BENCHMARK),
    }


def gaussian_wavepacket(t: np.ndarray, t0: float, sigma: float, label: str = "") -> TimeSeries:
    """Normalized temporal mode with intensity standard deviation sigma."""
    if sigma <= 0:
        raise ParameterError(f"wavepacket width must be positive, got {sigma}", "memory_channel")
    t = np.asarray(t, dtype=float)
    values = (2.0 * math.pi * sigma ** 2) ** -0.25 * np.exp(-((t - t0) ** 2) / (4.0 * sigma ** 2))
    return TimeSeries(t=t, values=values.astype(complex), label=label or f"gaussian t0={t0:g}")


def _norm(wp: TimeSeries) -> float:
    return float(trapezoid(np.abs(wp.values) ** 2, wp.t))


def stretch(wp: TimeSeries, factor: float) -> TimeSeries:
    """
    Slow the read-out: widen the wavepacket about its centroid by ``factor``.

    a'(t) = a(tc + (t - tc)/factor) / sqrt(factor) keeps the norm.
    """
    if factor <= 0:
        raise ParameterError(f"stretch factor must be positive, got {factor}", "memory_channel")
    weights = np.abs(wp.values) ** 2
    centre = float(trapezoid(wp.t * weights, wp.t) / trapezoid(weights, wp.t))
    source = centre + (wp.t - centre) / factor
    inside = (source >= wp.t[0]) & (source <= wp.t[-1])
    values = np.asarray(wp.values, dtype=complex)
    resampled = np.zeros_like(values)
    # Linear interpolation would shift the norm by ~dt^2; splines keep it to ~dt^4
    for part, unit in ((values.real, 1.0), (values.imag, 1j)):
        resampled[inside] += unit * CubicSpline(wp.t, part)(source[inside])
    return TimeSeries(t=wp.t, values=resampled / math.sqrt(factor), label=f"{wp.label} x{factor:g}")


def hom_coincidence(wavepacket_a: TimeSeries, wavepacket_b: TimeSeries) -> float:
    """
    Coincidence probability of two single photons on a 50:50 beamsplitter.

    P = (1 - |<a|b>|^2) / 2; identical modes give perfect anti-bunching.

    Raises:
        ContractViolation: grids differ or a wavepacket is not normalized
    """
    if wavepacket_a.t.shape != wavepacket_b.t.shape or not np.allclose(wavepacket_a.t, wavepacket_b.t):
        raise ContractViolation("wavepackets must share one time grid", "memory_channel")
    for wp in (wavepacket_a, wavepacket_b):
        norm = _norm(wp)
        if abs(norm - 1.0) > WAVEPACKET_TOLERANCE:
            raise ContractViolation(f"wavepacket '{wp.label}' has norm {norm:.8f}, expected 1", "memory_channel")
    overlap = trapezoid(np.conj(wavepacket_a.values) * wavepacket_b.values, wavepacket_a.t)
    return float(0.5 * (1.0 - min(1.0, abs(overlap) ** 2)))


@dataclass
class ChannelAnalysisConfig:
    """Settings of a channel analysis."""

    n_max: int = 20
    grid_points: int = DEFAULT_POINTS
    quadrature_check: bool = True
    quadrature_orders: int = 6


@dataclass
class ChannelReport:
    """Everything the memory scenario writes for one (eta, nbar)."""

    channel: ChannelState
    wigner: WignerGrid
    photons: PhotonNumberDistribution
    werner: WernerState
    fidelity: float
    classification: FidelityClass
    quadrature: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def normalization(self) -> float:
        return self.wigner.normalization

    @property
    def quadrature_deviation(self) -> Optional[float]:
        if self.quadrature is None:
            return None
        closed = self.photons.probabilities[: self.quadrature.size]
        return float(np.max(np.abs(closed - self.quadrature)))


class MemoryChannelAnalyzer:
    """
    Evaluates the memory read-out channel.

    Usage:
        analyzer = MemoryChannelAnalyzer()
        report = analyzer.analyze(ChannelState(eta=1.0, nbar=1.0))
    """

    def __init__(self, config: Optional[ChannelAnalysisConfig] = None):
        self.config = config or ChannelAnalysisConfig()
        self._logger = logger

    def analyze(self, ch: ChannelState, psi: Sequence[complex] = (1.0, 0.0)) -> ChannelReport:
        axis = phase_space_grid(grid_extent(ch), self.config.grid_points)
        wigner = wigner_channel(ch, axis)
        photons = photon_number_distribution(ch, self.config.n_max)
        werner = werner_from_channel(ch, psi)
        fidelity = werner_fidelity(werner)
        report = ChannelReport(
            channel=ch,
            wigner=wigner,
            photons=photons,
            werner=werner,
            fidelity=fidelity,
            classification=benchmark_comparison(fidelity),
        )

        norm = wigner.normalization
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            report.warnings.append(f"Wigner normalization {norm:.9f} deviates from 1")
        if self.config.quadrature_check:
            report.quadrature = photon_number_by_quadrature(ch, self.config.quadrature_orders, wigner)
            deviation = report.quadrature_deviation
            if deviation is not None and deviation > 1e-6:
                message = f"phase-space P(n) differs from the closed form by {deviation:.2e}"
                self._logger.warning(f"[Memory] {message}")
                report.warnings.append(message)

        self._logger.info(
            f"[Memory] eta={ch.eta:g} nbar={ch.nbar:g}: x={werner.x:.6f}, F={fidelity:.6f} "
            f"({report.classification.value})"
        )
        return report
