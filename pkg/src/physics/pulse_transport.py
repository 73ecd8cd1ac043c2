"""
Signal pulse, FFT grids and single-scattering time traces.

Fourier convention: alpha(omega) = int alpha(t) exp(i omega t) dt and
alpha(t) = int alpha(omega) exp(-i omega t) d omega / 2 pi, with omega the
detuning from the F0=3 -> F=4 line in gamma and t in 1/gamma.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from src.models.optics import ScatteringChannel
from src.models.signals import Spectrum, TimeSeries
from src.physics.atomic_data import TransitionTable
from src.physics.dressed_green import ControlField, narrow_resonance
from src.physics.medium import CloudConfig, column_density, eigenmodes, mode_susceptibility, mode_transfer
from src.physics.response import POPULATED_F0, scattering_tensor_grid, susceptibility_grid
from src.utils.errors import ContractViolation, ParameterError

logger = logging.getLogger(__name__)

# Spectral bins below this fraction of the peak pulse amplitude are skipped
BAND_TOLERANCE = 1e-13

INPUT_DIRECTION = np.array([0.0, 1.0, 0.0])
INPUT_POLARIZATION = np.array([1.0, 0.0, 0.0])

DIRECTIONS: Dict[str, np.ndarray] = {
    "+X": np.array([1.0, 0.0, 0.0]),
    "-X": np.array([-1.0, 0.0, 0.0]),
    "+Y": np.array([0.0, 1.0, 0.0]),
    "-Y": np.array([0.0, -1.0, 0.0]),
    "+Z": np.array([0.0, 0.0, 1.0]),
    "-Z": np.array([0.0, 0.0, -1.0]),
}


def axis_direction(label: str) -> np.ndarray:
    """Unit vector for an axis label such as 'X', '+Y' or '-Z'."""
    key = label.strip().upper()
    if len(key) == 1:
        key = "+" + key
    if key not in DIRECTIONS:
        raise ContractViolation(
            f"direction '{label}' is not one of {sorted(DIRECTIONS)}; general directions are served by diffuse_mc",
            "pulse_transport",
        )
    return DIRECTIONS[key]


@dataclass(frozen=True)
class PulseConfig:
    """
    Gaussian signal pulse alpha(t) = 2/(2 pi T^2)^(1/4) exp[-i Delta t - 4 (t - T)^2 / T^2].

    Attributes:
        duration: T in 1/gamma, both the envelope scale and the arrival time
        detuning: carrier Delta = omega - omega43 in gamma
        aperture: radius of the flat input profile in units of r0
    """

    duration: float = 60.0
    detuning: float = 0.025
    aperture: float = 0.5

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ParameterError(f"pulse duration T must be positive, got {self.duration}", "pulse_transport")
        if self.aperture < 0:
            raise ParameterError(f"aperture must be non-negative, got {self.aperture}", "pulse_transport")

    @property
    def amplitude(self) -> float:
        return 2.0 / (2.0 * math.pi * self.duration ** 2) ** 0.25


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid t_k = t0 + k dt with its FFT frequency axis."""

    n: int
    dt: float
    t0: float

    @classmethod
    def for_pulse(
        cls,
        duration: float,
        samples: int = 2048,
        padding: int = 4,
        span: float = 8.0,
        start: float = -2.0,
    ) -> "TimeGrid":
        """
        Grid with ``samples`` points across ``span`` * T, padded ``padding`` times.

        The padding keeps delayed tails from wrapping around.
        """
        if samples < 2 or padding < 1:
            raise ParameterError(f"invalid grid: samples={samples}, padding={padding}", "pulse_transport")
        return cls(n=samples * padding, dt=span * duration / samples, t0=start * duration)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def omega(self) -> np.ndarray:
        """Angular frequencies in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.dt)

    @property
    def d_omega(self) -> float:
        return 2.0 * np.pi / (self.n * self.dt)

    def to_spectrum(self, values: np.ndarray) -> np.ndarray:
        """alpha(omega_j) = dt sum_k alpha(t_k) exp(i omega_j t_k)."""
        return self.dt * self.n * np.fft.ifft(values) * np.exp(1j * self.omega * self.t0)

    def to_time(self, spectrum: np.ndarray) -> np.ndarray:
        """Inverse of ``to_spectrum``."""
        return np.fft.fft(spectrum * np.exp(-1j * self.omega * self.t0)) / (self.n * self.dt)

    def energy_from_spectrum(self, spectrum: np.ndarray) -> float:
        """Parseval: sum |alpha(omega)|^2 d omega / 2 pi."""
        return float(np.sum(np.abs(spectrum) ** 2) * self.d_omega / (2.0 * np.pi))


def pulse_time(t: np.ndarray, cfg: PulseConfig, check_grid: bool = True) -> TimeSeries:
    """
    Pulse amplitude on a time grid, normalized to unit energy.

    Raises:
        ContractViolation: grid shorter than [0, 4T] or coarser than 2048 points
    """
    t = np.asarray(t, dtype=float)
    if check_grid and (t.size < 2048 or t[0] > 0.0 or t[-1] < 4.0 * cfg.duration):
        raise ContractViolation(
            f"pulse grid must cover [0, 4T] with >= 2048 points (got {t.size} points on [{t[0]:.1f}, {t[-1]:.1f}])",
            "pulse_transport",
        )
    T = cfg.duration
    values = cfg.amplitude * np.exp(-1j * cfg.detuning * t - 4.0 * (t - T) ** 2 / T ** 2)
    return TimeSeries(t=t, values=values, label="pulse", meta={"T": T, "detuning": cfg.detuning})


def pulse_spectrum(cfg: PulseConfig, omega: np.ndarray) -> Spectrum:
    """Analytic transform A e^{i(w - D)T} (sqrt(pi) T / 2) exp(-(w - D)^2 T^2 / 16)."""
    omega = np.asarray(omega, dtype=float)
    T = cfg.duration
    x = omega - cfg.detuning
    values = cfg.amplitude * 0.5 * math.sqrt(math.pi) * T * np.exp(1j * x * T - x ** 2 * T ** 2 / 16.0)
    return Spectrum(omega=omega, values=values, label="pulse")


def spectral_fwhm(cfg: PulseConfig) -> float:
    """Full width at half maximum of |alpha(omega)|, 8 sqrt(ln 2) / T."""
    return 8.0 * math.sqrt(math.log(2.0)) / cfg.duration


def storage_window_warning(cfg: PulseConfig, at_width: float, gamma: float = 1.0) -> Optional[str]:
    """Message when the pulse is not spectrally between the AT width and gamma."""
    width = spectral_fwhm(cfg)
    if at_width < width < gamma:
        return None
    message = (
        f"pulse spectral FWHM {width:.4f} is outside the storage window "
        f"({at_width:.4f}, {gamma:.4f})"
    )
    logger.warning(f"[Pulse] {message}")
    return message


def tuned_to_at(cfg: PulseConfig, control: ControlField, table: Optional[TransitionTable] = None) -> PulseConfig:
    """Copy of ``cfg`` with the carrier placed on the narrow control-induced resonance."""
    position, _ = narrow_resonance(control, table)
    if math.isnan(position):
        raise ParameterError("control is off; there is no AT resonance to tune to", "pulse_transport")
    logger.info(f"[Pulse] Carrier tuned to the AT resonance at {position:+.4f}")
    return replace(cfg, detuning=position)


def reference_trace(cfg: PulseConfig, grid: TimeGrid, scale: float = 1.0) -> TimeSeries:
    """Input pulse intensity scaled by ``scale``, the shadowed reference of the scattered traces."""
    pulse = pulse_time(grid.t, cfg, check_grid=False)
    return TimeSeries(t=grid.t, values=scale * pulse.intensity, label="reference", meta={"scale": scale})


def mean_arrival_time(ts: TimeSeries) -> float:
    """
    First moment int t I dt / int I dt.

    Raises:
        ContractViolation: series carries no energy
    """
    intensity = ts.intensity
    total = float(np.sum(intensity))
    if not total > 0.0:
        raise ContractViolation(f"mean arrival time of a zero-energy series '{ts.label}'", "pulse_transport")
    return float(np.sum(ts.t * intensity) / total)


def tail_fraction(ts: TimeSeries, t_cut: float) -> float:
    """Fraction of the energy arriving after ``t_cut``."""
    intensity = ts.intensity
    total = float(np.sum(intensity))
    if not total > 0.0:
        raise ContractViolation(f"tail fraction of a zero-energy series '{ts.label}'", "pulse_transport")
    return float(np.sum(intensity[ts.t > t_cut]) / total)


@dataclass
class SingleScatterResult:
    """Time traces of light scattered once at the cloud centre toward one axis."""

    direction: str
    control_on: bool
    traces: Dict[str, TimeSeries]
    # Channel energies before the output leg through the medium
    source_energies: Dict[str, float] = field(default_factory=dict)
    half_path_attenuation: float = 1.0
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def energies(self) -> Dict[str, float]:
        return {name: ts.energy for name, ts in self.traces.items()}

    @property
    def inelastic_ratio(self) -> float:
        """Inelastic over elastic energy at the detector."""
        energies = self.energies
        return energies["raman_inelastic"] / energies["elastic"]

    @property
    def source_inelastic_ratio(self) -> float:
        return self.source_energies["raman_inelastic"] / self.source_energies["elastic"]


def single_scatter_signal(
    direction: str,
    control: ControlField,
    pulse: PulseConfig,
    cloud: CloudConfig,
    grid: Optional[TimeGrid] = None,
    table: Optional[TransitionTable] = None,
    reference_scale: Optional[float] = None,
) -> SingleScatterResult:
    """
    Single scattering from the cloud centre, resolved by channel.

    The pulse enters along +Y polarized along X, crosses half the cloud,
    scatters once and leaves along ``direction``. Initial sublevels of F0=3
    are averaged incoherently; final sublevels and the two output principal
    polarizations are summed. Elastic channels cross the other half of the
    cloud; inelastic light is shifted by the ground splitting and leaves
    freely.

    Args:
        direction: axis label, one of +-X, +-Y, +-Z
        reference_scale: factor for the reference trace; defaults to the
            elastic energy so both traces share a scale

    Raises:
        ContractViolation: direction is not a coordinate axis
    """
    table = table or TransitionTable.default()
    k_out = axis_direction(direction)
    grid = grid or TimeGrid.for_pulse(pulse.duration)

    omega = grid.omega
    spectrum = pulse_spectrum(pulse, omega).values
    band = np.abs(spectrum) > BAND_TOLERANCE * np.abs(spectrum).max()
    w = omega[band]

    alpha = scattering_tensor_grid(w, control, table)
    chi = susceptibility_grid(w, control, table)

    centre = np.zeros(3)
    column_in = column_density(centre, -INPUT_DIRECTION, cloud)
    column_out = column_density(centre, k_out, cloud)
    transfer_in = mode_transfer(mode_susceptibility(chi, INPUT_POLARIZATION), column_in)
    source = spectrum[band] * transfer_in

    initial = table.manifold_members(POPULATED_F0)
    weight = 1.0 / len(initial)
    induced = np.einsum("bsmij,j->bsmi", alpha, INPUT_POLARIZATION.astype(complex))

    names = [c.value for c in ScatteringChannel]
    intensities = {name: np.zeros(grid.n) for name in names}
    source_energies = {name: 0.0 for name in names}
    full = np.zeros(grid.n, dtype=complex)

    for e_out in eigenmodes(k_out):
        transfer_out = mode_transfer(mode_susceptibility(chi, e_out), column_out)
        projected = induced @ e_out
        for col, m_index in enumerate(initial):
            m = table.ground[m_index]
            for s, final in enumerate(table.ground):
                f = projected[:, s, col]
                if np.max(np.abs(f)) < 1e-14:
                    continue
                channel = ScatteringChannel.classify(m, final)
                emitted = source * f
                source_energies[channel.value] += weight * grid.energy_from_spectrum(emitted)
                if channel.is_elastic:
                    emitted = emitted * transfer_out
                full[:] = 0.0
                full[band] = emitted
                intensities[channel.value] += weight * np.abs(grid.to_time(full)) ** 2

    t = grid.t
    meta = {"direction": direction, "control_on": control.enabled}
    traces = {name: TimeSeries(t=t, values=intensities[name], label=name, meta=meta) for name in names}
    elastic = intensities["rayleigh_elastic"] + intensities["raman_elastic"]
    traces["elastic"] = TimeSeries(t=t, values=elastic, label="elastic", meta=meta)
    source_energies["elastic"] = source_energies["rayleigh_elastic"] + source_energies["raman_elastic"]

    elastic_energy = traces["elastic"].energy
    scale = elastic_energy if reference_scale is None else reference_scale
    traces["reference"] = reference_trace(pulse, grid, scale)

    carrier = int(np.argmin(np.abs(w - pulse.detuning)))
    attenuation = float(np.abs(transfer_in[carrier]) ** 2)

    logger.debug(
        f"[Single Scatter] {direction} control={'on' if control.enabled else 'off'}: "
        f"elastic={elastic_energy:.3e} inelastic={traces['raman_inelastic'].energy:.3e}"
    )
    return SingleScatterResult(
        direction=direction,
        control_on=control.enabled,
        traces=traces,
        source_energies=source_energies,
        half_path_attenuation=attenuation,
        meta={"column_in": column_in, "column_out": column_out, "band_bins": int(band.sum())},
    )
