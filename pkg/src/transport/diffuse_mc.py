"""
Monte-Carlo multiple scattering in the ladder approximation.

Each walker starts on the flat input aperture, moving along +Y, and follows
one zigzag path of atomic scatterers. Free paths, vertex channels and
directions are sampled at the carrier frequency. The path keeps a complex
transfer H(omega) over the pulse band holding the frequency dependence
relative to the carrier, so the escaped time signal of a path costs one
FFT: I(t) = w |F^-1[alpha(omega) H(omega)]|^2.

Three estimators are accumulated per scattering order:

- termination: the walker escapes and is scored once;
- expected escape: at the start of every leg the escape probability along
  the leg is scored as an energy (no time resolution);
- next event: from every vertex the signal toward fixed detector
  directions is scored per steradian.

Paths are processed in fixed chunks. Every path draws from its own Philox
stream keyed by (seed, path index) and chunk results are merged in chunk
order, so the accumulator does not depend on the number of workers.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special

from src.models.signals import TimeSeries
from src.physics.dressed_green import ControlField
from src.physics.medium import CloudConfig, DensityProfile, GaussianProfile
from src.physics.pulse_transport import (
    INPUT_DIRECTION,
    INPUT_POLARIZATION,
    PulseConfig,
    TimeGrid,
    axis_direction,
    pulse_spectrum,
)
from src.transport.kernels import AtomicKernel, ScatteringKernel
from src.transport.rng import path_generator, validate_seed
from src.utils.errors import EmptyAccumulatorError, ParameterError

logger = logging.getLogger(__name__)

ELASTIC = "elastic"
INELASTIC = "inelastic"
CLASSES = (ELASTIC, INELASTIC)

# Share of escaped energy that truncation may discard before a warning
OVERFLOW_WARNING_FRACTION = 0.01

Key = Tuple[int, str]


@dataclass(frozen=True)
class StorageGate:
    """
    Experimental hold of the AT-window spectral components.

    At vertex number ``after_order`` the components within ``window`` of
    ``centre`` are delayed by ``hold`` through exp(i omega hold).
    """

    enabled: bool = False
    hold: float = 0.0
    centre: float = 0.0
    window: float = 0.05
    after_order: int = 1

    def factor(self, omega: np.ndarray) -> np.ndarray:
        inside = np.abs(omega - self.centre) <= self.window
        return np.where(inside, np.exp(1j * omega * self.hold), 1.0)


@dataclass(frozen=True)
class DiffusionSettings:
    """Numerical settings of a diffusion run."""

    max_order: Optional[int] = None
    workers: int = 1
    chunk_size: int = 64
    roulette_threshold: float = 1e-12
    roulette_survival: float = 0.1
    detectors: Tuple[str, ...] = ("+X", "+Y", "+Z")
    band_halfwidth: float = 0.5
    grid_samples: int = 512
    grid_padding: int = 4
    storage_gate: StorageGate = field(default_factory=StorageGate)

    def __post_init__(self) -> None:
        if self.max_order is not None and self.max_order < 1:
            raise ParameterError(f"max_order must be >= 1, got {self.max_order}", "diffuse_mc")
        if self.workers < 1 or self.chunk_size < 1:
            raise ParameterError(
                f"workers and chunk_size must be positive, got {self.workers}, {self.chunk_size}", "diffuse_mc"
            )
        if not 0.0 < self.roulette_survival <= 1.0:
            raise ParameterError(f"roulette survival must lie in (0, 1], got {self.roulette_survival}", "diffuse_mc")


@dataclass
class PathChain:
    """One sampled zigzag path."""

    vertices: List[np.ndarray] = field(default_factory=list)
    transitions: List[Tuple[int, int]] = field(default_factory=list)
    polarizations: List[np.ndarray] = field(default_factory=list)
    weight: float = 1.0
    inelastic: bool = False
    escaped: bool = False
    truncated: bool = False

    @property
    def order(self) -> int:
        return len(self.vertices)

    @property
    def length(self) -> float:
        """Distance travelled between the first and the last vertex."""
        if len(self.vertices) < 2:
            return 0.0
        steps = np.diff(np.asarray(self.vertices), axis=0)
        return float(np.sum(np.linalg.norm(steps, axis=1)))


@dataclass
class OrderAccumulator:
    """
    Per-order sums over paths.

    Time signals are sums of w I(t); divide by ``n_paths`` for the mean
    per input pulse. Energies and first moments are kept per path for the
    Monte-Carlo errors.
    """

    t: np.ndarray
    input_energy: float = 1.0
    n_paths: int = 0
    intensity: Dict[Key, np.ndarray] = field(default_factory=dict)
    energy: Dict[Key, float] = field(default_factory=dict)
    energy_sq: Dict[Key, float] = field(default_factory=dict)
    moment: Dict[Key, float] = field(default_factory=dict)
    moment_sq: Dict[Key, float] = field(default_factory=dict)
    cross: Dict[Key, float] = field(default_factory=dict)
    counts: Dict[Key, int] = field(default_factory=dict)
    path_length: Dict[int, float] = field(default_factory=dict)
    expected: Dict[int, float] = field(default_factory=dict)
    expected_sq: Dict[int, float] = field(default_factory=dict)
    expected_total_sq: float = 0.0
    detector: Dict[Tuple[str, int, str], np.ndarray] = field(default_factory=dict)
    discarded_energy: float = 0.0
    truncated_paths: int = 0
    killed_paths: int = 0
    vertices: int = 0
    inelastic_vertices: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def orders(self) -> List[int]:
        return sorted({order for order, _ in self.energy} | set(self.expected))

    def add_termination(self, order: int, klass: str, intensity: np.ndarray, length: float) -> None:
        key = (order, klass)
        energy = float(np.sum(intensity) * self.dt)
        moment = float(np.sum(self.t * intensity) * self.dt)
        if key in self.intensity:
            self.intensity[key] += intensity
        else:
            self.intensity[key] = intensity.copy()
        self.energy[key] = self.energy.get(key, 0.0) + energy
        self.energy_sq[key] = self.energy_sq.get(key, 0.0) + energy * energy
        self.moment[key] = self.moment.get(key, 0.0) + moment
        self.moment_sq[key] = self.moment_sq.get(key, 0.0) + moment * moment
        self.cross[key] = self.cross.get(key, 0.0) + moment * energy
        self.counts[key] = self.counts.get(key, 0) + 1
        self.path_length[order] = self.path_length.get(order, 0.0) + length

    def add_expected(self, scores: Dict[int, float]) -> None:
        total = 0.0
        for order, value in scores.items():
            self.expected[order] = self.expected.get(order, 0.0) + value
            self.expected_sq[order] = self.expected_sq.get(order, 0.0) + value * value
            total += value
        self.expected_total_sq += total * total

    def add_detector(self, label: str, order: int, klass: str, intensity: np.ndarray) -> None:
        key = (label, order, klass)
        if key in self.detector:
            self.detector[key] += intensity
        else:
            self.detector[key] = intensity.copy()

    def merge(self, other: "OrderAccumulator") -> "OrderAccumulator":
        """Add ``other`` into this accumulator."""
        for name in ("intensity", "detector"):
            mine, theirs = getattr(self, name), getattr(other, name)
            for key, value in theirs.items():
                if key in mine:
                    mine[key] += value
                else:
                    mine[key] = value.copy()
        for name in ("energy", "energy_sq", "moment", "moment_sq", "cross", "counts", "path_length", "expected", "expected_sq"):
            mine, theirs = getattr(self, name), getattr(other, name)
            for key, value in theirs.items():
                mine[key] = mine.get(key, 0) + value
        for name in (
            "n_paths",
            "expected_total_sq",
            "discarded_energy",
            "truncated_paths",
            "killed_paths",
            "vertices",
            "inelastic_vertices",
        ):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.warnings.extend(w for w in other.warnings if w not in self.warnings)
        return self

    def order_intensity(self, order: int, klass: Optional[str] = None) -> np.ndarray:
        """Mean escaped intensity I^(n)(t) per input pulse."""
        classes = CLASSES if klass is None else (klass,)
        total = np.zeros_like(self.t)
        for k in classes:
            if (order, k) in self.intensity:
                total = total + self.intensity[(order, k)]
        return total / max(self.n_paths, 1)

    def total_intensity(self, klass: Optional[str] = None) -> np.ndarray:
        total = np.zeros_like(self.t)
        for order in self.orders:
            total = total + self.order_intensity(order, klass)
        return total

    def order_series(self, order: int, klass: Optional[str] = None) -> TimeSeries:
        return TimeSeries(t=self.t, values=self.order_intensity(order, klass), label=f"order {order}")

    def detector_intensity(self, label: str, order: Optional[int] = None, klass: Optional[str] = None) -> np.ndarray:
        """Mean next-event intensity per steradian toward a detector."""
        total = np.zeros_like(self.t)
        for (name, n, k), value in self.detector.items():
            if name == label and (order is None or n == order) and (klass is None or k == klass):
                total = total + value
        return total / max(self.n_paths, 1)

    def escaped_energy(self) -> float:
        """Mean escaped energy per input pulse from the termination estimator."""
        return sum(self.energy.values()) / max(self.n_paths, 1)

    def detector_labels(self) -> List[str]:
        return sorted({label for label, _, _ in self.detector})


@dataclass
class DiffusionSetup:
    """Everything a worker needs to trace paths; read-only once built."""

    seed: int
    grid: TimeGrid
    band: np.ndarray
    omega: np.ndarray
    spectrum: np.ndarray
    profile: DensityProfile
    kernel: ScatteringKernel
    settings: DiffusionSettings
    max_order: int
    aperture_radius: float
    detectors: Dict[str, np.ndarray]
    entry_polarization: np.ndarray = field(default_factory=lambda: INPUT_POLARIZATION.copy())

    @property
    def input_energy(self) -> float:
        return self.grid.energy_from_spectrum(self.spectrum)

    def energy(self, transfer: np.ndarray) -> float:
        """Parseval energy of alpha(omega) H(omega) over the band."""
        return self.grid.energy_from_spectrum(self.spectrum * transfer)

    def intensities(self, transfers: Sequence[np.ndarray]) -> np.ndarray:
        """|F^-1[alpha H]|^2 for a batch of band transfers, shape (k, n)."""
        full = np.zeros((len(transfers), self.grid.n), dtype=complex)
        full[:, self.band] = self.spectrum[None, :] * np.asarray(transfers)
        phase = np.exp(-1j * self.grid.omega * self.grid.t0)
        amplitudes = np.fft.fft(full * phase[None, :], axis=1) / (self.grid.n * self.grid.dt)
        return np.abs(amplitudes) ** 2


@dataclass
class FreePath:
    """Result of one free-flight draw."""

    escaped: bool
    distance: float
    column: float
    position: Optional[np.ndarray] = None


def sample_disc(rng: np.random.Generator, radius: float, size: Optional[int] = None) -> np.ndarray:
    """Uniform points on a disc, as (x, z) pairs."""
    r = radius * np.sqrt(rng.random(size))
    phi = 2.0 * np.pi * rng.random(size)
    return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)


def sample_entry(
    rng: np.random.Generator,
    aperture_radius: float,
    profile: DensityProfile,
) -> Tuple[np.ndarray, np.ndarray]:
    """Launch point on the flat input aperture (X-Z disc) and the +Y direction."""
    offset = sample_disc(rng, aperture_radius)
    return profile.entry_point(offset), INPUT_DIRECTION.copy()


def sample_free_path(
    origin: np.ndarray,
    direction: np.ndarray,
    profile: DensityProfile,
    cross_section: float,
    rng: np.random.Generator,
) -> FreePath:
    """
    Draw the next collision with survival probability exp(-b(s)).

    The walker escapes when the drawn optical depth exceeds the remaining
    depth of the ray.
    """
    column_inf = profile.column_density(origin, direction)
    depth = -math.log(1.0 - rng.random())
    if cross_section <= 0 or depth >= cross_section * column_inf:
        return FreePath(escaped=True, distance=math.inf, column=column_inf)
    column = depth / cross_section
    distance = profile.path_for_column(origin, direction, column)
    if math.isinf(distance):
        return FreePath(escaped=True, distance=math.inf, column=column_inf)
    return FreePath(escaped=False, distance=distance, column=column, position=origin + distance * direction)


def scatter_vertex(
    kernel: ScatteringKernel,
    direction: np.ndarray,
    polarization: np.ndarray,
    rng: np.random.Generator,
):
    """Sample (m'', direction, polarization) and the transfer ratio at one vertex."""
    return kernel.sample_vertex(direction, polarization, rng)


def _default_max_order(profile: DensityProfile, kernel: ScatteringKernel, polarization: np.ndarray) -> int:
    entry = profile.entry_point((0.0, 0.0))
    depth = kernel.extinction(polarization) * profile.column_density(entry, INPUT_DIRECTION)
    return max(1, int(math.ceil(depth ** 2)))


def prepare_diffusion(
    pulse: PulseConfig,
    profile: DensityProfile,
    kernel: ScatteringKernel,
    seed: int,
    settings: DiffusionSettings,
    aperture_radius: float = 0.0,
) -> DiffusionSetup:
    grid = TimeGrid.for_pulse(pulse.duration, samples=settings.grid_samples, padding=settings.grid_padding)
    omega = grid.omega
    band = np.abs(omega - pulse.detuning) <= settings.band_halfwidth
    spectrum = pulse_spectrum(pulse, omega[band]).values
    kernel.bind(omega[band], pulse.detuning)
    max_order = settings.max_order or _default_max_order(profile, kernel, INPUT_POLARIZATION)
    return DiffusionSetup(
        seed=validate_seed(seed),
        grid=grid,
        band=band,
        omega=omega[band],
        spectrum=spectrum,
        profile=profile,
        kernel=kernel,
        settings=settings,
        max_order=max_order,
        aperture_radius=aperture_radius,
        detectors={label: axis_direction(label) for label in settings.detectors},
    )


def trace_path(index: int, setup: DiffusionSetup, acc: OrderAccumulator) -> PathChain:
    """Follow path ``index`` to escape, truncation or roulette death, scoring into ``acc``."""
    rng = path_generator(setup.seed, index)
    kernel, profile, settings = setup.kernel, setup.profile, setup.settings
    gate = settings.storage_gate

    position, direction = sample_entry(rng, setup.aperture_radius, profile)
    polarization = setup.entry_polarization
    transfer = np.ones(setup.omega.size, dtype=complex)
    chain = PathChain()
    klass = ELASTIC
    expected: Dict[int, float] = {}
    detector_keys: List[Tuple[str, int, str]] = []
    detector_transfers: List[np.ndarray] = []
    detector_weights: List[float] = []

    def finish() -> PathChain:
        acc.add_expected(expected)
        if detector_transfers:
            batch = setup.intensities(detector_transfers)
            for (label, order, k), w, row in zip(detector_keys, detector_weights, batch):
                acc.add_detector(label, order, k, w * row)
        acc.n_paths += 1
        return chain

    while True:
        order = chain.order
        sigma = kernel.extinction(polarization)
        leg = sample_free_path(position, direction, profile, sigma, rng)

        # Expected escape along this leg
        column_inf = leg.column if leg.escaped else profile.column_density(position, direction)
        escape_band, _ = kernel.transfer(polarization, column_inf)
        expected[order] = expected.get(order, 0.0) + chain.weight * setup.energy(transfer * escape_band)

        if leg.escaped:
            _, escape_carrier = kernel.transfer(polarization, leg.column)
            final = transfer * escape_band / escape_carrier
            intensity = chain.weight * setup.intensities([final])[0]
            acc.add_termination(order, klass, intensity, chain.length)
            chain.escaped = True
            return finish()

        segment_band, segment_carrier = kernel.transfer(polarization, leg.column)
        transfer = transfer * segment_band / segment_carrier
        position = leg.position

        if order + 1 > setup.max_order:
            acc.discarded_energy += chain.weight * setup.energy(transfer)
            acc.truncated_paths += 1
            chain.truncated = True
            return finish()

        vertex = scatter_vertex(kernel, direction, polarization, rng)
        chain.vertices.append(position.copy())
        chain.transitions.append((vertex.initial, vertex.final))
        chain.polarizations.append(vertex.polarization)
        chain.weight *= vertex.albedo
        acc.vertices += 1
        vertex_class = INELASTIC if vertex.inelastic else ELASTIC
        if vertex.inelastic:
            acc.inelastic_vertices += 1

        for label, target in setup.detectors.items():
            for emission in kernel.emission(vertex, target):
                if vertex.inelastic:
                    leaving = np.ones_like(transfer)
                else:
                    leaving, _ = kernel.transfer(emission.polarization, profile.column_density(position, target))
                detector_keys.append((label, chain.order, vertex_class))
                detector_transfers.append(transfer * emission.ratio * leaving)
                detector_weights.append(chain.weight * emission.probability)

        transfer = transfer * vertex.ratio
        if gate.enabled and chain.order == gate.after_order:
            transfer = transfer * gate.factor(setup.omega)
        direction, polarization = vertex.direction, vertex.polarization

        if vertex.inelastic:
            # Shifted by the ground splitting: the medium is transparent from here on
            chain.inelastic = True
            klass = INELASTIC
            expected[chain.order] = expected.get(chain.order, 0.0) + chain.weight * setup.energy(transfer)
            intensity = chain.weight * setup.intensities([transfer])[0]
            acc.add_termination(chain.order, klass, intensity, chain.length)
            chain.escaped = True
            return finish()

        if chain.weight < settings.roulette_threshold:
            if rng.random() < settings.roulette_survival:
                chain.weight /= settings.roulette_survival
            else:
                acc.killed_paths += 1
                return finish()


def _trace_chunk(setup: DiffusionSetup, start: int, stop: int) -> OrderAccumulator:
    acc = OrderAccumulator(t=setup.grid.t, input_energy=setup.input_energy)
    for index in range(start, stop):
        trace_path(index, setup, acc)
    return acc


def run_diffusion(
    pulse: PulseConfig,
    cloud: Union[CloudConfig, DensityProfile],
    kernel: Union[ScatteringKernel, ControlField],
    n_paths: int,
    seed: int,
    settings: Optional[DiffusionSettings] = None,
) -> OrderAccumulator:
    """
    Trace ``n_paths`` walkers and accumulate escaped intensity by scattering order.

    Raises:
        ParameterError: non-positive path count or invalid seed
    """
    if not isinstance(n_paths, (int, np.integer)) or n_paths < 1:
        raise ParameterError(f"number of paths must be a positive integer, got {n_paths!r}", "diffuse_mc")
    settings = settings or DiffusionSettings()
    if isinstance(kernel, ControlField):
        kernel = AtomicKernel(kernel)

    if isinstance(cloud, CloudConfig):
        profile: DensityProfile = cloud.profile
        aperture = pulse.aperture * cloud.r0
    else:
        profile = cloud
        aperture = pulse.aperture * profile.r0 if isinstance(profile, GaussianProfile) else 0.0

    setup = prepare_diffusion(pulse, profile, kernel, seed, settings, aperture)
    chunks = [(start, min(start + settings.chunk_size, n_paths)) for start in range(0, n_paths, settings.chunk_size)]
    logger.info(
        f"[Diffuse MC] {n_paths} paths in {len(chunks)} chunks on {settings.workers} worker(s), "
        f"max order {setup.max_order}, kernel {kernel.display_name}"
    )

    result = OrderAccumulator(t=setup.grid.t, input_energy=setup.input_energy)
    if settings.workers == 1:
        partials = (_trace_chunk(setup, start, stop) for start, stop in chunks)
        for i, partial in enumerate(partials, 1):
            result.merge(partial)
            logger.debug(f"[Diffuse MC] chunk {i}/{len(chunks)} merged")
    else:
        with ThreadPoolExecutor(max_workers=settings.workers) as pool:
            partials = pool.map(lambda c: _trace_chunk(setup, *c), chunks)
            for i, partial in enumerate(partials, 1):
                result.merge(partial)
                logger.debug(f"[Diffuse MC] chunk {i}/{len(chunks)} merged")

    escaped = sum(result.energy.values())
    if result.discarded_energy > OVERFLOW_WARNING_FRACTION * escaped:
        message = (
            f"order truncation at {setup.max_order} discarded {result.discarded_energy / max(escaped, 1e-300):.2%} "
            f"of the escaped energy; raise mc.max_order"
        )
        logger.warning(f"[Diffuse MC] {message}")
        result.warnings.append(message)
    logger.info(
        f"[Diffuse MC] Escaped energy {result.escaped_energy():.4f} over {result.vertices} vertices "
        f"({result.inelastic_vertices} inelastic)"
    )
    return result


@dataclass
class OrderStatistics:
    """Moments of one scattering order, per input pulse."""

    order: int
    energy: float
    energy_error: float
    fraction: float
    mean_arrival: float
    arrival_error: float
    inelastic_fraction: float
    mean_path_length: float
    paths: int


@dataclass
class DelayStatistics:
    """Per-order and total arrival-time statistics of a diffusion run."""

    orders: List[OrderStatistics]
    total_energy: float
    total_energy_error: float
    mean_arrival: float
    arrival_error: float
    elastic_mean_arrival: float
    expected_energy: float
    expected_energy_error: float
    discarded_energy: float
    warnings: List[str] = field(default_factory=list)

    @property
    def estimator_z(self) -> float:
        """Difference of the two total-energy estimators in combined standard errors."""
        spread = math.hypot(self.total_energy_error, self.expected_energy_error)
        if spread == 0:
            return 0.0
        return (self.expected_energy - self.total_energy) / spread

    def order(self, n: int) -> OrderStatistics:
        for stats in self.orders:
            if stats.order == n:
                return stats
        raise KeyError(n)

    def to_dict(self) -> Dict[str, object]:
        return {
            "total_energy": self.total_energy,
            "total_energy_error": self.total_energy_error,
            "mean_arrival": self.mean_arrival,
            "arrival_error": self.arrival_error,
            "elastic_mean_arrival": self.elastic_mean_arrival,
            "expected_energy": self.expected_energy,
            "expected_energy_error": self.expected_energy_error,
            "estimator_z": self.estimator_z,
            "discarded_energy": self.discarded_energy,
            "orders": [vars(o).copy() for o in self.orders],
            "warnings": list(self.warnings),
        }


def _mean_error(total: float, total_sq: float, n: int) -> Tuple[float, float]:
    mean = total / n
    if n < 2:
        return mean, 0.0
    variance = max(0.0, (total_sq - n * mean * mean) / (n - 1))
    return mean, math.sqrt(variance / n)


def _ratio_error(m: float, m_sq: float, e: float, e_sq: float, me: float, n: int) -> Tuple[float, float]:
    """Ratio sum(M)/sum(E) and its delta-method standard error."""
    ratio = m / e
    if n < 2:
        return ratio, 0.0
    m_bar, e_bar = m / n, e / n
    s_m = (m_sq - n * m_bar * m_bar) / (n - 1)
    s_e = (e_sq - n * e_bar * e_bar) / (n - 1)
    s_me = (me - n * m_bar * e_bar) / (n - 1)
    variance = (s_m - 2.0 * ratio * s_me + ratio * ratio * s_e) / (n * e_bar * e_bar)
    return ratio, math.sqrt(max(0.0, variance))


def _sum_keys(acc: OrderAccumulator, keys: Sequence[Key]) -> Tuple[float, float, float, float, float]:
    return tuple(
        sum(getattr(acc, name).get(k, 0.0) for k in keys)
        for name in ("energy", "energy_sq", "moment", "moment_sq", "cross")
    )


def delay_statistics(acc: OrderAccumulator) -> DelayStatistics:
    """
    Per-order and total energies and mean arrival times with Monte-Carlo errors.

    Every path ends in exactly one (order, class) bin, so sums of per-path
    squares over bins are the per-path squares of the totals.

    Raises:
        EmptyAccumulatorError: no path has escaped with non-zero energy
    """
    n = acc.n_paths
    all_keys = list(acc.energy)
    energy, energy_sq, moment, moment_sq, cross = _sum_keys(acc, all_keys) if all_keys else (0.0,) * 5
    if n == 0 or energy <= 0.0:
        raise EmptyAccumulatorError("no escaped energy to take statistics of")

    total, total_error = _mean_error(energy, energy_sq, n)
    arrival, arrival_error = _ratio_error(moment, moment_sq, energy, energy_sq, cross, n)

    elastic_keys = [k for k in all_keys if k[1] == ELASTIC]
    e_el, _, m_el, _, _ = _sum_keys(acc, elastic_keys)
    elastic_arrival = m_el / e_el if e_el > 0 else float("nan")

    expected_total = sum(acc.expected.values())
    expected, expected_error = _mean_error(expected_total, acc.expected_total_sq, n)

    orders: List[OrderStatistics] = []
    for order in sorted({k[0] for k in all_keys}):
        keys = [k for k in all_keys if k[0] == order]
        e, e_sq, m, m_sq, me = _sum_keys(acc, keys)
        mean, error = _mean_error(e, e_sq, n)
        paths = sum(acc.counts.get(k, 0) for k in keys)
        if e > 0:
            order_arrival, order_error = _ratio_error(m, m_sq, e, e_sq, me, n)
        else:
            order_arrival, order_error = float("nan"), float("nan")
        inelastic = acc.energy.get((order, INELASTIC), 0.0)
        orders.append(
            OrderStatistics(
                order=order,
                energy=mean,
                energy_error=error,
                fraction=mean / total,
                mean_arrival=order_arrival,
                arrival_error=order_error,
                inelastic_fraction=inelastic / e if e > 0 else 0.0,
                mean_path_length=acc.path_length.get(order, 0.0) / paths if paths else 0.0,
                paths=paths,
            )
        )

    return DelayStatistics(
        orders=orders,
        total_energy=total,
        total_energy_error=total_error,
        mean_arrival=arrival,
        arrival_error=arrival_error,
        elastic_mean_arrival=elastic_arrival,
        expected_energy=expected,
        expected_energy_error=expected_error,
        discarded_energy=acc.discarded_energy / n,
        warnings=list(acc.warnings),
    )


def passivity_holds(acc: OrderAccumulator, sigmas: float = 3.0) -> bool:
    """Escaped energy does not exceed the input energy beyond statistical error."""
    stats = delay_statistics(acc)
    return stats.total_energy <= acc.input_energy + sigmas * stats.total_energy_error + 1e-12


def _escape_both_faces(x: float, tau: float) -> float:
    return 0.5 * (special.expn(2, x) + special.expn(2, tau - x))


def slab_order_oracle(tau: float, order: int) -> float:
    """
    Escaped energy fraction of order 0, 1 or 2 for a normally incident beam
    on a conservative isotropically scattering slab of optical thickness tau.
    """
    if tau <= 0:
        raise ParameterError(f"slab optical thickness must be positive, got {tau}", "diffuse_mc")
    if order == 0:
        return math.exp(-tau)
    if order == 1:
        value, _ = integrate.quad(lambda x: math.exp(-x) * _escape_both_faces(x, tau), 0.0, tau, epsabs=1e-12)
        return value
    if order == 2:

        def inner(x: float) -> float:
            value, _ = integrate.quad(
                lambda xp: 0.5 * special.expn(1, abs(x - xp)) * _escape_both_faces(xp, tau),
                0.0,
                tau,
                points=[x],
                epsabs=1e-11,
                limit=200,
            )
            return value

        value, _ = integrate.quad(lambda x: math.exp(-x) * inner(x), 0.0, tau, epsabs=1e-10, limit=200)
        return value
    raise ParameterError(f"slab oracle covers orders 0 to 2, got {order}", "diffuse_mc")
