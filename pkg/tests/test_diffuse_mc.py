"""Diffusion Monte Carlo: samplers, estimators, determinism and the slab oracle."""

import math

import numpy as np
import pytest

from src.physics.dressed_green import ControlField
from src.physics.medium import CloudConfig, UniformSlab
from src.physics.pulse_transport import PulseConfig, mean_arrival_time, single_scatter_signal
from src.transport.diffuse_mc import (
    DiffusionSettings,
    OrderAccumulator,
    PathChain,
    StorageGate,
    delay_statistics,
    passivity_holds,
    run_diffusion,
    sample_disc,
    sample_free_path,
    slab_order_oracle,
)
from src.transport.kernels import AtomicKernel, IsotropicKernel, KernelRegistry
from src.transport.rng import path_generator, validate_seed
from src.utils.errors import EmptyAccumulatorError, ParameterError

Y = np.array([0.0, 1.0, 0.0])
X = np.array([1.0, 0.0, 0.0])

SLAB_TAU = 1.0


def _sphere_quadrature(n_theta: int = 16, n_phi: int = 32):
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    d_phi = 2.0 * math.pi / n_phi
    for cos_t, w in zip(nodes, weights):
        sin_t = math.sqrt(1.0 - cos_t * cos_t)
        for j in range(n_phi):
            phi = j * d_phi
            yield np.array([sin_t * math.cos(phi), sin_t * math.sin(phi), cos_t]), w * d_phi


@pytest.fixture(scope="module")
def slab_run():
    slab = UniformSlab(density=1.0, thickness=SLAB_TAU)
    settings = DiffusionSettings(max_order=60, detectors=(), chunk_size=128)
    acc = run_diffusion(PulseConfig(), slab, IsotropicKernel(cross_section=1.0), 6000, seed=11, settings=settings)
    return acc, delay_statistics(acc)


# ---------------------------------------------------------------------------
# Random streams and samplers
# ---------------------------------------------------------------------------


def test_path_streams_are_reproducible_and_distinct():
    a = path_generator(7, 3).random(5)
    assert np.array_equal(a, path_generator(7, 3).random(5))
    assert not np.array_equal(a, path_generator(7, 4).random(5))
    assert not np.array_equal(a, path_generator(8, 3).random(5))


def test_seed_validation():
    assert validate_seed(2 ** 64 - 1) == 2 ** 64 - 1
    for bad in (-1, 2 ** 64, 1.5):
        with pytest.raises(ParameterError):
            validate_seed(bad)


def test_entry_disc_second_moment(rng):
    radius = 0.5
    points = sample_disc(rng, radius, size=200_000)
    r2 = np.sum(points ** 2, axis=1)
    assert np.max(r2) <= radius ** 2
    standard_error = radius ** 2 / math.sqrt(12.0 * r2.size)
    assert abs(r2.mean() - radius ** 2 / 2.0) < 3.0 * standard_error


def test_free_path_is_exponential(rng):
    slab = UniformSlab(density=1.0, thickness=1e9)
    origin = np.array([0.0, 0.0, 0.0])
    distances = np.array([sample_free_path(origin, Y, slab, 2.0, rng).distance for _ in range(20_000)])
    assert np.all(np.isfinite(distances))
    assert abs(distances.mean() - 0.5) < 3.0 * 0.5 / math.sqrt(distances.size)


def test_free_path_escapes_thin_medium(rng):
    slab = UniformSlab(density=1.0, thickness=1e-9)
    leg = sample_free_path(np.zeros(3), Y, slab, 1.0, rng)
    assert leg.escaped and math.isinf(leg.distance)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def test_isotropic_emission_integrates_to_one(rng):
    kernel = IsotropicKernel(cross_section=2.0).bind(np.array([0.0, 0.1]), 0.0)
    vertex = kernel.sample_vertex(Y, X, rng)
    total = sum(w * e.probability for k, w in _sphere_quadrature() for e in kernel.emission(vertex, k))
    assert total == pytest.approx(1.0, rel=1e-12)
    assert kernel.extinction(X) == pytest.approx(2.0)


@pytest.mark.parametrize("control", [ControlField(), ControlField(rabi=3.0)])
def test_atomic_emission_integrates_to_one(table, control, rng):
    kernel = AtomicKernel(control, table).bind(np.linspace(-0.1, 0.1, 5), 0.025)
    for _ in range(5):
        vertex = kernel.sample_vertex(Y, X, rng)
        total = sum(w * e.probability for k, w in _sphere_quadrature() for e in kernel.emission(vertex, k))
        assert total == pytest.approx(1.0, rel=1e-9)
        assert abs(vertex.polarization @ vertex.direction) < 1e-12


def test_atomic_albedo_is_unity_without_control(table, control_off, rng):
    kernel = AtomicKernel(control_off, table).bind(np.array([0.025]), 0.025)
    vertex = kernel.sample_vertex(Y, X, rng)
    assert vertex.albedo == pytest.approx(1.0, rel=1e-6)
    probabilities = kernel.channel_probabilities(X)
    assert sum(probabilities.values()) == pytest.approx(1.0)
    assert probabilities["raman_inelastic"] < 1e-3


def test_kernel_registry():
    assert KernelRegistry.get("ISOTROPIC") is IsotropicKernel
    kernel = KernelRegistry.create("isotropic", cross_section=3.0)
    assert kernel.describe()["cross_section"] == 3.0
    with pytest.raises(ParameterError):
        KernelRegistry.get("mie")
    with pytest.raises(ParameterError):
        IsotropicKernel(cross_section=0.0)


# ---------------------------------------------------------------------------
# Accumulators and statistics
# ---------------------------------------------------------------------------


def test_path_chain_length():
    chain = PathChain(vertices=[np.zeros(3), np.array([3.0, 4.0, 0.0]), np.array([3.0, 4.0, 2.0])])
    assert chain.order == 3
    assert chain.length == pytest.approx(7.0)
    assert PathChain().length == 0.0


def test_accumulator_merge_adds_everything():
    t = np.linspace(0.0, 1.0, 5)
    a, b = OrderAccumulator(t=t), OrderAccumulator(t=t)
    a.add_termination(1, "elastic", np.ones(5), 2.0)
    b.add_termination(1, "elastic", 2.0 * np.ones(5), 1.0)
    b.add_termination(2, "inelastic", np.ones(5), 3.0)
    a.n_paths, b.n_paths = 1, 2
    a.merge(b)
    assert a.n_paths == 3
    assert a.counts[(1, "elastic")] == 2
    assert np.allclose(a.order_intensity(1), 1.0)
    assert a.orders == [1, 2]
    assert a.path_length[1] == 3.0


def test_empty_accumulator_has_no_statistics():
    with pytest.raises(EmptyAccumulatorError):
        delay_statistics(OrderAccumulator(t=np.linspace(0.0, 1.0, 4)))


def test_storage_gate_delays_only_the_window():
    gate = StorageGate(enabled=True, hold=10.0, centre=0.0, window=0.05)
    omega = np.array([-0.1, 0.0, 0.03, 0.2])
    factor = gate.factor(omega)
    assert np.allclose(factor[[0, 3]], 1.0)
    assert factor[2] == pytest.approx(np.exp(0.3j))


@pytest.mark.parametrize("paths", [0, -5])
def test_non_positive_path_count_is_rejected(paths):
    with pytest.raises(ParameterError):
        run_diffusion(PulseConfig(), UniformSlab(1.0, 1.0), IsotropicKernel(), paths, seed=1)


def test_invalid_settings_are_rejected():
    with pytest.raises(ParameterError):
        DiffusionSettings(max_order=0)
    with pytest.raises(ParameterError):
        DiffusionSettings(workers=0)
    with pytest.raises(ParameterError):
        DiffusionSettings(roulette_survival=0.0)


# ---------------------------------------------------------------------------
# Slab oracle
# ---------------------------------------------------------------------------


def test_slab_oracle_values():
    assert slab_order_oracle(1.0, 0) == pytest.approx(math.exp(-1.0))
    first, second = slab_order_oracle(1.0, 1), slab_order_oracle(1.0, 2)
    assert 0.0 < second < first < 1.0 - math.exp(-1.0)
    # Thin slab: single scattering ~ tau, double ~ tau^2 ln(1/tau)
    assert slab_order_oracle(1e-3, 1) == pytest.approx(1e-3, rel=1e-2)
    with pytest.raises(ParameterError):
        slab_order_oracle(1.0, 3)
    with pytest.raises(ParameterError):
        slab_order_oracle(0.0, 1)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_slab_orders_match_oracle(slab_run, order):
    acc, stats = slab_run
    expected = slab_order_oracle(SLAB_TAU, order) * acc.input_energy
    measured = stats.order(order)
    assert abs(measured.energy - expected) < 3.0 * measured.energy_error + 1e-12


def test_slab_estimators_agree_and_conserve_energy(slab_run):
    acc, stats = slab_run
    assert abs(stats.estimator_z) < 3.0
    assert passivity_holds(acc)
    # Conservative scatterer, nothing truncated: all input escapes
    assert stats.total_energy == pytest.approx(acc.input_energy, rel=1e-9)
    assert acc.truncated_paths == 0


def test_flat_kernel_keeps_the_pulse_shape(slab_run):
    acc, _ = slab_run
    series = acc.order_series(0)
    assert np.sum(series.t * series.values) / np.sum(series.values) == pytest.approx(60.0, rel=1e-6)


def test_result_does_not_depend_on_worker_count():
    slab = UniformSlab(density=1.0, thickness=2.0)
    runs = [
        run_diffusion(
            PulseConfig(),
            slab,
            IsotropicKernel(),
            120,
            seed=2024,
            settings=DiffusionSettings(max_order=40, workers=workers, chunk_size=16, detectors=("+Y",)),
        )
        for workers in (1, 8)
    ]
    one, eight = runs
    assert one.energy == eight.energy
    assert one.energy_sq == eight.energy_sq
    assert one.orders == eight.orders
    for order in one.orders:
        assert np.array_equal(one.order_intensity(order), eight.order_intensity(order))
    assert np.array_equal(one.detector_intensity("+Y"), eight.detector_intensity("+Y"))


def test_truncation_is_reported():
    acc = run_diffusion(
        PulseConfig(),
        UniformSlab(density=1.0, thickness=5.0),
        IsotropicKernel(),
        200,
        seed=3,
        settings=DiffusionSettings(max_order=1, detectors=()),
    )
    assert acc.truncated_paths > 0
    assert acc.discarded_energy > 0
    assert acc.warnings and "truncation" in acc.warnings[0]


@pytest.mark.slow
def test_control_lengthens_diffuse_delay(table):
    cloud = CloudConfig.from_b0(3.0, 200.0)
    settings = DiffusionSettings(max_order=30, workers=4, detectors=())
    pulse = PulseConfig()
    on = delay_statistics(run_diffusion(pulse, cloud, AtomicKernel(ControlField(rabi=3.0), table), 3000, 5, settings))
    off = delay_statistics(run_diffusion(pulse, cloud, AtomicKernel(ControlField(), table), 3000, 5, settings))
    assert on.elastic_mean_arrival > off.elastic_mean_arrival
    for stats in (on, off):
        assert stats.total_energy <= 1.0 + 3.0 * stats.total_energy_error


def test_kernel_registry_accepts_new_kernels(monkeypatch):
    monkeypatch.setattr(KernelRegistry, "_registry", dict(KernelRegistry._registry))

    class Flat(IsotropicKernel):
        name = "flat"

    KernelRegistry.register("Flat", Flat)
    assert KernelRegistry.create("flat", cross_section=2.0).describe()["cross_section"] == 2.0


# ---------------------------------------------------------------------------
# Atomic kernel in the dense cloud
# ---------------------------------------------------------------------------

CLOUD_PATHS = 1000


@pytest.fixture(scope="module")
def cloud_runs(table, cloud, pulse, control_on, control_off):
    settings = DiffusionSettings(workers=4, detectors=())
    runs = {}
    for state, control in (("off", control_off), ("on", control_on)):
        acc = run_diffusion(pulse, cloud, AtomicKernel(control, table), CLOUD_PATHS, seed=17, settings=settings)
        runs[state] = (acc, delay_statistics(acc))
    return runs


@pytest.mark.slow
@pytest.mark.parametrize("state", ["off", "on"])
def test_atomic_estimators_agree(cloud_runs, state):
    acc, stats = cloud_runs[state]
    assert abs(stats.estimator_z) < 3.0
    assert passivity_holds(acc)


@pytest.mark.slow
def test_dense_cloud_is_dominated_by_multiple_scattering(cloud_runs):
    _, stats = cloud_runs["off"]
    fractions = {o.order: o.fraction for o in stats.orders}
    assert fractions.get(0, 0.0) < 1e-2
    assert fractions[1] < 1.0 / 3.0
    assert sum(f for n, f in fractions.items() if n >= 2) > 0.6


@pytest.mark.slow
def test_path_length_grows_linearly_with_order(cloud_runs):
    _, stats = cloud_runs["off"]
    selected = [o for o in stats.orders if 2 <= o.order <= 12 and o.paths >= 8]
    assert len(selected) >= 4
    orders = np.array([o.order for o in selected], dtype=float)
    lengths = np.array([o.mean_path_length for o in selected])
    slope, _ = np.polyfit(orders, lengths, 1)
    assert slope > 0.0
    assert np.corrcoef(orders, lengths)[0, 1] > 0.95


@pytest.mark.slow
def test_truncation_past_squared_depth_converges(table, cloud, pulse, control_off):
    max_order = math.ceil(cloud.b0 ** 2)
    energies = []
    for limit in (max_order, 2 * max_order):
        settings = DiffusionSettings(max_order=limit, workers=4, detectors=())
        acc = run_diffusion(pulse, cloud, AtomicKernel(control_off, table), 300, seed=23, settings=settings)
        energies.append(acc.escaped_energy())
    short, doubled = energies
    # Same streams: the longer run only adds paths that went past the first limit
    assert doubled >= short - 1e-12
    assert doubled - short < 0.01 * doubled


@pytest.mark.slow
def test_diffuse_delay_exceeds_single_scattering_delay(cloud_runs, table, cloud, pulse, control_on, control_off):
    single_on = mean_arrival_time(single_scatter_signal("X", control_on, pulse, cloud, table=table).traces["elastic"])
    single_off = mean_arrival_time(single_scatter_signal("X", control_off, pulse, cloud, table=table).traces["elastic"])
    diffuse_on = cloud_runs["on"][1].elastic_mean_arrival
    diffuse_off = cloud_runs["off"][1].elastic_mean_arrival
    assert diffuse_on > single_on > single_off
    assert diffuse_on > diffuse_off
