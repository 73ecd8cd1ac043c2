"""Quantum-memory read-out channel figures of merit."""

import logging

import numpy as np

from src.output.writers import CsvTable
from src.scenarios.base import BaseScenario, ScenarioResult
from src.services.memory_channel import (
    CLASSICAL_BENCHMARK,
    CLONING_BENCHMARK,
    MemoryChannelAnalyzer,
    fidelity_sweep,
    gaussian_wavepacket,
    hom_coincidence,
    signal_noise_split,
    stretch,
)

logger = logging.getLogger(__name__)


class MemoryScenario(BaseScenario):
    """Wigner function, photon statistics, Werner fidelity and read-out anti-bunching."""

    name = "memory"
    display_name = "Memory Channel"
    description = "Wigner grid, P(n), Werner fidelity and HOM coincidences of the read-out"

    def __init__(self, *args, fidelity_sweep: bool = False, **kwargs):
        super().__init__(*args, **kwargs)
        self.sweep = fidelity_sweep or self.config.memory.fidelity_sweep

    def run(self) -> ScenarioResult:
        cfg = self.config.memory
        channel = cfg.channel()
        result = ScenarioResult(scenario=self.name)
        report = MemoryChannelAnalyzer(cfg.analysis()).analyze(channel)
        for message in report.warnings:
            result.warn(message)

        params = {"eta": channel.eta, "nbar": channel.nbar}
        grid = report.wigner
        xx, pp = np.meshgrid(grid.x, grid.p, indexing="ij")
        result.tables.append(
            CsvTable.from_columns(
                "wigner",
                "Wigner function of the read-out channel on the (x, p) grid",
                {"x": xx.ravel(), "p": pp.ravel(), "W": grid.values.ravel()},
                ["1", "1", "1"],
                params=params,
            )
        )

        photons = report.photons
        result.tables.append(
            CsvTable.from_columns(
                "photon_number",
                "Photon-number distribution split into signal and noise-only parts",
                {"n": photons.n, "P": photons.probabilities, "P_signal": photons.signal, "P_noise": photons.noise},
                ["1", "1", "1", "1"],
                params={**params, "tail": photons.tail},
            )
        )

        result.summary.update(
            {
                "channel": params,
                "wigner": {
                    "normalization": report.normalization,
                    "value_at_origin": grid.value_at_origin(),
                    "points": int(grid.x.size),
                },
                "photon_number": {
                    "p0": float(photons.probabilities[0]),
                    "p1": float(photons.probabilities[1]),
                    "mean": photons.mean,
                    "tail": photons.tail,
                    "one_photon": signal_noise_split(channel, 1),
                    "quadrature_deviation": report.quadrature_deviation,
                },
                "werner": {
                    "x": report.werner.x,
                    "fidelity": report.fidelity,
                    "classification": report.classification.value,
                    "classical_benchmark": CLASSICAL_BENCHMARK,
                    "cloning_benchmark": CLONING_BENCHMARK,
                },
            }
        )

        if self.sweep:
            sweep = fidelity_sweep(np.linspace(0.0, 1.0, cfg.sweep_points))
            result.tables.append(
                CsvTable.from_columns(
                    "fidelity_sweep",
                    "Werner fidelity versus weight x with the classical and cloning benchmarks",
                    sweep,
                    ["1", "1", "1", "1"],
                )
            )

        result.tables.append(self._anti_bunching(result))
        return result

    def _anti_bunching(self, result: ScenarioResult) -> CsvTable:
        """Coincidences of two read-out photons offset in time as the read-out is slowed."""
        cfg = self.config.memory
        sigma, offset = cfg.wavepacket_width, cfg.wavepacket_offset
        largest = max(cfg.stretch_factors)
        half_span = 8.0 * sigma * largest + offset
        t = np.linspace(-half_span, half_span, 8193)
        first = gaussian_wavepacket(t, -0.5 * offset, sigma, "a")
        second = gaussian_wavepacket(t, 0.5 * offset, sigma, "b")

        factors = np.asarray(cfg.stretch_factors, dtype=float)
        coincidence = np.array([hom_coincidence(stretch(first, f), stretch(second, f)) for f in factors])
        analytic = 0.5 * (1.0 - np.exp(-(offset ** 2) / (4.0 * (sigma * factors) ** 2)))
        result.summary["anti_bunching"] = {
            "offset": offset,
            "width": sigma,
            "stretch_factors": factors,
            "coincidence": coincidence,
        }
        logger.info(f"[Memory] HOM coincidence {coincidence[0]:.4f} -> {coincidence[-1]:.4f} under stretching")
        return CsvTable.from_columns(
            "anti_bunching",
            "Beamsplitter coincidence probability of two offset read-out photons versus stretch factor",
            {"stretch": factors, "coincidence": coincidence, "gaussian_formula": analytic},
            ["1", "1", "1"],
            params={"offset": offset, "width": sigma},
        )
