"""Multiple scattering of the signal pulse by Monte Carlo, control on against control off."""

import logging
import math
from typing import Dict, Optional

from src.output.writers import CsvTable
from src.physics.dressed_green import ControlField, narrow_resonance
from src.physics.medium import CloudConfig
from src.physics.pulse_transport import PulseConfig, tuned_to_at
from src.scenarios.base import BaseScenario, ScenarioResult
from src.transport.diffuse_mc import (
    CLASSES,
    DiffusionSettings,
    OrderAccumulator,
    delay_statistics,
    passivity_holds,
    run_diffusion,
)
from src.transport.kernels import AtomicKernel, KernelRegistry, ScatteringKernel
from src.utils.errors import EmptyAccumulatorError

logger = logging.getLogger(__name__)


def _order_table(name: str, title: str, acc: OrderAccumulator, params: Dict[str, object]) -> CsvTable:
    columns = {"t": acc.t}
    for order in acc.orders:
        columns[f"I_order_{order}"] = acc.order_intensity(order)
    for klass in CLASSES:
        columns[f"I_total_{klass}"] = acc.total_intensity(klass)
    units = ["1/gamma"] + ["per unit input energy"] * (len(columns) - 1)
    return CsvTable.from_columns(name, title, columns, units, params=params)


def _detector_table(name: str, acc: OrderAccumulator, params: Dict[str, object]) -> Optional[CsvTable]:
    labels = acc.detector_labels()
    if not labels:
        return None
    columns = {"t": acc.t}
    for label in labels:
        columns[f"I_{label}"] = acc.detector_intensity(label)
    units = ["1/gamma"] + ["per unit input energy per sr"] * len(labels)
    return CsvTable.from_columns(name, "Next-event intensity toward fixed detector directions", columns, units, params)


class DiffuseScenario(BaseScenario):
    """Per-order diffuse time signals and delay statistics."""

    name = "diffuse"
    display_name = "Diffuse MC"
    description = "multiple-scattering series by Monte Carlo with per-order delays"

    def __init__(self, *args, n_paths: Optional[int] = None, tune_to_at: Optional[bool] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.n_paths = n_paths or self.config.mc.n_paths
        self.tune_to_at = self.config.pulse.tune_to_at if tune_to_at is None else tune_to_at

    def _kernel(self, control: ControlField, cloud: CloudConfig) -> ScatteringKernel:
        name = self.config.mc.kernel
        if KernelRegistry.get(name) is AtomicKernel:
            return AtomicKernel(control, self.table)
        return KernelRegistry.create(name, cross_section=cloud.sigma0)

    def _run_one(
        self,
        label: str,
        pulse: PulseConfig,
        cloud: CloudConfig,
        control: ControlField,
        settings: DiffusionSettings,
        result: ScenarioResult,
    ) -> Dict[str, object]:
        acc = run_diffusion(pulse, cloud, self._kernel(control, cloud), self.n_paths, self.config.seed, settings)
        for message in acc.warnings:
            result.warn(f"{label}: {message}")
        params = {"control": label, "rabi": control.rabi, "seed": self.config.seed, "paths": acc.n_paths}
        result.tables.append(
            _order_table(f"diffuse_orders_{label}", f"Escaped intensity by scattering order, control {label}", acc, params)
        )
        detectors = _detector_table(f"diffuse_detectors_{label}", acc, params)
        if detectors is not None:
            result.tables.append(detectors)

        summary: Dict[str, object] = {
            "paths": acc.n_paths,
            "vertices": acc.vertices,
            "inelastic_vertices": acc.inelastic_vertices,
            "truncated_paths": acc.truncated_paths,
            "killed_paths": acc.killed_paths,
            "input_energy": acc.input_energy,
        }
        try:
            stats = delay_statistics(acc)
        except EmptyAccumulatorError as e:
            result.warn(f"{label}: {e}")
            return summary
        summary["statistics"] = stats.to_dict()
        summary["passive"] = passivity_holds(acc)
        if not summary["passive"]:
            result.warn(f"{label}: escaped energy exceeds the input beyond 3 standard errors")
        logger.info(
            f"[Diffuse MC] control {label}: energy {stats.total_energy:.4f} +- {stats.total_energy_error:.4f}, "
            f"mean arrival {stats.mean_arrival:.2f} +- {stats.arrival_error:.2f}"
        )
        return summary

    def run(self) -> ScenarioResult:
        cfg = self.config
        control = cfg.control.build()
        cloud = cfg.cloud.build()
        pulse = cfg.pulse.build()
        result = ScenarioResult(scenario=self.name)

        at_position = math.nan
        if control.enabled:
            at_position, _ = narrow_resonance(control, self.table)
        if self.tune_to_at:
            pulse = tuned_to_at(pulse, control, self.table)
        gate_centre = at_position if math.isfinite(at_position) else pulse.detuning
        settings = cfg.mc.settings(workers=self.workers, gate_centre=gate_centre)

        result.summary.update(
            {
                "cloud": {"b0": cloud.b0, "n0": cloud.n0, "r0": cloud.r0, "mean_free_path": cloud.mean_free_path},
                "pulse": {"duration": pulse.duration, "detuning": pulse.detuning},
                "kernel": cfg.mc.kernel,
                "storage_gate": settings.storage_gate.enabled,
            }
        )
        runs = {"off": control.off(), "on": control} if control.enabled else {"off": control}
        for label, field in runs.items():
            result.summary[label] = self._run_one(label, pulse, cloud, field, settings, result)

        on = result.summary.get("on", {}).get("statistics")
        off = result.summary.get("off", {}).get("statistics")
        if on and off:
            result.summary["delay_gain"] = on["mean_arrival"] - off["mean_arrival"]
        return result
