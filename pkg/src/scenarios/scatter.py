"""Single scattering of the signal pulse toward the coordinate axes, control on and off."""

import logging
import math
from typing import Dict

from src.output.writers import CsvTable
from src.physics.dressed_green import narrow_resonance
from src.physics.pulse_transport import (
    SingleScatterResult,
    mean_arrival_time,
    single_scatter_signal,
    spectral_fwhm,
    storage_window_warning,
    tail_fraction,
    tuned_to_at,
)
from src.scenarios.base import BaseScenario, ScenarioResult

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("rayleigh_elastic", "raman_elastic", "raman_inelastic", "elastic", "reference")


def _trace_summary(result: SingleScatterResult, duration: float) -> Dict[str, object]:
    elastic = result.traces["elastic"]
    summary: Dict[str, object] = {
        "energies": result.energies,
        "source_energies": result.source_energies,
        "inelastic_over_elastic": result.inelastic_ratio,
        "source_inelastic_over_elastic": result.source_inelastic_ratio,
        "half_path_attenuation": result.half_path_attenuation,
    }
    if elastic.energy > 0:
        summary["elastic_mean_arrival"] = mean_arrival_time(elastic)
        summary["elastic_tail_after_2T"] = tail_fraction(elastic, 2.0 * duration)
    return summary


class ScatterScenario(BaseScenario):
    """Channel-resolved single-scattering traces for each requested direction."""

    name = "scatter"
    display_name = "Single Scatter"
    description = "delayed elastic and Raman traces scattered once toward X, Y, Z"

    def __init__(self, *args, directions=None, tune_to_at=None, **kwargs):
        super().__init__(*args, **kwargs)
        self.directions = list(directions or self.config.scatter.directions)
        self.tune_to_at = self.config.pulse.tune_to_at if tune_to_at is None else tune_to_at

    def run(self) -> ScenarioResult:
        cfg = self.config
        control = cfg.control.build()
        cloud = cfg.cloud.build()
        pulse = cfg.pulse.build()
        result = ScenarioResult(scenario=self.name)

        if self.tune_to_at:
            pulse = tuned_to_at(pulse, control, self.table)
        grid = cfg.grid.time_grid(pulse.duration)

        at_position, at_width = narrow_resonance(control, self.table) if control.enabled else (math.nan, math.nan)
        if math.isfinite(at_width):
            message = storage_window_warning(pulse, at_width, self.table.gamma)
            if message:
                result.warn(message)

        result.summary.update(
            {
                "pulse": {"duration": pulse.duration, "detuning": pulse.detuning, "spectral_fwhm": spectral_fwhm(pulse)},
                "cloud": {"b0": cloud.b0, "n0": cloud.n0, "r0": cloud.r0},
                "at_resonance": {"position": at_position, "width": at_width},
                "directions": {},
            }
        )

        for direction in self.directions:
            logger.info(f"[Single Scatter] Direction {direction}")
            runs = {
                "off": single_scatter_signal(
                    direction, control.off(), pulse, cloud, grid, self.table, cfg.scatter.reference_scale
                ),
                "on": single_scatter_signal(
                    direction, control, pulse, cloud, grid, self.table, cfg.scatter.reference_scale
                ),
            }
            columns = {"t": grid.t}
            for state, run in runs.items():
                for name in TRACE_COLUMNS:
                    columns[f"I_{name}_{state}"] = run.traces[name].values
            label = direction.strip().upper().lstrip("+")
            result.tables.append(
                CsvTable.from_columns(
                    f"scatter_{label}",
                    f"Single-scattering intensity toward {direction}, per channel, control off and on",
                    columns,
                    ["1/gamma"] + ["per unit input energy"] * (len(columns) - 1),
                    params={
                        "direction": direction,
                        "control_rabi": control.rabi,
                        "control_on_columns": "suffix _on",
                        "control_off_columns": "suffix _off",
                    },
                )
            )

            summary = {state: _trace_summary(run, pulse.duration) for state, run in runs.items()}
            on, off = summary["on"], summary["off"]
            if "elastic_mean_arrival" in on and "elastic_mean_arrival" in off:
                summary["delay_gain"] = on["elastic_mean_arrival"] - off["elastic_mean_arrival"]
            summary["inelastic_exceeds_elastic_on"] = bool(
                runs["on"].energies["raman_inelastic"] > runs["on"].energies["elastic"]
            )
            summary["expected_half_path_attenuation"] = math.exp(-0.5 * cloud.b0)
            result.summary["directions"][direction] = summary

            logger.info(
                f"[Single Scatter] {direction}: inelastic/elastic off={off['inelastic_over_elastic']:.2e}, "
                f"on={on['inelastic_over_elastic']:.2e}"
            )

        result.summary["time_axis"] = {"t0": grid.t0, "dt": grid.dt, "n": grid.n}
        return result
