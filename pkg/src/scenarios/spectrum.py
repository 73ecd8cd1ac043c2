"""Susceptibility spectrum of the cloud with and without the control field."""

import logging
import math
from typing import Dict, List

import numpy as np

from src.output.writers import CsvTable
from src.physics.atomic_data import relative_strength
from src.physics.dressed_green import at_width_scale, narrow_resonance
from src.physics.response import (
    POPULATED_F0,
    fit_lorentzian,
    kramers_kronig,
    refined_grid,
    susceptibility_spectrum,
)
from src.scenarios.base import BaseScenario, ScenarioResult

logger = logging.getLogger(__name__)

# Excited levels resolved in the control-free spectrum from F0=3
RESOLVED_F = (4, 3, 2)
FIT_HALF_WINDOW = 3.0

UNITS = ("gamma", "n0*lambdabar^3", "n0*lambdabar^3", "n0*lambdabar^3", "n0*lambdabar^3", "n0*lambdabar^3", "n0*lambdabar^3")


class SpectrumScenario(BaseScenario):
    """Principal susceptibilities over detuning, resonance fits and the AT feature."""

    name = "spectrum"
    display_name = "Spectrum"
    description = "chi_perp, chi_par and control-free chi0 versus detuning"

    def run(self) -> ScenarioResult:
        cfg = self.config
        control = cfg.control.build()
        result = ScenarioResult(scenario=self.name)

        delta = np.linspace(cfg.grid.delta_min, cfg.grid.delta_max, cfg.grid.delta_points)
        at_position, at_width = (math.nan, math.nan)
        if control.enabled:
            at_position, at_width = narrow_resonance(control, self.table)
            if math.isfinite(at_position):
                delta = refined_grid(delta, at_position, cfg.grid.refine_half_width, cfg.grid.refine_factor)

        logger.info(f"[Spectrum] Evaluating {delta.size} detunings, Omega_c={control.rabi:g}")
        spectrum = susceptibility_spectrum(delta, control, self.table)
        chi_perp, chi_par, chi0 = spectrum["chi_perp"], spectrum["chi_par"], spectrum["chi0"]

        result.tables.append(
            CsvTable.from_columns(
                "spectrum",
                "Susceptibility per unit density versus detuning from the F0=3 -> F=4 line",
                {
                    "delta": delta,
                    "re_chi_perp": chi_perp.real,
                    "im_chi_perp": chi_perp.imag,
                    "re_chi_par": chi_par.real,
                    "im_chi_par": chi_par.imag,
                    "re_chi0": chi0.real,
                    "im_chi0": chi0.imag,
                },
                UNITS,
                params={"rabi": control.rabi, "offset": control.offset},
            )
        )

        result.summary["resonances"] = self._resonances(delta, chi0, result)
        result.summary["kramers_kronig"] = self._kramers_kronig(delta, chi0, result.summary["resonances"])
        if control.enabled:
            result.summary["autler_townes"] = self._autler_townes(
                delta, chi_perp, chi0, at_position, at_width, control, result
            )
        result.summary["points"] = int(delta.size)
        return result

    def _resonances(self, delta: np.ndarray, chi0: np.ndarray, result: ScenarioResult) -> List[Dict[str, float]]:
        expected = self.table.resonance_detunings()
        strengths = {F: relative_strength(F, POPULATED_F0) for F in RESOLVED_F}
        fits = []
        for F in RESOLVED_F:
            centre = expected[F]
            if not delta[0] < centre < delta[-1]:
                result.warn(f"resonance F={F} at {centre:.3f} lies outside the detuning grid")
                continue
            fit = fit_lorentzian(delta, chi0.imag, centre, FIT_HALF_WINDOW)
            fits.append(
                {
                    "F": F,
                    "expected_centre": centre,
                    "centre": fit.centre,
                    "fwhm": fit.fwhm,
                    "height": fit.height,
                    "peak": fit.height + fit.offset,
                    "strength": strengths[F],
                }
            )
        if fits and fits[0]["F"] == 4:
            top = fits[0]
            for entry in fits:
                entry["height_ratio"] = entry["height"] / top["height"]
                entry["strength_ratio"] = entry["strength"] / top["strength"]
            top["oracle_height"] = 9.0 / 14.0
        for entry in fits:
            logger.info(
                f"[Spectrum] F={entry['F']}: centre {entry['centre']:+.4f}, FWHM {entry['fwhm']:.4f}, "
                f"height {entry['height']:.5f}"
            )
        return fits

    def _kramers_kronig(self, delta: np.ndarray, chi0: np.ndarray, fits: List[Dict[str, float]]) -> Dict[str, object]:
        """Compare Re chi0 with its Hilbert reconstruction at the resonances and half a linewidth off."""
        points = []
        for entry in fits:
            points.extend([entry["expected_centre"] - 0.5, entry["expected_centre"], entry["expected_centre"] + 0.5])
        if not points:
            return {}
        at = np.array(points)
        reconstructed = kramers_kronig(delta, chi0.imag, at=at)
        direct = np.interp(at, delta, chi0.real)
        scale = float(np.max(np.abs(chi0.imag)))
        return {
            "points": at,
            "direct": direct,
            "reconstructed": reconstructed,
            "max_deviation_over_peak": float(np.max(np.abs(reconstructed - direct)) / scale),
        }

    def _autler_townes(self, delta, chi_perp, chi0, position, width, control, result) -> Dict[str, float]:
        scale = at_width_scale(control, self.table)
        summary = {"pole_position": position, "pole_width": width, "width_scale": scale}
        if not math.isfinite(position):
            result.warn("no narrow control-induced resonance found")
            return summary
        window = max(10.0 * width, 0.05)
        feature = (chi_perp - chi0).imag
        try:
            fit = fit_lorentzian(delta, feature, position, window, width_guess=max(width, 1e-3))
        except (RuntimeError, ValueError) as e:
            result.warn(f"Lorentzian fit of the AT feature failed: {e}")
            return summary
        summary.update({"fit_centre": fit.centre, "fit_fwhm": fit.fwhm, "fit_height": fit.height})
        summary["fwhm_over_scale"] = fit.fwhm / scale if scale > 0 else math.nan
        logger.info(
            f"[Spectrum] AT feature at {fit.centre:+.4f} with FWHM {fit.fwhm:.4f} "
            f"(scale Omega^2/Delta43^2 = {scale:.4f})"
        )
        return summary
