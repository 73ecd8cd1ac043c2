"""Uniformly sampled signals in time and frequency."""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np


@dataclass
class TimeSeries:
    """Complex amplitudes (or real intensities) on a uniform time grid in 1/gamma."""

    t: np.ndarray
    values: np.ndarray
    label: str = ""
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def intensity(self) -> np.ndarray:
        if np.iscomplexobj(self.values):
            return np.abs(self.values) ** 2
        return np.asarray(self.values, dtype=float)

    @property
    def energy(self) -> float:
        """Sum of intensity times dt."""
        return float(np.sum(self.intensity) * self.dt)

    def shifted(self, tau: float) -> "TimeSeries":
        """Copy delayed by tau, interpolated on the same grid."""
        if np.iscomplexobj(self.values):
            re = np.interp(self.t - tau, self.t, self.values.real, left=0.0, right=0.0)
            im = np.interp(self.t - tau, self.t, self.values.imag, left=0.0, right=0.0)
            values = re + 1j * im
        else:
            values = np.interp(self.t - tau, self.t, self.values, left=0.0, right=0.0)
        return TimeSeries(self.t, values, label=self.label, meta=dict(self.meta))


@dataclass
class Spectrum:
    """Complex spectral amplitudes on a uniform grid of omega - omega43 in gamma."""

    omega: np.ndarray
    values: np.ndarray
    label: str = ""

    @property
    def d_omega(self) -> float:
        return float(self.omega[1] - self.omega[0])

    @property
    def energy(self) -> float:
        """Sum of |alpha(omega)|^2 d omega / 2 pi."""
        return float(np.sum(np.abs(self.values) ** 2) * abs(self.d_omega) / (2.0 * np.pi))
