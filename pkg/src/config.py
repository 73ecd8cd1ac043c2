"""
Centralized configuration for the cold-atom light transport simulator.

Two layers:
- application settings (logging, output location, worker count) come from
  environment variables, optionally loaded from a .env file;
- the run configuration of a scenario is a validated pydantic model read
  from a TOML file and dotted ``--set key=value`` overrides.
"""

import copy
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.physics.dressed_green import ControlField
from src.physics.medium import CloudConfig
from src.physics.pulse_transport import PulseConfig, TimeGrid
from src.services.memory_channel import ChannelAnalysisConfig
from src.models.channel import ChannelState
from src.transport.diffuse_mc import DiffusionSettings, StorageGate
from src.transport.rng import MAX_SEED
from src.utils.errors import ConfigError


def _env_bool(key: str, default: bool = False) -> bool:
    """Get boolean from environment variable."""
    val = os.getenv(key, str(default)).lower()
    return val in ("true", "1", "yes", "on")


def _env_int(key: str, default: int) -> int:
    """Get integer from environment variable."""
    try:
        return int(os.getenv(key, str(default)))
    except ValueError:
        return default


def _env_str(key: str, default: str = "") -> str:
    return os.getenv(key, default)


# ============================================================================
# Application settings (environment)
# ============================================================================


@dataclass
class LoggingConfig:
    """Console and file logging."""
    level: str = field(default_factory=lambda: _env_str("COLDLIGHT_LOG_LEVEL", "INFO").upper())
    file: str = field(default_factory=lambda: _env_str("COLDLIGHT_LOG_FILE"))


@dataclass
class OutputConfig:
    """Where run artifacts go when --out is not given."""
    directory: str = field(default_factory=lambda: _env_str("COLDLIGHT_OUTPUT_DIR", "runs"))


@dataclass
class ComputeConfig:
    """Parallelism and data sources."""
    # Default worker threads for the diffusion Monte Carlo
    workers: int = field(default_factory=lambda: max(1, _env_int("COLDLIGHT_WORKERS", 1)))

    # Alternate atomic table (TOML); empty means compiled-in values
    atomic_data: str = field(default_factory=lambda: _env_str("COLDLIGHT_ATOMIC_DATA"))


@dataclass
class AppConfig:
    """Main application configuration."""
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    compute: ComputeConfig = field(default_factory=ComputeConfig)

    # Debug mode
    debug: bool = field(default_factory=lambda: _env_bool("COLDLIGHT_DEBUG", False))


# Global config instance
_config: Optional[AppConfig] = None


def get_config() -> AppConfig:
    """Get or create global config instance."""
    global _config
    if _config is None:
        _config = AppConfig()
    return _config


def reload_config() -> AppConfig:
    """Reload configuration from environment."""
    global _config
    _config = AppConfig()
    return _config


# ============================================================================
# Run configuration (TOML + overrides)
# ============================================================================

SCENARIOS = ("spectrum", "scatter", "diffuse", "memory")
DEFAULT_B0 = 10.0


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CloudSection(_Section):
    """Gaussian cloud; give either the optical depth b0 or the peak density."""

    b0: Optional[float] = Field(default=None, gt=0)
    r0_lambda: float = Field(default=200.0, gt=0)
    n0_lambda3: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _exclusive_density(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        has_b0 = data.get("b0") is not None
        has_n0 = data.get("n0_lambda3") is not None
        if has_b0 and has_n0:
            raise ValueError("cloud.b0 and cloud.n0_lambda3 are mutually exclusive; set only one")
        if not has_b0 and not has_n0:
            data = {**data, "b0": DEFAULT_B0}
        return data

    def build(self) -> CloudConfig:
        if self.n0_lambda3 is not None:
            return CloudConfig(n0=self.n0_lambda3, r0=self.r0_lambda)
        return CloudConfig.from_b0(self.b0, self.r0_lambda)


class PulseSection(_Section):
    duration: float = Field(default=60.0, gt=0, description="T in 1/gamma")
    detuning: float = Field(default=0.025, description="carrier detuning from the F0=3 -> F=4 line in gamma")
    aperture: float = Field(default=0.5, ge=0, description="flat input radius in r0")
    tune_to_at: bool = False

    def build(self) -> PulseConfig:
        return PulseConfig(duration=self.duration, detuning=self.detuning, aperture=self.aperture)


class ControlSection(_Section):
    rabi: float = Field(default=3.0, ge=0, description="Omega_c in gamma")
    offset: float = Field(default=-0.4, description="omega_c - omega42 in gamma")
    epsilon: float = Field(default=1e-8, gt=0)

    def build(self) -> ControlField:
        return ControlField(rabi=self.rabi, offset=self.offset, epsilon=self.epsilon)


class GridSection(_Section):
    """Time grid of single scattering and the detuning grid of the spectrum."""

    samples: int = Field(default=2048, ge=2048)
    padding: int = Field(default=4, ge=1)
    span: float = Field(default=8.0, gt=4.0)
    start: float = Field(default=-2.0, le=0.0)
    delta_min: float = -40.0
    delta_max: float = 30.0
    delta_points: int = Field(default=4096, ge=16)
    refine_factor: int = Field(default=8, ge=1)
    refine_half_width: float = Field(default=0.5, gt=0)

    @model_validator(mode="after")
    def _ordered_range(self) -> "GridSection":
        if self.delta_max <= self.delta_min:
            raise ValueError(f"grid.delta_max ({self.delta_max}) must exceed grid.delta_min ({self.delta_min})")
        return self

    def time_grid(self, duration: float) -> TimeGrid:
        return TimeGrid.for_pulse(duration, self.samples, self.padding, self.span, self.start)


class StorageGateSection(_Section):
    enabled: bool = False
    hold: float = Field(default=0.0, ge=0)
    window: float = Field(default=0.05, gt=0)
    centre: Optional[float] = Field(default=None, description="defaults to the AT resonance")
    after_order: int = Field(default=1, ge=1)


class MonteCarloSection(_Section):
    n_paths: int = Field(default=20000, gt=0)
    max_order: Optional[int] = Field(default=None, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)
    chunk_size: int = Field(default=64, ge=1)
    kernel: str = "atomic"
    roulette_threshold: float = Field(default=1e-12, gt=0)
    roulette_survival: float = Field(default=0.1, gt=0, le=1)
    detectors: List[str] = Field(default_factory=lambda: ["+X", "+Y", "+Z"])
    band_halfwidth: float = Field(default=0.5, gt=0)
    grid_samples: int = Field(default=512, ge=64)
    grid_padding: int = Field(default=4, ge=1)
    storage_gate: StorageGateSection = Field(default_factory=StorageGateSection)

    def settings(self, workers: int = 1, gate_centre: float = 0.0) -> DiffusionSettings:
        gate = self.storage_gate
        return DiffusionSettings(
            max_order=self.max_order,
            workers=self.workers or workers,
            chunk_size=self.chunk_size,
            roulette_threshold=self.roulette_threshold,
            roulette_survival=self.roulette_survival,
            detectors=tuple(self.detectors),
            band_halfwidth=self.band_halfwidth,
            grid_samples=self.grid_samples,
            grid_padding=self.grid_padding,
            storage_gate=StorageGate(
                enabled=gate.enabled,
                hold=gate.hold,
                centre=gate_centre if gate.centre is None else gate.centre,
                window=gate.window,
                after_order=gate.after_order,
            ),
        )


class MemorySection(_Section):
    eta: float = Field(default=1.0, ge=0, le=1)
    nbar: float = Field(default=1.0, ge=0)
    n_max: int = Field(default=20, ge=2)
    grid_points: int = Field(default=257, ge=33)
    fidelity_sweep: bool = False
    sweep_points: int = Field(default=101, ge=2)
    wavepacket_width: float = Field(default=1.0, gt=0)
    wavepacket_offset: float = Field(default=2.0, ge=0)
    stretch_factors: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])

    def channel(self) -> ChannelState:
        return ChannelState(eta=self.eta, nbar=self.nbar)

    def analysis(self) -> ChannelAnalysisConfig:
        return ChannelAnalysisConfig(n_max=self.n_max, grid_points=self.grid_points)


class ScatterSection(_Section):
    directions: List[str] = Field(default_factory=lambda: ["X", "Y", "Z"])
    reference_scale: Optional[float] = Field(default=None, gt=0)


class RunConfig(_Section):
    """Fully validated configuration of one run."""

    scenario: Optional[str] = None
    seed: int = Field(default=7, ge=0, le=MAX_SEED)
    output_dir: Optional[str] = None
    cloud: CloudSection = Field(default_factory=CloudSection)
    pulse: PulseSection = Field(default_factory=PulseSection)
    control: ControlSection = Field(default_factory=ControlSection)
    grid: GridSection = Field(default_factory=GridSection)
    mc: MonteCarloSection = Field(default_factory=MonteCarloSection)
    memory: MemorySection = Field(default_factory=MemorySection)
    scatter: ScatterSection = Field(default_factory=ScatterSection)

    @model_validator(mode="after")
    def _known_scenario(self) -> "RunConfig":
        if self.scenario is not None and self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {', '.join(SCENARIOS)}, got '{self.scenario}'")
        return self

    def echo(self) -> Dict[str, Any]:
        """JSON-ready dump that ``parse_config`` reads back into an equal object."""
        return self.model_dump(mode="json")


def _literal(text: str) -> Any:
    """Parse an override value as a TOML literal, else keep it as a string."""
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply dotted ``key=value`` overrides to a nested dict.

    Raises:
        ConfigError: malformed override
    """
    result = copy.deepcopy(data)
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(
                f"override '{item}' is not of the form key=value",
                details=[(key or "<empty>", "key=value", item)],
            )
        node = result
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(
                    f"override '{item}' descends into non-table '{part}'",
                    details=[(key, "table", repr(child))],
                )
            node = child
        node[parts[-1]] = _literal(raw.strip())
    return result


def _details(error: ValidationError) -> List[Tuple[str, str, str]]:
    details = []
    for entry in error.errors():
        path = ".".join(str(p) for p in entry.get("loc", ())) or "<root>"
        actual = entry.get("input")
        details.append((path, entry.get("msg", ""), repr(actual)))
    return details


def load_toml(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", details=[("--config", "existing file", str(path))])
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config file {path} is not valid TOML: {e}", details=[("--config", "TOML", str(e))])


def build_config(data: Dict[str, Any]) -> RunConfig:
    """
    Validate a nested dict into a RunConfig.

    Raises:
        ConfigError: schema violation, with (field, expected, actual) details
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        details = _details(e)
        summary = "; ".join(f"{path}: {msg} (got {actual})" for path, msg, actual in details)
        raise ConfigError(f"invalid run configuration: {summary}", details=details) from None


def parse_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Sequence[str] = (),
    base: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """
    Read, merge and validate a run configuration.

    Args:
        path: TOML file; None means defaults only
        overrides: dotted key=value strings, values parsed as TOML literals
        base: dict applied before the file (used by the CLI for flags)

    Returns:
        Validated RunConfig
    """
    data: Dict[str, Any] = copy.deepcopy(base) if base else {}
    if path is not None:
        data = _merge(data, load_toml(path))
    data = apply_overrides(data, overrides)
    return build_config(data)


def _merge(left: Dict[str, Any], right: Dict[str, Any]) -> Dict[str, Any]:
    result = copy.deepcopy(left)
    for key, value in right.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _merge(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result
