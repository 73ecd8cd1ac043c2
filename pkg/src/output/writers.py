"""
Run artifacts: CSV tables, summary.json and manifest.json.

Numeric files depend only on the configuration and seed; wall time is
written to the manifest alone.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np

from src.utils.errors import OutputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12e"


@dataclass
class CsvTable:
    """A named block of columns with a descriptive header."""

    name: str
    title: str
    columns: Sequence[str]
    units: Sequence[str]
    data: np.ndarray
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.columns):
            raise OutputError(
                f"table '{self.name}' has shape {self.data.shape} but {len(self.columns)} columns"
            )
        if len(self.units) != len(self.columns):
            raise OutputError(f"table '{self.name}' needs one unit per column")

    @classmethod
    def from_columns(
        cls,
        name: str,
        title: str,
        columns: Dict[str, np.ndarray],
        units: Sequence[str],
        params: Dict[str, Any] = None,
    ) -> "CsvTable":
        data = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
        return cls(name=name, title=title, columns=list(columns), units=list(units), data=data, params=params or {})

    @property
    def filename(self) -> str:
        return f"{self.name}.csv"


def to_jsonable(value: Any) -> Any:
    """Plain-Python copy of ``value`` for json; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    return value


def dumps(data: Any) -> str:
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2) + "\n"


def config_hash(echo: Dict[str, Any]) -> str:
    """sha256 of the canonical config echo."""
    canonical = json.dumps(to_jsonable(echo), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _format_param(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return json.dumps(to_jsonable(value), sort_keys=True)


def render_csv(table: CsvTable) -> str:
    lines = [f"# {table.title}"]
    for key in sorted(table.params):
        lines.append(f"# {key} = {_format_param(table.params[key])}")
    lines.append("# units: " + ",".join(table.units))
    lines.append(",".join(table.columns))
    for row in table.data:
        lines.append(",".join(FLOAT_FORMAT % v for v in row))
    return "\n".join(lines) + "\n"


def _write_text(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    return path


def write_csv(table: CsvTable, directory: Path) -> Path:
    return _write_text(Path(directory) / table.filename, render_csv(table))


def write_json(data: Any, path: Path) -> Path:
    return _write_text(Path(path), dumps(data))


def write_run(
    directory: Path,
    scenario: str,
    tables: Sequence[CsvTable],
    summary: Dict[str, Any],
    echo: Dict[str, Any],
    seed: int,
    version: str,
    wall_time: float,
) -> List[Path]:
    """
    Write every artifact of a run.

    Returns:
        Paths written, manifest last

    Raises:
        OutputError: the directory or a file cannot be written
    """
    directory = Path(directory)
    written = [write_csv(table, directory) for table in tables]
    written.append(write_json(summary, directory / "summary.json"))

    manifest = {
        "scenario": scenario,
        "seed": seed,
        "version": version,
        "config": echo,
        "config_sha256": config_hash(echo),
        "wall_time_s": round(wall_time, 3),
        "artifacts": {path.name: sha256_file(path) for path in written},
    }
    written.append(write_json(manifest, directory / "manifest.json"))
    logger.info(f"[Output] Wrote {len(written)} files to {directory}")
    return written
