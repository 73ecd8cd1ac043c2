"""Run artifacts and console presentation."""

from .writers import CsvTable, config_hash, render_csv, sha256_file, write_csv, write_json, write_run
from .console import console, display_result, list_scenarios

__all__ = [
    "CsvTable",
    "config_hash",
    "render_csv",
    "sha256_file",
    "write_csv",
    "write_json",
    "write_run",
    "console",
    "display_result",
    "list_scenarios",
]
