"""Rich console presentation of run results."""

import math
from pathlib import Path
from typing import Dict, Iterable, Type

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

console = Console()


def format_value(value) -> str:
    """Compact numeric formatting for tables."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "n/a"
        if value != 0 and (abs(value) < 1e-3 or abs(value) >= 1e5):
            return f"{value:.3e}"
        return f"{value:.5f}"
    return str(value)


def list_scenarios(scenarios: Dict[str, Type]) -> None:
    """Display all registered scenarios."""
    table = Table(title="Available Scenarios", show_header=True, header_style="bold cyan")
    table.add_column("Name", style="cyan")
    table.add_column("Display Name", style="green")
    table.add_column("Description", style="dim")
    for name, scenario_class in scenarios.items():
        table.add_row(name, scenario_class.display_name, scenario_class.description)
    console.print(table)


def display_spectrum(summary: Dict) -> None:
    table = Table(title="Control-free resonances", header_style="bold cyan")
    table.add_column("F", style="cyan")
    table.add_column("Centre", justify="right")
    table.add_column("FWHM", justify="right")
    table.add_column("Height", justify="right")
    table.add_column("Height ratio", justify="right", style="green")
    table.add_column("Strength ratio", justify="right", style="yellow")
    for entry in summary.get("resonances", []):
        table.add_row(
            str(entry["F"]),
            format_value(entry["centre"]),
            format_value(entry["fwhm"]),
            format_value(entry["height"]),
            format_value(entry.get("height_ratio", math.nan)),
            format_value(entry.get("strength_ratio", math.nan)),
        )
    console.print(table)
    at = summary.get("autler_townes")
    if at:
        lines = [f"{key}: {format_value(value)}" for key, value in sorted(at.items())]
        console.print(Panel("\n".join(lines), title="AT feature", border_style="magenta"))


def display_scatter(summary: Dict) -> None:
    table = Table(title="Single scattering", header_style="bold cyan")
    table.add_column("Direction", style="cyan")
    table.add_column("Control", style="green")
    table.add_column("Elastic", justify="right")
    table.add_column("Inelastic", justify="right")
    table.add_column("Inel/El", justify="right", style="yellow")
    table.add_column("Mean arrival", justify="right")
    table.add_column("Tail > 2T", justify="right")
    for direction, entry in summary.get("directions", {}).items():
        for state in ("off", "on"):
            data = entry[state]
            table.add_row(
                direction,
                state,
                format_value(data["energies"]["elastic"]),
                format_value(data["energies"]["raman_inelastic"]),
                format_value(data["inelastic_over_elastic"]),
                format_value(data.get("elastic_mean_arrival", math.nan)),
                format_value(data.get("elastic_tail_after_2T", math.nan)),
            )
    console.print(table)


def display_diffuse(summary: Dict) -> None:
    for label in ("off", "on"):
        stats = summary.get(label, {}).get("statistics")
        if not stats:
            continue
        table = Table(title=f"Diffuse orders, control {label}", header_style="bold cyan")
        table.add_column("Order", style="cyan", justify="right")
        table.add_column("Energy", justify="right")
        table.add_column("Error", justify="right", style="dim")
        table.add_column("Fraction", justify="right", style="green")
        table.add_column("Mean arrival", justify="right")
        table.add_column("Inelastic", justify="right", style="yellow")
        table.add_column("Path length", justify="right", style="dim")
        for order in stats["orders"]:
            table.add_row(
                str(order["order"]),
                format_value(order["energy"]),
                format_value(order["energy_error"]),
                format_value(order["fraction"]),
                format_value(order["mean_arrival"]),
                format_value(order["inelastic_fraction"]),
                format_value(order["mean_path_length"]),
            )
        console.print(table)
        console.print(
            f"[dim]Total {format_value(stats['total_energy'])} +- {format_value(stats['total_energy_error'])}, "
            f"mean arrival {format_value(stats['mean_arrival'])}, estimator z = {format_value(stats['estimator_z'])}[/]"
        )


def display_memory(summary: Dict) -> None:
    werner = summary["werner"]
    photons = summary["photon_number"]
    lines = [
        f"eta = {format_value(summary['channel']['eta'])}, nbar = {format_value(summary['channel']['nbar'])}",
        f"Wigner normalization: {format_value(summary['wigner']['normalization'])}",
        f"P(0) = {format_value(photons['p0'])}, P(1) = {format_value(photons['p1'])}",
        f"Werner x = {format_value(werner['x'])}, fidelity = {format_value(werner['fidelity'])}",
        f"Classification: [bold]{werner['classification']}[/]",
    ]
    console.print(Panel("\n".join(lines), title="Memory channel", border_style="cyan"))


DISPLAYS = {
    "spectrum": display_spectrum,
    "scatter": display_scatter,
    "diffuse": display_diffuse,
    "memory": display_memory,
}


def display_result(scenario: str, summary: Dict) -> None:
    display = DISPLAYS.get(scenario)
    if display is not None:
        display(summary)


def display_artifacts(paths: Iterable[Path]) -> None:
    for path in paths:
        console.print(f"  [green]•[/] {path}")


def display_warnings(warnings: Iterable[str]) -> None:
    warnings = list(warnings)
    if warnings:
        console.print("\n[bold yellow]Warnings:[/]")
        for message in warnings:
            console.print(f"  [yellow]• {message}[/]")
