"""
Cold-atom light transport simulator - Main Entry Point

Usage:
    # Susceptibility spectrum with the default control field
    python -m src.main spectrum

    # Single scattering toward X only, carrier on the AT resonance
    python -m src.main scatter --direction X --tune-to-at

    # Multiple scattering with 50000 paths on 8 threads
    python -m src.main diffuse --paths 50000 --workers 8 --seed 7

    # Memory channel with the fidelity curve
    python -m src.main memory --fidelity-sweep --set memory.nbar=0.5

    # List available scenarios
    python -m src.main --list-scenarios
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from dotenv import load_dotenv

from src import __version__
from src.config import RunConfig, get_config, parse_config
from src.output.console import (
    console,
    display_artifacts,
    display_result,
    display_warnings,
    list_scenarios,
)
from src.output.writers import write_run
from src.physics.atomic_data import TransitionTable
from src.scenarios import ScenarioRegistry, ScenarioResult
from src.utils import setup_logger, get_logger
from src.utils.errors import (
    ConfigError,
    ContractViolation,
    OutputError,
    ParameterError,
    SimulationError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTATION = 3
EXIT_OUTPUT = 4
EXIT_INTERRUPTED = 130


def exit_code(error: BaseException) -> int:
    """Map a simulator error to the process exit status."""
    if isinstance(error, OutputError):
        return EXIT_OUTPUT
    if isinstance(error, (ConfigError, ParameterError, ContractViolation)):
        return EXIT_CONFIG
    return EXIT_COMPUTATION


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for CLI."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=Path, help="TOML run configuration")
    common.add_argument("--out", "-o", type=Path, help="Output directory (default: $COLDLIGHT_OUTPUT_DIR/<scenario>)")
    common.add_argument("--seed", type=int, help="Master seed, unsigned 64-bit")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config value, e.g. --set control.rabi=2.5 (repeatable)",
    )
    common.add_argument("--workers", type=int, help="Worker threads for the Monte Carlo")
    common.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        description="Simulate delayed diffuse light in an ultracold 85Rb cloud under a Raman control field",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s spectrum                              Susceptibility spectrum
  %(prog)s scatter --direction X --direction Y   Single scattering toward X and Y
  %(prog)s diffuse --paths 20000 --seed 7        Multiple-scattering series
  %(prog)s memory --fidelity-sweep               Memory channel figures of merit
  %(prog)s --list-scenarios                      List available scenarios

Exit codes: 0 success, 2 configuration error, 3 computation error, 4 output error.
        """,
    )
    parser.add_argument("--list-scenarios", action="store_true", help="List available scenarios and exit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    sub = parser.add_subparsers(dest="scenario", metavar="SCENARIO")
    sub.add_parser("spectrum", parents=[common], help="Susceptibility spectrum and AT feature")

    scatter = sub.add_parser("scatter", parents=[common], help="Single-scattering time traces")
    scatter.add_argument(
        "--direction", "-d", action="append", metavar="AXIS", help="Output axis X, Y or Z (repeatable)"
    )
    scatter.add_argument("--tune-to-at", action="store_true", help="Put the carrier on the AT resonance")

    diffuse = sub.add_parser("diffuse", parents=[common], help="Multiple-scattering Monte Carlo")
    diffuse.add_argument("--paths", "-n", type=int, help="Number of Monte-Carlo paths")
    diffuse.add_argument("--tune-to-at", action="store_true", help="Put the carrier on the AT resonance")

    memory = sub.add_parser("memory", parents=[common], help="Quantum-memory channel")
    memory.add_argument("--fidelity-sweep", action="store_true", help="Also write the fidelity-vs-x curve")
    return parser


def flag_overrides(args: argparse.Namespace) -> List[str]:
    """Translate CLI flags into config overrides so the echo records them."""
    overrides = [f"scenario={json.dumps(args.scenario)}"]
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"mc.workers={args.workers}")
    if getattr(args, "paths", None) is not None:
        overrides.append(f"mc.n_paths={args.paths}")
    if getattr(args, "direction", None):
        overrides.append(f"scatter.directions={json.dumps(args.direction)}")
    if getattr(args, "tune_to_at", False):
        overrides.append("pulse.tune_to_at=true")
    if getattr(args, "fidelity_sweep", False):
        overrides.append("memory.fidelity_sweep=true")
    return overrides


def output_directory(args: argparse.Namespace, config: RunConfig) -> Path:
    if args.out is not None:
        return args.out
    if config.output_dir:
        return Path(config.output_dir)
    return Path(get_config().output.directory) / config.scenario


def run(
    scenario: str,
    config: RunConfig,
    out: Path,
    workers: int = 1,
    table: Optional[TransitionTable] = None,
) -> ScenarioResult:
    """
    Run one scenario and write its artifacts.

    Raises:
        SimulationError: from the scenario, or OutputError while writing
    """
    logger = get_logger()
    logger.info(f"[bold]Running {scenario}[/] (seed {config.seed}) -> {out}")
    result = ScenarioRegistry.create(scenario, config, table=table, workers=workers).execute()
    if not result.success:
        raise result.exception
    paths = write_run(
        out,
        scenario,
        result.tables,
        result.summary,
        config.echo(),
        config.seed,
        __version__,
        result.wall_time,
    )
    result.summary["written"] = [str(p) for p in paths]
    return result


def main_cli(args: argparse.Namespace) -> int:
    app = get_config()
    verbose = getattr(args, "verbose", False) or app.debug
    level = logging.DEBUG if verbose else getattr(logging, app.logging.level, logging.INFO)
    setup_logger(level=level, log_file=app.logging.file or None)
    logger = get_logger()

    if args.list_scenarios:
        list_scenarios(ScenarioRegistry.get_all())
        return EXIT_OK
    if not args.scenario:
        console.print("[red]A scenario is required[/] (spectrum, scatter, diffuse or memory); see --help")
        return EXIT_CONFIG

    try:
        config = parse_config(args.config, flag_overrides(args) + list(args.overrides))
        table = TransitionTable.load(app.compute.atomic_data) if app.compute.atomic_data else None
        result = run(args.scenario, config, output_directory(args, config), app.compute.workers, table)
    except ConfigError as e:
        logger.error(f"[red]Configuration error:[/] {e}")
        for path, expected, actual in e.details:
            console.print(f"  [red]•[/] {path}: expected {expected}, got {actual}")
        return EXIT_CONFIG
    except SimulationError as e:
        logger.error(f"[red]{type(e).__name__}[/] {e}")
        return exit_code(e)

    display_result(args.scenario, result.summary)
    display_warnings(result.warnings)
    console.print(f"\n[dim]Finished {args.scenario} in {result.wall_time:.1f}s; artifacts:[/]")
    display_artifacts(Path(p) for p in result.summary["written"])
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    load_dotenv()
    parser = create_parser()
    args = parser.parse_args(argv)

    try:
        return main_cli(args)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user[/]")
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
