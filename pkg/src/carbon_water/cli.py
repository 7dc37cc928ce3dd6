"""CLI entry point for the carbon/water scheduler."""

import os
import sys
from pathlib import Path
from typing import Optional

import click
from dotenv import dotenv_values, find_dotenv, load_dotenv
from pydantic import ValidationError

from carbon_water import __version__
from carbon_water.config import POLICIES, RunConfig, settings_from_mapping
from carbon_water.errors import ConfigError
from carbon_water.logging_config import get_logger, log_error_with_details, setup_logging
from carbon_water.orchestrator import (
    EXIT_INPUT,
    RunResult,
    cmd_analyze,
    cmd_plotdata,
    cmd_run,
    cmd_sample,
    cmd_sweep,
)

ENV_PREFIX = "CW_"


def _merge(base: dict, update: dict) -> dict:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _join(values) -> Optional[str]:
    if not values:
        return None
    return ",".join(str(v) for v in values)


def load_config(
    config_path: Optional[Path],
    overrides: dict[str, Optional[str]],
    verbose: bool = False,
) -> RunConfig:
    """Load configuration from a config file, the environment and CLI flags.

    CLI flags take precedence over ``CW_*`` environment variables, which take
    precedence over the config file; unset values fall back to model defaults.
    Relative paths in the config file resolve against the file's directory,
    all others against the working directory.

    Args:
        config_path: Flat KEY=value config file
        overrides: CW_* values given on the command line (None = not given)
        verbose: Enable verbose logging

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: If the merged configuration is invalid
    """
    # Pick up a .env next to where the command runs
    load_dotenv(find_dotenv(usecwd=True))

    cwd = Path.cwd()
    try:
        layers = []
        if config_path is not None:
            layers.append(settings_from_mapping(dotenv_values(config_path), base_dir=config_path.resolve().parent))
        layers.append(
            settings_from_mapping({k: v for k, v in os.environ.items() if k.startswith(ENV_PREFIX)}, base_dir=cwd)
        )
        layers.append(settings_from_mapping(overrides, base_dir=cwd))

        nested: dict = {}
        for layer in layers:
            nested = _merge(nested, layer)
        nested["verbose"] = verbose
        return RunConfig.model_validate(nested)
    except ValidationError as e:
        raise ConfigError(f"Configuration error: {e}") from e
    except ValueError as e:
        raise ConfigError(f"Configuration error: {e}") from e


def _finish(result: RunResult) -> None:
    if not result.success:
        click.echo(f"Error: {result.error}", err=True)
    sys.exit(result.exit_code)


def _configure(config_path: Optional[Path], overrides: dict, verbose: bool) -> RunConfig:
    setup_logging(verbose)
    logger = get_logger(__name__)
    logger.info(f"Carbon/Water Scheduler v{__version__}")
    try:
        config = load_config(config_path, overrides, verbose)
    except ConfigError as e:
        log_error_with_details(logger, e)
        click.echo(str(e), err=True)
        sys.exit(EXIT_INPUT)

    logger.debug("Configuration loaded successfully")
    logger.debug(f"Policies: {', '.join(config.policies)}")
    logger.debug(f"Output directory: {config.out_dir}")
    return config


config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Flat KEY=value config file (CW_* keys)",
)
out_option = click.option("--out", "out_dir", type=click.Path(path_type=Path), help="Output directory")
policy_option = click.option(
    "--policy",
    "policies",
    multiple=True,
    type=click.Choice(POLICIES),
    help="Policy to simulate (repeatable)",
)
seed_option = click.option("--seed", type=int, help="Seed for every random draw (default: 0)")
verbose_option = click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")


@click.group()
@click.version_option(__version__, prog_name="carbon-water")
def main() -> None:
    """Carbon- and water-aware geo-distributed batch scheduling simulator.

    \b
    EXAMPLES:
    ---------
    # Generate the bundled sample dataset
    carbon-water sample --out sample

    \b
    # Compare the co-optimizing policy against the home baseline
    carbon-water run --config sample/config.env --policy home --policy cooptimize --out results

    \b
    # Sweep delay tolerances and capacity scales
    carbon-water sweep --config sample/config.env --tolerance 0.25 --tolerance 1.0 --workers 4
    """


@main.command("run")
@config_option
@out_option
@policy_option
@click.option("--tolerance", type=float, help="Delay tolerance (default: 0.5)")
@click.option("--capacity-scale", type=float, help="Relative utilization; slots are divided by it")
@seed_option
@verbose_option
def run_command(
    config_path: Optional[Path],
    out_dir: Optional[Path],
    policies: tuple[str, ...],
    tolerance: Optional[float],
    capacity_scale: Optional[float],
    seed: Optional[int],
    verbose: bool,
) -> None:
    """Run each policy once and write outcomes.csv, metrics.csv and overhead.csv."""
    config = _configure(
        config_path,
        {
            "CW_OUT_DIR": str(out_dir) if out_dir else None,
            "CW_POLICIES": _join(policies),
            "CW_TOLERANCE": None if tolerance is None else repr(tolerance),
            "CW_CAPACITY_SCALE": None if capacity_scale is None else repr(capacity_scale),
            "CW_SEED": None if seed is None else str(seed),
        },
        verbose,
    )
    _finish(cmd_run(config))


@main.command("sweep")
@config_option
@out_option
@policy_option
@click.option("--tolerance", "tolerances", multiple=True, type=float, help="Tolerance axis value (repeatable)")
@click.option(
    "--capacity-scale", "capacity_scales", multiple=True, type=float, help="Capacity axis value (repeatable)"
)
@seed_option
@click.option("--workers", type=int, help="Parallel worker processes (default: 1)")
@verbose_option
def sweep_command(
    config_path: Optional[Path],
    out_dir: Optional[Path],
    policies: tuple[str, ...],
    tolerances: tuple[float, ...],
    capacity_scales: tuple[float, ...],
    seed: Optional[int],
    workers: Optional[int],
    verbose: bool,
) -> None:
    """Run every policy at every (tolerance, capacity scale) point."""
    config = _configure(
        config_path,
        {
            "CW_OUT_DIR": str(out_dir) if out_dir else None,
            "CW_POLICIES": _join(policies),
            "CW_TOLERANCES": _join(repr(t) for t in tolerances) if tolerances else None,
            "CW_CAPACITY_SCALES": _join(repr(s) for s in capacity_scales) if capacity_scales else None,
            "CW_SEED": None if seed is None else str(seed),
            "CW_WORKERS": None if workers is None else str(workers),
        },
        verbose,
    )
    _finish(cmd_sweep(config))


@main.command("plotdata")
@click.argument("metric_files", nargs=-1, type=click.Path(path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("."), show_default=True)
@click.option(
    "--x",
    "x_axis",
    type=click.Choice(["tolerance", "capacity_scale"]),
    default="tolerance",
    show_default=True,
    help="Axis the series run along",
)
@verbose_option
def plotdata_command(metric_files: tuple[Path, ...], out_dir: Path, x_axis: str, verbose: bool) -> None:
    """Pivot METRIC_FILES into series.csv (one group per policy)."""
    setup_logging(verbose)
    _finish(cmd_plotdata(metric_files, out_dir, x_axis))


@main.command("analyze")
@config_option
@out_option
@verbose_option
def analyze_command(config_path: Optional[Path], out_dir: Optional[Path], verbose: bool) -> None:
    """Summarize region intensities (regions.csv) and energy sources (sources.csv)."""
    config = _configure(config_path, {"CW_OUT_DIR": str(out_dir) if out_dir else None}, verbose)
    _finish(cmd_analyze(config))


@main.command("sample")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Target directory")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--days", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--jobs", "n_jobs", type=click.IntRange(min=0), default=2000, show_default=True)
@verbose_option
def sample_command(out_dir: Path, seed: int, days: int, n_jobs: int, verbose: bool) -> None:
    """Write the synthetic sample dataset and a ready-to-run config.env."""
    setup_logging(verbose)
    _finish(cmd_sample(out_dir, seed=seed, days=days, n_jobs=n_jobs))


if __name__ == "__main__":
    main()
