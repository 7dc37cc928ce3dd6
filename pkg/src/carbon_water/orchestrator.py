"""Orchestration of runs, sweeps and derived-data exports."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import repeat
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .analysis import (
    REGION_SUMMARY_COLUMNS,
    SOURCE_SUMMARY_COLUMNS,
    intensity_correlation,
    region_summary,
    source_comparison,
)
from .config import BASELINE_POLICY, RunConfig, dump_settings
from .errors import CarbonWaterError, ConfigError, DataError
from .ingest import Dataset, load_dataset, scale_arrivals
from .logging_config import get_logger, log_error_with_details, log_progress
from .mapper import (
    map_metrics_to_row,
    map_outcome_to_row,
    map_round_times_to_rows,
    metric_columns,
    pivot_series,
)
from .models import JobOutcome, RunMetrics
from .repository import ResultRepository, overhead_summary, read_metric_files
from .sample import generate_sample
from .simulator import compare, run, select_regions
from .validation import validate_server

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


@dataclass
class PolicyRun:
    """One policy simulated at one (tolerance, capacity scale) point."""

    policy: str
    tolerance: float
    capacity_scale: float
    metrics: RunMetrics
    outcomes: list[JobOutcome] = field(default_factory=list)

    @property
    def mean_exec(self) -> Optional[float]:
        if not self.outcomes:
            return None
        return sum(o.exec_time for o in self.outcomes) / len(self.outcomes)


@dataclass
class RunResult:
    """Result of a command."""

    success: bool
    exit_code: int = EXIT_OK
    out_dir: Optional[Path] = None
    rows: int = 0
    runs: list[PolicyRun] = field(default_factory=list)
    error: Optional[str] = None


def exit_code_for(error: Exception) -> int:
    """Input and configuration problems exit with 2, everything else with 1."""
    if isinstance(error, (ConfigError, DataError)):
        return EXIT_INPUT
    return EXIT_FAILURE


def _guarded(stage: str, action: Callable[[], RunResult]) -> RunResult:
    try:
        return action()
    except CarbonWaterError as e:
        log_error_with_details(logger, e, context={"stage": stage})
        return RunResult(success=False, exit_code=exit_code_for(e), error=str(e))
    except Exception as e:
        error_msg = f"Unexpected error during {stage}: {e}"
        log_error_with_details(logger, e, context={"stage": stage})
        return RunResult(success=False, exit_code=EXIT_FAILURE, error=error_msg)


def load_inputs(config: RunConfig) -> Dataset:
    """Load every dataset the config references and apply trace scaling."""
    data = config.data
    log_progress(logger, "Loading datasets", details={"env": data.env_path, "trace": data.trace_path})
    dataset = load_dataset(
        data.env_path,
        data.trace_path,
        data.profiles_path,
        data.latency_path,
        mix_path=data.mix_path,
        sources_path=data.sources_path,
    )
    if config.simulation.arrival_scale != 1.0:
        dataset = replace(dataset, trace=scale_arrivals(dataset.trace, config.simulation.arrival_scale))
    log_progress(
        logger,
        "Datasets loaded",
        details={"regions": len(dataset.envs), "jobs": len(dataset.trace), "benchmarks": len(dataset.profiles)},
    )
    return dataset


def simulate_cell(config: RunConfig, dataset: Dataset, tolerance: float, capacity_scale: float) -> list[PolicyRun]:
    """
    Run every configured policy at one sweep point and compare to the baseline.

    The home baseline is always simulated; it is reported only when listed.

    Returns:
        One PolicyRun per configured policy, in configured order
    """
    scheduler = config.scheduler.model_copy(update={"tolerance": tolerance})
    simulation = config.simulation.model_copy(update={"capacity_scale": capacity_scale})
    server = config.server.to_spec()
    validate_server(server)

    names = list(config.policies)
    if BASELINE_POLICY not in names:
        names.append(BASELINE_POLICY)

    results = {
        name: run(dataset.trace, dataset.envs, dataset.latency, dataset.profiles, server, scheduler, name, simulation)
        for name in names
    }
    compared = compare({name: metrics for name, (metrics, _) in results.items()}, BASELINE_POLICY)

    return [
        PolicyRun(
            policy=name,
            tolerance=tolerance,
            capacity_scale=capacity_scale,
            metrics=compared[name],
            outcomes=results[name][1],
        )
        for name in config.policies
    ]


def _persist(config: RunConfig, dataset: Dataset, runs: Sequence[PolicyRun]) -> int:
    regions = select_regions(dataset.envs, dataset.latency, config.simulation.regions)
    repo = ResultRepository(config.out_dir)

    repo.write_outcomes(
        map_outcome_to_row(o, r.policy, r.tolerance, r.capacity_scale) for r in runs for o in r.outcomes
    )
    metric_rows = [map_metrics_to_row(r.metrics, r.tolerance, r.capacity_scale, regions) for r in runs]
    repo.write_metrics(metric_rows, metric_columns(regions))
    repo.write_overhead(
        row for r in runs for row in map_round_times_to_rows(r.metrics, r.tolerance, r.capacity_scale, r.mean_exec)
    )
    repo.write_config(dump_settings(config))

    for r in runs:
        median, p95 = overhead_summary(r.metrics.round_times)
        if r.mean_exec:
            logger.info(
                "%s (tol=%g, scale=%g): decision time median %.2f ms, p95 %.2f ms (%.4f%% of mean execution)",
                r.policy,
                r.tolerance,
                r.capacity_scale,
                1e3 * median,
                1e3 * p95,
                100.0 * median / r.mean_exec,
            )
    return len(metric_rows)


def _run(config: RunConfig) -> RunResult:
    dataset = load_inputs(config)
    runs = simulate_cell(config, dataset, config.scheduler.tolerance, config.simulation.capacity_scale)
    rows = _persist(config, dataset, runs)
    log_progress(logger, "Run completed", details={"policies": len(runs), "out": config.out_dir})
    return RunResult(success=True, out_dir=config.out_dir, rows=rows, runs=runs)


def cmd_run(config: RunConfig) -> RunResult:
    """Run every configured policy once and write outcomes, metrics and overhead files."""
    return _guarded("run", lambda: _run(config))


def _sweep_cell(config: RunConfig, dataset: Dataset, cell: tuple[float, float]) -> list[PolicyRun]:
    tolerance, capacity_scale = cell
    return simulate_cell(config, dataset, tolerance, capacity_scale)


def _sweep(config: RunConfig) -> RunResult:
    dataset = load_inputs(config)
    cells = [(t, s) for s in config.capacity_scales for t in config.tolerances]
    log_progress(logger, "Starting sweep", details={"cells": len(cells), "workers": config.workers})

    if config.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_sweep_cell, repeat(config), repeat(dataset), cells))
    else:
        results = [_sweep_cell(config, dataset, cell) for cell in cells]

    runs = [r for cell_runs in results for r in cell_runs]
    rows = _persist(config, dataset, runs)
    log_progress(logger, "Sweep completed", details={"rows": rows, "out": config.out_dir})
    return RunResult(success=True, out_dir=config.out_dir, rows=rows, runs=runs)


def cmd_sweep(config: RunConfig) -> RunResult:
    """Run every policy at every (tolerance, capacity scale) point."""
    return _guarded("sweep", lambda: _sweep(config))


def cmd_plotdata(metric_files: Iterable[Path], out_dir: Path, x_axis: str = "tolerance") -> RunResult:
    """Pivot metrics files into ``series.csv``."""

    def action() -> RunResult:
        if x_axis not in ("tolerance", "capacity_scale"):
            raise ConfigError(f"Unknown x axis: {x_axis}", details={"x": x_axis})
        series = pivot_series(read_metric_files(metric_files), x_axis)
        ResultRepository(out_dir).write_series(series)
        log_progress(logger, "Wrote plot series", details={"points": len(series), "out": out_dir})
        return RunResult(success=True, out_dir=out_dir, rows=len(series))

    return _guarded("plotdata", action)


def cmd_analyze(config: RunConfig) -> RunResult:
    """Write per-region and per-source observations of the dataset."""

    def action() -> RunResult:
        dataset = load_inputs(config)
        repo = ResultRepository(config.out_dir)
        regions = region_summary(dataset.envs)
        repo.write_table("regions.csv", regions, REGION_SUMMARY_COLUMNS)
        if dataset.sources:
            repo.write_table("sources.csv", source_comparison(dataset.sources), SOURCE_SUMMARY_COLUMNS)

        across = intensity_correlation(dataset.envs)["across_regions"]
        if across is not None:
            logger.info("Carbon/water intensity correlation across regions: %.3f", across)
        return RunResult(success=True, out_dir=config.out_dir, rows=len(regions))

    return _guarded("analyze", action)


def cmd_sample(out_dir: Path, seed: int = 0, days: int = 10, n_jobs: int = 2000) -> RunResult:
    """Generate the synthetic sample dataset."""

    def action() -> RunResult:
        paths = generate_sample(out_dir, seed=seed, days=days, n_jobs=n_jobs)
        return RunResult(success=True, out_dir=Path(out_dir), rows=len(paths))

    return _guarded("sample", action)
