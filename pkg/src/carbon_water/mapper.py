"""Map simulation results to flat result-file rows."""

from typing import Iterable, Optional, Sequence

from .models import JobOutcome, RunMetrics

OUTCOME_COLUMNS = [
    "policy",
    "tolerance",
    "capacity_scale",
    "job_id",
    "home_region",
    "region",
    "received_at",
    "start_exec",
    "finish",
    "service_time",
    "exec_time",
    "transfer",
    "carbon",
    "water",
    "violated",
]

METRIC_COLUMNS = [
    "policy",
    "tolerance",
    "capacity_scale",
    "jobs",
    "total_carbon",
    "total_water",
    "carbon_savings_pct",
    "water_savings_pct",
    "violation_pct",
    "mean_normalized_service",
    "relaxed_rounds",
    "deferred_rounds",
]

OVERHEAD_COLUMNS = [
    "policy",
    "tolerance",
    "capacity_scale",
    "round",
    "seconds",
    "fraction_of_mean_exec",
]

SERIES_COLUMNS = [
    "group",
    "x",
    "carbon_savings_pct",
    "water_savings_pct",
    "violation_pct",
    "mean_normalized_service",
]

REGION_SHARE_PREFIX = "region_share_"


def map_outcome_to_row(outcome: JobOutcome, policy: str, tolerance: float, capacity_scale: float) -> dict:
    """Map one job outcome to an ``outcomes.csv`` row.

    Args:
        outcome: Served job
        policy: Policy that served it
        tolerance: Delay tolerance of the run
        capacity_scale: Capacity scale of the run

    Returns:
        Row keyed by OUTCOME_COLUMNS
    """
    return {
        "policy": policy,
        "tolerance": tolerance,
        "capacity_scale": capacity_scale,
        "job_id": outcome.job_id,
        "home_region": outcome.home_region,
        "region": outcome.region,
        "received_at": outcome.received_at,
        "start_exec": outcome.start_exec,
        "finish": outcome.finish,
        "service_time": outcome.service_time,
        "exec_time": outcome.exec_time,
        "transfer": outcome.transfer,
        "carbon": outcome.carbon,
        "water": outcome.water,
        "violated": outcome.violated,
    }


def metric_columns(regions: Sequence[str]) -> list[str]:
    """Metric columns followed by one job-share column per region."""
    return METRIC_COLUMNS + [f"{REGION_SHARE_PREFIX}{r}" for r in regions]


def map_metrics_to_row(
    metrics: RunMetrics,
    tolerance: float,
    capacity_scale: float,
    regions: Sequence[str],
) -> dict:
    """Map a run's metrics to a ``metrics.csv`` row.

    Undefined savings (zero baseline) stay None and are written as NA.
    """
    row = {
        "policy": metrics.policy,
        "tolerance": tolerance,
        "capacity_scale": capacity_scale,
        "jobs": metrics.jobs,
        "total_carbon": metrics.total_carbon,
        "total_water": metrics.total_water,
        "carbon_savings_pct": metrics.carbon_savings_pct,
        "water_savings_pct": metrics.water_savings_pct,
        "violation_pct": 100.0 * metrics.violation_fraction,
        "mean_normalized_service": metrics.mean_normalized_service,
        "relaxed_rounds": metrics.relaxed_rounds,
        "deferred_rounds": metrics.deferred_rounds,
    }
    for region in regions:
        count = metrics.region_counts.get(region, 0)
        row[f"{REGION_SHARE_PREFIX}{region}"] = count / metrics.jobs if metrics.jobs else 0.0
    return row


def map_round_times_to_rows(
    metrics: RunMetrics,
    tolerance: float,
    capacity_scale: float,
    mean_exec: Optional[float],
) -> list[dict]:
    """One ``overhead.csv`` row per decision round."""
    return [
        {
            "policy": metrics.policy,
            "tolerance": tolerance,
            "capacity_scale": capacity_scale,
            "round": index,
            "seconds": seconds,
            "fraction_of_mean_exec": seconds / mean_exec if mean_exec else None,
        }
        for index, seconds in enumerate(metrics.round_times)
    ]


def _group_name(policy: str, fixed_axis: str, fixed_value: float, several: bool) -> str:
    return f"{policy}@{fixed_axis}={fixed_value:g}" if several else policy


def pivot_series(rows: Iterable[dict], x_axis: str = "tolerance") -> list[dict]:
    """
    Pivot metric rows into plot series.

    Groups are the policies (qualified by the other sweep axis when it takes
    several values), in first-appearance order; points within a group are
    sorted by x.

    Args:
        rows: Metric rows with at least policy, tolerance, capacity_scale and savings
        x_axis: "tolerance" or "capacity_scale"

    Returns:
        Rows keyed by SERIES_COLUMNS
    """
    rows = list(rows)
    fixed_axis = "capacity_scale" if x_axis == "tolerance" else "tolerance"
    several = len({row[fixed_axis] for row in rows}) > 1

    groups: dict[str, list[dict]] = {}
    for row in rows:
        name = _group_name(row["policy"], fixed_axis, row[fixed_axis], several)
        groups.setdefault(name, []).append(
            {
                "group": name,
                "x": row[x_axis],
                "carbon_savings_pct": row["carbon_savings_pct"],
                "water_savings_pct": row["water_savings_pct"],
                "violation_pct": row["violation_pct"],
                "mean_normalized_service": row["mean_normalized_service"],
            }
        )

    series = []
    for points in groups.values():
        series.extend(sorted(points, key=lambda p: p["x"]))
    return series
