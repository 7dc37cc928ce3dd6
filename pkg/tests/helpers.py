"""Builders for small scenarios shared by the test modules."""

from pathlib import Path
from typing import Iterable, Mapping, Optional

import pandas as pd

from carbon_water.config import SchedulerSettings
from carbon_water.models import (
    Job,
    JobEnergyRecord,
    LatencyMatrix,
    PendingJob,
    RegionEnvPoint,
    RegionEnvSeries,
    ServerSpec,
)

DAY = 86400

# No embodied footprint: footprints reduce to the operational terms
NO_EMBODIED = ServerSpec(
    embodied_carbon_total=0.0,
    lifetime=1.0,
    mfg_carbon_intensity=1.0,
    mfg_ewif=0.0,
)


def env_point(
    region: str,
    timestamp: int = 0,
    ci: float = 100.0,
    ewif: float = 1.0,
    wue: float = 0.5,
    wsf: float = 0.0,
    pue: float = 1.2,
) -> RegionEnvPoint:
    return RegionEnvPoint(
        region=region,
        timestamp=timestamp,
        carbon_intensity=ci,
        ewif=ewif,
        wue=wue,
        wsf_dc=wsf,
        pue=pue,
    )


def flat_series(region: str, **fields) -> RegionEnvSeries:
    """Constant environment from t=0 to t=30 days."""
    return RegionEnvSeries(
        region=region,
        points=(env_point(region, 0, **fields), env_point(region, 30 * DAY, **fields)),
    )


def stepped_series(region: str, steps: Iterable[tuple[int, Mapping]]) -> RegionEnvSeries:
    """Series with one point per (timestamp, fields) step."""
    return RegionEnvSeries(region=region, points=tuple(env_point(region, ts, **fields) for ts, fields in steps))


def latency_matrix(regions: tuple[str, ...], default: float = 0.0, overrides: Optional[Mapping] = None) -> LatencyMatrix:
    """Symmetric latency, zero on the diagonal, ``default`` elsewhere."""
    overrides = overrides or {}
    seconds = {}
    for a in regions:
        for b in regions:
            value = 0.0 if a == b else overrides.get((a, b), overrides.get((b, a), default))
            seconds[(a, b)] = float(value)
    return LatencyMatrix(regions=regions, seconds=seconds)


def make_job(
    job_id: str,
    home: str,
    energy: float = 1.0,
    exec_time: float = 3600.0,
    arrival: int = 0,
    benchmark: str = "bench",
) -> Job:
    record = JobEnergyRecord(energy=energy, exec_time=exec_time)
    return Job(
        job_id=job_id,
        arrival=arrival,
        home_region=home,
        benchmark=benchmark,
        estimate=record,
        energy=energy,
    )


def pending(job: Job, received_at: float = 0.0) -> PendingJob:
    return PendingJob(job=job, received_at=received_at)


def scheduler_settings(**overrides) -> SchedulerSettings:
    return SchedulerSettings(**overrides)


def write_csv(path: Path, rows: list[dict], columns: list[str]) -> Path:
    pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
    return path


def write_scenario(
    directory: Path,
    regions: Mapping[str, Mapping],
    jobs: list[tuple[str, int, str, str]],
    profiles: Mapping[str, tuple[float, int]],
    latency: float = 0.0,
) -> dict[str, Path]:
    """Write a constant-environment scenario and a matching config file.

    Args:
        directory: Target directory
        regions: Region name -> env fields (ci, ewif, wue, wsf, pue)
        jobs: (job_id, arrival, home_region, benchmark) rows
        profiles: Benchmark -> (energy_kwh, exec_seconds)
        latency: Off-diagonal latency in seconds

    Returns:
        Paths keyed by env, trace, profiles, latency, config
    """
    directory.mkdir(parents=True, exist_ok=True)
    env_rows = []
    for name, fields in regions.items():
        for ts in (0, 30 * DAY):
            env_rows.append(
                {
                    "region": name,
                    "timestamp": ts,
                    "carbon_intensity": fields.get("ci", 100.0),
                    "ewif": fields.get("ewif", 1.0),
                    "wue": fields.get("wue", 0.5),
                    "wsf": fields.get("wsf", 0.0),
                    "pue": fields.get("pue", 1.2),
                }
            )
    paths = {
        "env": write_csv(
            directory / "env.csv",
            env_rows,
            ["region", "timestamp", "carbon_intensity", "ewif", "wue", "wsf", "pue"],
        ),
        "trace": write_csv(
            directory / "trace.csv",
            [{"job_id": j, "arrival": a, "home_region": h, "benchmark": b} for j, a, h, b in jobs],
            ["job_id", "arrival", "home_region", "benchmark"],
        ),
        "profiles": write_csv(
            directory / "profiles.csv",
            [{"benchmark": b, "energy_kwh": e, "exec_seconds": t} for b, (e, t) in profiles.items()],
            ["benchmark", "energy_kwh", "exec_seconds"],
        ),
        "latency": write_csv(
            directory / "latency.csv",
            [
                {"from_region": a, "to_region": b, "seconds": 0 if a == b else latency}
                for a in regions
                for b in regions
            ],
            ["from_region", "to_region", "seconds"],
        ),
    }
    paths["config"] = directory / "config.env"
    paths["config"].write_text(
        "\n".join(
            [
                "CW_ENV_PATH=env.csv",
                "CW_TRACE_PATH=trace.csv",
                "CW_PROFILES_PATH=profiles.csv",
                "CW_LATENCY_PATH=latency.csv",
                "",
            ]
        ),
        encoding="utf-8",
    )
    return paths
