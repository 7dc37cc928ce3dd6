"""Loaders for environment series, energy mixes, traces, profiles and latencies.

Every dataset is a comma-separated file with a header row. Values are parsed
as text first so that bad cells can be reported with their file line number
(the header is line 1).
"""

from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np
import pandas as pd

from .errors import (
    CompletenessError,
    DataError,
    FootprintError,
    ParseError,
    RangeError,
    SchemaError,
)
from .footprint import mix_ewif
from .logging_config import get_logger
from .models import (
    EnergyMix,
    EnergySourceProfile,
    JobEnergyRecord,
    LatencyMatrix,
    RegionEnvPoint,
    RegionEnvSeries,
    TraceEntry,
    WorkloadProfileDB,
)
from .validation import (
    energy_record_errors,
    is_finite_non_negative,
    raise_range_errors,
    validate_latency,
    validate_series,
)

logger = get_logger(__name__)

PathLike = Union[str, Path]

ENV_COLUMNS = ["region", "timestamp", "carbon_intensity", "ewif", "wue", "wsf", "pue"]
MIX_COLUMNS = ["region", "timestamp", "source", "share"]
SOURCE_COLUMNS = ["source", "carbon_intensity", "ewif"]
TRACE_COLUMNS = ["job_id", "arrival", "home_region", "benchmark"]
PROFILE_COLUMNS = ["benchmark", "energy_kwh", "exec_seconds"]
LATENCY_COLUMNS = ["from_region", "to_region", "seconds"]


def _read_csv(path: PathLike, required: list[str], allow_empty: bool = False) -> pd.DataFrame:
    """Read a CSV as text and check its header.

    Raises:
        DataError: If the file does not exist or has no header
        SchemaError: If required columns are missing
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"File not found: {path}", details={"path": str(path)})

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        if allow_empty:
            return pd.DataFrame(columns=required)
        raise DataError(f"{path}: file is empty", details={"path": str(path)})
    except pd.errors.ParserError as e:
        raise DataError(f"{path}: {e}", details={"path": str(path)}) from e

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(str(path), missing)
    return frame


def _numeric(frame: pd.DataFrame, column: str, path: PathLike) -> np.ndarray:
    """Parse a text column as floats, reporting the first bad cell's line."""
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = values.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            str(path),
            line=row + 2,
            message=f"column '{column}' is not a number: '{frame[column].iloc[row]}'",
        )
    return values.to_numpy(dtype=float)


def _integral(frame: pd.DataFrame, column: str, path: PathLike) -> np.ndarray:
    values = _numeric(frame, column, path)
    fractional = values != np.floor(values)
    if fractional.any():
        row = int(np.flatnonzero(fractional)[0])
        raise ParseError(
            str(path),
            line=row + 2,
            message=f"column '{column}' must be an integer number of seconds, got {values[row]}",
        )
    return values.astype(np.int64)


def _text(frame: pd.DataFrame, column: str, path: PathLike) -> list[str]:
    values = [v.strip() for v in frame[column].tolist()]
    for row, value in enumerate(values):
        if not value:
            raise ParseError(str(path), line=row + 2, message=f"column '{column}' is empty")
    return values


def load_sources(path: PathLike) -> dict[str, EnergySourceProfile]:
    """
    Load per-source carbon intensity and EWIF.

    Args:
        path: Path to ``sources.csv`` (``source,carbon_intensity,ewif``)

    Returns:
        Profiles keyed by source name, in file order
    """
    frame = _read_csv(path, SOURCE_COLUMNS)
    names = _text(frame, "source", path)
    ci = _numeric(frame, "carbon_intensity", path)
    ewif = _numeric(frame, "ewif", path)

    errors = [
        f"{path}:{row + 2}: carbon_intensity and ewif must be >= 0"
        for row in range(len(names))
        if not (is_finite_non_negative(ci[row]) and is_finite_non_negative(ewif[row]))
    ]
    raise_range_errors(errors, f"Invalid energy sources in {path}")

    return {
        name: EnergySourceProfile(name=name, carbon_intensity=float(c), ewif=float(w))
        for name, c, w in zip(names, ci, ewif)
    }


def load_energy_mix(path: PathLike) -> dict[tuple[str, int], EnergyMix]:
    """
    Load energy-mix breakdowns.

    Args:
        path: Path to ``mix.csv`` (``region,timestamp,source,share``)

    Returns:
        One EnergyMix per (region, timestamp)
    """
    frame = _read_csv(path, MIX_COLUMNS)
    regions = _text(frame, "region", path)
    timestamps = _integral(frame, "timestamp", path)
    sources = _text(frame, "source", path)
    shares = _numeric(frame, "share", path)

    grouped: dict[tuple[str, int], dict[str, float]] = OrderedDict()
    for region, ts, source, share in zip(regions, timestamps, sources, shares):
        bucket = grouped.setdefault((region, int(ts)), {})
        bucket[source] = bucket.get(source, 0.0) + float(share)

    return {key: EnergyMix(shares=dict(shares_)) for key, shares_ in grouped.items()}


def load_env_series(
    path: PathLike,
    mix: Optional[Mapping[tuple[str, int], EnergyMix]] = None,
    sources: Optional[Mapping[str, EnergySourceProfile]] = None,
) -> dict[str, RegionEnvSeries]:
    """
    Load per-region environment time series.

    When the file has no ``ewif`` column, EWIF is derived for every point from
    the energy-mix breakdown and the per-source table. An explicit column
    always takes precedence.

    Args:
        path: Path to ``env.csv``
        mix: Optional energy-mix breakdown keyed by (region, timestamp)
        sources: Per-source profiles, required together with ``mix``

    Returns:
        Series keyed by region, in order of first appearance in the file

    Raises:
        SchemaError: Missing columns (including ewif without a mix)
        ParseError: Unparseable values
        MonotonicityError: Non-increasing timestamps within a region
        RangeError: Negative values, PUE < 1 or energy-mix shares outside [0, 1]
            or not summing to 1
        CompletenessError: A point has no energy-mix breakdown
    """
    required = [c for c in ENV_COLUMNS if c != "ewif"]
    frame = _read_csv(path, required)

    has_ewif = "ewif" in frame.columns
    if not has_ewif and (mix is None or sources is None):
        raise SchemaError(
            str(path),
            ["ewif"],
            message=f"{path}: no 'ewif' column and no energy-mix breakdown supplied",
        )

    regions = _text(frame, "region", path)
    timestamps = _integral(frame, "timestamp", path)
    ci = _numeric(frame, "carbon_intensity", path)
    wue = _numeric(frame, "wue", path)
    wsf = _numeric(frame, "wsf", path)
    pue = _numeric(frame, "pue", path)

    if has_ewif:
        ewif = _numeric(frame, "ewif", path)
    else:
        ewif = np.empty(len(regions))
        for row, (region, ts) in enumerate(zip(regions, timestamps)):
            breakdown = mix.get((region, int(ts)))
            if breakdown is None:
                raise CompletenessError(
                    f"{path}:{row + 2}: no energy-mix breakdown for {region} at t={ts}",
                    details={"region": region, "timestamp": int(ts)},
                )
            try:
                ewif[row] = mix_ewif(breakdown, sources)
            except FootprintError as e:
                raise RangeError(
                    f"{path}:{row + 2}: {e.message} (region {region}, t={ts})",
                    details={"path": str(path), "line": row + 2, "region": region, "timestamp": int(ts), **e.details},
                ) from e

    points: dict[str, list[RegionEnvPoint]] = OrderedDict()
    for row, region in enumerate(regions):
        points.setdefault(region, []).append(
            RegionEnvPoint(
                region=region,
                timestamp=int(timestamps[row]),
                carbon_intensity=float(ci[row]),
                ewif=float(ewif[row]),
                wue=float(wue[row]),
                wsf_dc=float(wsf[row]),
                pue=float(pue[row]),
            )
        )

    series = {}
    for region, pts in points.items():
        s = RegionEnvSeries(region=region, points=tuple(pts))
        validate_series(s)
        series[region] = s

    logger.debug("Loaded environment series for %d region(s) from %s", len(series), path)
    return series


def write_env_series(series: Mapping[str, RegionEnvSeries], path: PathLike) -> None:
    """Write environment series back out in the ``env.csv`` format."""
    rows = [
        {
            "region": p.region,
            "timestamp": p.timestamp,
            "carbon_intensity": p.carbon_intensity,
            "ewif": p.ewif,
            "wue": p.wue,
            "wsf": p.wsf_dc,
            "pue": p.pue,
        }
        for s in series.values()
        for p in s.points
    ]
    pd.DataFrame(rows, columns=ENV_COLUMNS).to_csv(path, index=False)


def load_trace(path: PathLike) -> list[TraceEntry]:
    """
    Load a job-arrival trace.

    Unknown regions and benchmarks are not checked here; that happens when the
    trace is wired to a scenario.

    Args:
        path: Path to ``trace.csv`` (``job_id,arrival,home_region,benchmark``)

    Returns:
        Entries sorted by arrival; equal arrivals keep their file order
    """
    frame = _read_csv(path, TRACE_COLUMNS, allow_empty=True)
    if frame.empty:
        return []

    job_ids = _text(frame, "job_id", path)
    arrivals = _integral(frame, "arrival", path)
    homes = _text(frame, "home_region", path)
    benchmarks = _text(frame, "benchmark", path)

    negative = np.flatnonzero(arrivals < 0)
    if negative.size:
        row = int(negative[0])
        raise ParseError(str(path), line=row + 2, message=f"arrival must be >= 0, got {arrivals[row]}")

    entries = [
        TraceEntry(job_id=j, arrival=int(a), home_region=h, benchmark=b)
        for j, a, h, b in zip(job_ids, arrivals, homes, benchmarks)
    ]
    return sorted(entries, key=lambda e: e.arrival)


def scale_arrivals(trace: list[TraceEntry], factor: float) -> list[TraceEntry]:
    """
    Compress (factor > 1) or stretch (factor < 1) inter-arrival times.

    Args:
        trace: Arrival-ordered trace
        factor: Request-rate multiplier

    Returns:
        New trace with arrivals ``first + (arrival - first) / factor`` rounded down
    """
    if factor <= 0:
        raise RangeError(f"arrival scale must be > 0, got {factor}")
    if not trace or factor == 1.0:
        return list(trace)
    first = trace[0].arrival
    return [
        TraceEntry(
            job_id=e.job_id,
            arrival=first + int((e.arrival - first) // factor),
            home_region=e.home_region,
            benchmark=e.benchmark,
        )
        for e in trace
    ]


def load_profiles(path: PathLike) -> WorkloadProfileDB:
    """
    Load per-benchmark mean energy and execution time.

    Args:
        path: Path to ``profiles.csv`` (``benchmark,energy_kwh,exec_seconds``)

    Returns:
        Records keyed by benchmark name
    """
    frame = _read_csv(path, PROFILE_COLUMNS)
    names = _text(frame, "benchmark", path)
    energy = _numeric(frame, "energy_kwh", path)
    exec_s = _numeric(frame, "exec_seconds", path)

    profiles: WorkloadProfileDB = {}
    errors = []
    for row, name in enumerate(names):
        rec = JobEnergyRecord(energy=float(energy[row]), exec_time=float(exec_s[row]))
        errors.extend(energy_record_errors(rec, where=f"{path}:{row + 2}"))
        if name in profiles:
            errors.append(f"{path}:{row + 2}: duplicate benchmark '{name}'")
        profiles[name] = rec
    raise_range_errors(errors, f"Invalid workload profiles in {path}")
    return profiles


def load_latency(path: PathLike) -> LatencyMatrix:
    """
    Load the inter-region transfer latency matrix.

    Args:
        path: Path to ``latency.csv`` (``from_region,to_region,seconds``)

    Returns:
        Validated matrix over every region named in the file

    Raises:
        CompletenessError: If an ordered pair is missing
        RangeError: If a diagonal entry is non-zero or a latency is negative
    """
    frame = _read_csv(path, LATENCY_COLUMNS)
    sources = _text(frame, "from_region", path)
    targets = _text(frame, "to_region", path)
    seconds = _numeric(frame, "seconds", path)

    regions = tuple(OrderedDict.fromkeys(sources + targets))
    matrix = LatencyMatrix(
        regions=regions,
        seconds={(a, b): float(s) for a, b, s in zip(sources, targets, seconds)},
    )
    validate_latency(matrix)
    return matrix


@dataclass(frozen=True)
class Dataset:
    """Everything the simulator reads from disk."""

    envs: dict[str, RegionEnvSeries]
    trace: list[TraceEntry]
    profiles: WorkloadProfileDB
    latency: LatencyMatrix
    sources: Optional[dict[str, EnergySourceProfile]] = None


def load_dataset(
    env_path: PathLike,
    trace_path: PathLike,
    profiles_path: PathLike,
    latency_path: PathLike,
    mix_path: Optional[PathLike] = None,
    sources_path: Optional[PathLike] = None,
) -> Dataset:
    """Load and validate every input dataset."""
    sources = load_sources(sources_path) if sources_path else None
    mix = load_energy_mix(mix_path) if mix_path else None
    return Dataset(
        envs=load_env_series(env_path, mix=mix, sources=sources),
        trace=load_trace(trace_path),
        profiles=load_profiles(profiles_path),
        latency=load_latency(latency_path),
        sources=sources,
    )
