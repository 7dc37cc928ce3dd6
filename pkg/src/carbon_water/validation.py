"""Invariant checks for domain records produced by the loaders."""

import math
from typing import Optional

from .errors import CompletenessError, MonotonicityError, RangeError
from .models import (
    JobEnergyRecord,
    LatencyMatrix,
    RegionEnvPoint,
    RegionEnvSeries,
    ServerSpec,
)


def is_finite_non_negative(value: float) -> bool:
    """
    Check that a value is a finite number >= 0.

    Args:
        value: Number to check

    Returns:
        True if value is finite and non-negative, False otherwise
    """
    return isinstance(value, (int, float)) and math.isfinite(value) and value >= 0


def env_point_errors(point: RegionEnvPoint, where: str = "") -> list[str]:
    """
    Collect invariant violations of one environment point.

    Args:
        point: Point to check
        where: Location prefix for messages (e.g. "env.csv:12")

    Returns:
        List of human readable problems, empty if the point is valid
    """
    prefix = f"{where}: " if where else ""
    errors = []
    for name in ("carbon_intensity", "ewif", "wue", "wsf_dc"):
        value = getattr(point, name)
        if not is_finite_non_negative(value):
            errors.append(f"{prefix}{name} must be >= 0, got {value}")
    if not (math.isfinite(point.pue) and point.pue >= 1.0):
        errors.append(f"{prefix}pue must be >= 1, got {point.pue}")
    if point.timestamp < 0:
        errors.append(f"{prefix}timestamp must be >= 0, got {point.timestamp}")
    return errors


def energy_record_errors(rec: JobEnergyRecord, where: str = "") -> list[str]:
    """Collect invariant violations of a profiled energy record."""
    prefix = f"{where}: " if where else ""
    errors = []
    if not is_finite_non_negative(rec.energy):
        errors.append(f"{prefix}energy must be >= 0, got {rec.energy}")
    if not (math.isfinite(rec.exec_time) and rec.exec_time > 0):
        errors.append(f"{prefix}exec_time must be > 0, got {rec.exec_time}")
    return errors


def server_errors(server: ServerSpec) -> list[str]:
    """Collect invariant violations of a server specification."""
    errors = []
    if not (math.isfinite(server.lifetime) and server.lifetime > 0):
        errors.append(f"lifetime must be > 0, got {server.lifetime}")
    for name in ("embodied_carbon_total", "mfg_carbon_intensity", "mfg_ewif", "wsf_server"):
        value = getattr(server, name)
        if not is_finite_non_negative(value):
            errors.append(f"{name} must be >= 0, got {value}")
    return errors


def raise_range_errors(errors: list[str], message: str, context: Optional[dict] = None) -> None:
    """
    Raise a RangeError carrying every collected problem.

    Raises:
        RangeError: If errors is non-empty
    """
    if errors:
        details = dict(context or {})
        details["validation_errors"] = errors
        raise RangeError(message=message, details=details)


def validate_series(series: RegionEnvSeries) -> None:
    """
    Validate a region's environment series.

    Raises:
        RangeError: If the series is empty, mixes regions or has out-of-range values
        MonotonicityError: If timestamps are not strictly increasing
    """
    if len(series) == 0:
        raise RangeError(
            f"Environment series for region '{series.region}' is empty",
            details={"region": series.region},
        )

    errors = []
    for point in series.points:
        if point.region != series.region:
            errors.append(f"point at t={point.timestamp} belongs to region '{point.region}'")
        errors.extend(env_point_errors(point, where=f"{series.region}@{point.timestamp}"))
    raise_range_errors(errors, f"Invalid environment series for region '{series.region}'")

    for prev, cur in zip(series.timestamps, series.timestamps[1:]):
        if cur <= prev:
            raise MonotonicityError(
                f"Timestamps for region '{series.region}' are not strictly increasing "
                f"({prev} followed by {cur})",
                details={"region": series.region, "previous": prev, "current": cur},
            )


def validate_server(server: ServerSpec) -> None:
    """
    Validate a server specification.

    Raises:
        RangeError: If any field is out of range
    """
    raise_range_errors(server_errors(server), "Invalid server specification")


def validate_latency(matrix: LatencyMatrix) -> None:
    """
    Validate completeness, zero diagonal and non-negativity of a latency matrix.

    Raises:
        CompletenessError: If an ordered region pair has no entry
        RangeError: If a diagonal entry is non-zero or an entry is negative
    """
    missing = [
        f"{a}->{b}"
        for a in matrix.regions
        for b in matrix.regions
        if (a, b) not in matrix.seconds
    ]
    if missing:
        expected = len(matrix.regions) ** 2
        raise CompletenessError(
            f"Latency matrix covers {expected - len(missing)} of {expected} region pairs",
            details={"missing_pairs": missing},
        )

    errors = []
    for (a, b), value in matrix.seconds.items():
        if a == b and value != 0:
            errors.append(f"diagonal entry {a}->{b} must be 0, got {value}")
        elif not is_finite_non_negative(value):
            errors.append(f"entry {a}->{b} must be >= 0, got {value}")
    raise_range_errors(errors, "Invalid latency matrix")
