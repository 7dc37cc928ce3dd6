"""Carbon and water footprint models.

All functions are pure and point-in-time: callers sample a region's
environment at the instant a job starts and pass the resulting point in.
"""

from typing import Iterable, Mapping, Union

from .errors import FootprintError, UnknownReferenceError
from .models import (
    EnergyMix,
    EnergySourceProfile,
    JobEnergyRecord,
    RegionEnvPoint,
    ServerSpec,
)

SHARE_SUM_TOLERANCE = 1e-9


def embodied_share(rec: JobEnergyRecord, server: ServerSpec) -> float:
    """Fraction of the server's lifetime consumed by the job."""
    return rec.exec_time / server.lifetime


def operational_carbon(rec: JobEnergyRecord, ci: float) -> float:
    return rec.energy * ci


def total_carbon(rec: JobEnergyRecord, ci: float, server: ServerSpec) -> float:
    """Operational plus amortized embodied carbon of a job, in gCO2.

    Args:
        rec: Energy and execution time of the job
        ci: Grid carbon intensity in gCO2/kWh
        server: Server embodied-carbon parameters

    Returns:
        Total carbon footprint in grams
    """
    return operational_carbon(rec, ci) + embodied_share(rec, server) * server.embodied_carbon_total


def offsite_water(rec: JobEnergyRecord, env: RegionEnvPoint) -> float:
    """Water consumed generating the electricity the facility draws, in litres."""
    return env.pue * rec.energy * env.ewif * (1.0 + env.wsf_dc)


def onsite_water(rec: JobEnergyRecord, env: RegionEnvPoint) -> float:
    """Cooling water evaporated on site, in litres."""
    return rec.energy * env.wue * (1.0 + env.wsf_dc)


def manufacturing_energy(server: ServerSpec) -> float:
    """Energy spent manufacturing the server, in kWh.

    Raises:
        FootprintError: If the manufacturing carbon intensity is zero
    """
    if server.mfg_carbon_intensity == 0:
        raise FootprintError(
            "Manufacturing carbon intensity must be positive to derive manufacturing energy",
            details={"embodied_carbon_total": server.embodied_carbon_total},
        )
    return server.embodied_carbon_total / server.mfg_carbon_intensity


def embodied_water_total(server: ServerSpec) -> float:
    """Water footprint of manufacturing the server, in litres."""
    return manufacturing_energy(server) * server.mfg_ewif * (1.0 + server.wsf_server)


def total_water(rec: JobEnergyRecord, env: RegionEnvPoint, server: ServerSpec) -> float:
    """Offsite plus onsite plus amortized embodied water of a job, in litres."""
    return (
        offsite_water(rec, env)
        + onsite_water(rec, env)
        + embodied_share(rec, server) * embodied_water_total(server)
    )


def water_intensity(env: RegionEnvPoint) -> float:
    """Litres of water per kWh of IT energy, scarcity weighted."""
    return (env.wue + env.pue * env.ewif) * (1.0 + env.wsf_dc)


def mix_ewif(
    mix: EnergyMix,
    table: Union[Mapping[str, EnergySourceProfile], Iterable[EnergySourceProfile]],
) -> float:
    """Share-weighted EWIF of a grid energy mix.

    Args:
        mix: Source shares of the grid supply
        table: Per-source profiles, either keyed by name or as a plain collection

    Returns:
        Regional EWIF in L/kWh

    Raises:
        UnknownReferenceError: If the mix names a source missing from the table
        FootprintError: If a share lies outside [0, 1] or the shares do not sum to 1
    """
    profiles = table if isinstance(table, Mapping) else {p.name: p for p in table}

    bad = {name: share for name, share in mix.shares.items() if not 0.0 <= share <= 1.0}
    if bad:
        raise FootprintError("Energy-mix shares must lie in [0, 1]", details={"shares": bad})

    total = sum(mix.shares.values())
    if abs(total - 1.0) > SHARE_SUM_TOLERANCE:
        raise FootprintError(
            f"Energy-mix shares sum to {total}, expected 1",
            details={"share_sum": total},
        )

    ewif = 0.0
    for name, share in mix.shares.items():
        if name not in profiles:
            raise UnknownReferenceError("source", name)
        ewif += share * profiles[name].ewif
    return ewif
