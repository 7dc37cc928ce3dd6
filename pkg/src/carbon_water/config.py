"""Configuration management for the carbon/water scheduler.

Pydantic models for scheduler weights and tolerances, the server's embodied
footprint, simulation capacity, input datasets and full runs. A run can be
described by a flat ``KEY=value`` file (see :func:`settings_from_mapping`).
"""

import math
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .models import ServerSpec

SECONDS_PER_YEAR = 365 * 24 * 3600
LAMBDA_SUM_TOLERANCE = 1e-9

POLICIES = (
    "home",
    "round_robin",
    "least_load",
    "cooptimize",
    "carbon_greedy_opt",
    "water_greedy_opt",
)
BASELINE_POLICY = "home"


class DelayMode(str, Enum):
    """How the hard delay constraint treats time already spent queuing.

    EFFECTIVE: (latency + waited) / exec_time <= tolerance
    LITERAL: latency / exec_time <= tolerance
    """

    EFFECTIVE = "effective"
    LITERAL = "literal"


class UrgencyMode(str, Enum):
    """Sign of the waiting term in the urgency score.

    SLACK: waiting reduces the score, so long-waiting jobs go first
    LITERAL: waiting increases the score
    """

    SLACK = "slack"
    LITERAL = "literal"


class SchedulerSettings(BaseModel):
    """Weights, tolerance and penalty of the co-optimizing controller."""

    model_config = ConfigDict(frozen=True)

    lambda_co2: float = Field(default=0.5, ge=0.0, le=1.0, description="Carbon weight")
    lambda_h2o: float = Field(default=0.5, ge=0.0, le=1.0, description="Water weight")
    lambda_ref: float = Field(
        default=0.1, ge=0.0, description="Influence of the history learner"
    )
    history_window: int = Field(
        default=10, ge=1, description="Rounds remembered by the history learner"
    )
    tolerance: float = Field(
        default=0.5,
        ge=0.0,
        description="Allowed fractional service-time increase over execution time",
    )
    sigma: float = Field(
        default=10.0, ge=0.0, description="Penalty weight per unit of delay overshoot"
    )
    round_interval: int = Field(
        default=300, gt=0, description="Seconds between scheduling rounds"
    )
    delay_mode: DelayMode = Field(default=DelayMode.EFFECTIVE)
    urgency_mode: UrgencyMode = Field(default=UrgencyMode.SLACK)

    @model_validator(mode="after")
    def validate_weights(self) -> "SchedulerSettings":
        """Carbon and water weights must sum to one."""
        total = self.lambda_co2 + self.lambda_h2o
        if abs(total - 1.0) > LAMBDA_SUM_TOLERANCE:
            raise ValueError(
                f"lambda_co2 + lambda_h2o must equal 1, got {total}"
            )
        return self


class ServerSettings(BaseModel):
    """Embodied footprint of the server generation deployed in every region."""

    model_config = ConfigDict(frozen=True)

    embodied_carbon_total: float = Field(
        default=2.5e6, ge=0.0, description="Embodied carbon of one server (gCO2)"
    )
    lifetime: float = Field(
        default=4 * SECONDS_PER_YEAR, gt=0.0, description="Server lifetime (s)"
    )
    mfg_carbon_intensity: float = Field(
        default=600.0, gt=0.0, description="Carbon intensity of manufacturing energy"
    )
    mfg_ewif: float = Field(
        default=1.8, ge=0.0, description="EWIF of manufacturing energy (L/kWh)"
    )
    wsf_server: float = Field(
        default=0.0, ge=0.0, description="Water scarcity factor at the factory"
    )

    def to_spec(self) -> ServerSpec:
        return ServerSpec(
            embodied_carbon_total=self.embodied_carbon_total,
            lifetime=self.lifetime,
            mfg_carbon_intensity=self.mfg_carbon_intensity,
            mfg_ewif=self.mfg_ewif,
            wsf_server=self.wsf_server,
        )


class SimulationSettings(BaseModel):
    """Cluster capacity and trace perturbations of a simulation."""

    model_config = ConfigDict(frozen=True)

    slots_per_region: int = Field(
        default=35, ge=1, description="Job slots in every region without an override"
    )
    region_slots: dict[str, int] = Field(
        default_factory=dict, description="Per-region slot overrides"
    )
    capacity_scale: float = Field(
        default=1.0,
        gt=0.0,
        description="Relative utilization; slot counts are divided by this value",
    )
    energy_noise: float = Field(
        default=0.0,
        ge=0.0,
        lt=1.0,
        description="Uniform multiplicative noise on actual job energy",
    )
    seed: int = Field(default=0, ge=0, description="Seed for every random draw")
    regions: Optional[tuple[str, ...]] = Field(
        default=None, description="Restrict the simulation to these regions"
    )
    arrival_scale: float = Field(
        default=1.0, gt=0.0, description="Request-rate multiplier applied to the trace"
    )

    @field_validator("region_slots")
    @classmethod
    def validate_region_slots(cls, v: dict[str, int]) -> dict[str, int]:
        """Overrides must leave every region at least one slot."""
        for region, slots in v.items():
            if slots < 1:
                raise ValueError(
                    f"slots for region '{region}' must be >= 1, got {slots}; use CW_REGIONS to drop a region"
                )
        return v

    def slots_for(self, regions: tuple[str, ...]) -> dict[str, int]:
        """Effective slot count of every region after capacity scaling."""
        return {
            r: max(1, round(self.region_slots.get(r, self.slots_per_region) / self.capacity_scale))
            for r in regions
        }


class DataSettings(BaseModel):
    """Locations of the input datasets."""

    model_config = ConfigDict(frozen=True)

    env_path: Path = Field(description="Region environment series (env.csv)")
    trace_path: Path = Field(description="Job-arrival trace (trace.csv)")
    profiles_path: Path = Field(description="Workload profiles (profiles.csv)")
    latency_path: Path = Field(description="Inter-region latency (latency.csv)")
    mix_path: Optional[Path] = Field(default=None, description="Energy-mix breakdown")
    sources_path: Optional[Path] = Field(default=None, description="Per-source CI and EWIF")

    @model_validator(mode="after")
    def validate_paths(self) -> "DataSettings":
        """Every referenced file must exist."""
        for name in (
            "env_path",
            "trace_path",
            "profiles_path",
            "latency_path",
            "mix_path",
            "sources_path",
        ):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ValueError(f"{name}: file not found: {path}")
        if (self.mix_path is None) != (self.sources_path is None):
            raise ValueError("mix_path and sources_path must be given together")
        return self


class RunConfig(BaseModel):
    """Main configuration of a run or sweep."""

    model_config = ConfigDict(frozen=True)

    data: DataSettings
    scheduler: SchedulerSettings = Field(default_factory=SchedulerSettings)
    server: ServerSettings = Field(default_factory=ServerSettings)
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)

    policies: tuple[str, ...] = Field(default=(BASELINE_POLICY, "cooptimize"))
    tolerances: tuple[float, ...] = Field(default=(0.25, 0.5, 0.75, 1.0))
    capacity_scales: tuple[float, ...] = Field(default=(1.0,))
    out_dir: Path = Field(default=Path("results"))
    workers: int = Field(default=1, ge=1, description="Parallel sweep workers")
    verbose: bool = Field(default=False)

    @field_validator("policies")
    @classmethod
    def validate_policies(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        """Policies must be known and listed once."""
        if not v:
            raise ValueError("at least one policy is required")
        unknown = [p for p in v if p not in POLICIES]
        if unknown:
            raise ValueError(
                f"unknown policy {', '.join(unknown)}; choose from {', '.join(POLICIES)}"
            )
        if len(set(v)) != len(v):
            raise ValueError("policies must not repeat")
        return v

    @field_validator("tolerances")
    @classmethod
    def validate_tolerances(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """The tolerance axis must be non-empty and non-negative."""
        if not v:
            raise ValueError("tolerance list must not be empty")
        if any(t < 0 or not math.isfinite(t) for t in v):
            raise ValueError(f"tolerances must be finite and >= 0, got {list(v)}")
        return v

    @field_validator("capacity_scales")
    @classmethod
    def validate_capacity_scales(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """The capacity axis must be non-empty and positive."""
        if not v:
            raise ValueError("capacity scale list must not be empty")
        if any(s <= 0 or not math.isfinite(s) for s in v):
            raise ValueError(f"capacity scales must be finite and > 0, got {list(v)}")
        return v


# Flat KEY=value names, grouped by section. Values are text, parsed by pydantic.
SETTING_KEYS: dict[str, dict[str, str]] = {
    "data": {
        "CW_ENV_PATH": "env_path",
        "CW_TRACE_PATH": "trace_path",
        "CW_PROFILES_PATH": "profiles_path",
        "CW_LATENCY_PATH": "latency_path",
        "CW_MIX_PATH": "mix_path",
        "CW_SOURCES_PATH": "sources_path",
    },
    "scheduler": {
        "CW_LAMBDA_CO2": "lambda_co2",
        "CW_LAMBDA_H2O": "lambda_h2o",
        "CW_LAMBDA_REF": "lambda_ref",
        "CW_HISTORY_WINDOW": "history_window",
        "CW_TOLERANCE": "tolerance",
        "CW_SIGMA": "sigma",
        "CW_ROUND_INTERVAL": "round_interval",
        "CW_DELAY_MODE": "delay_mode",
        "CW_URGENCY_MODE": "urgency_mode",
    },
    "server": {
        "CW_EMBODIED_CARBON": "embodied_carbon_total",
        "CW_SERVER_LIFETIME": "lifetime",
        "CW_MFG_CARBON_INTENSITY": "mfg_carbon_intensity",
        "CW_MFG_EWIF": "mfg_ewif",
        "CW_WSF_SERVER": "wsf_server",
    },
    "simulation": {
        "CW_SLOTS_PER_REGION": "slots_per_region",
        "CW_REGION_SLOTS": "region_slots",
        "CW_CAPACITY_SCALE": "capacity_scale",
        "CW_ENERGY_NOISE": "energy_noise",
        "CW_SEED": "seed",
        "CW_REGIONS": "regions",
        "CW_ARRIVAL_SCALE": "arrival_scale",
    },
    "run": {
        "CW_POLICIES": "policies",
        "CW_TOLERANCES": "tolerances",
        "CW_CAPACITY_SCALES": "capacity_scales",
        "CW_OUT_DIR": "out_dir",
        "CW_WORKERS": "workers",
    },
}

_LIST_FIELDS = {"regions", "policies", "tolerances", "capacity_scales"}
_PATH_FIELDS = {
    "env_path",
    "trace_path",
    "profiles_path",
    "latency_path",
    "mix_path",
    "sources_path",
    "out_dir",
}


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _parse_region_slots(value: str) -> dict[str, str]:
    """Parse ``region:slots,region:slots``."""
    pairs = {}
    for item in _split_list(value):
        region, sep, slots = item.partition(":")
        if not sep:
            raise ValueError(f"region slot override '{item}' must look like region:slots")
        pairs[region.strip()] = slots.strip()
    return pairs


def settings_from_mapping(values: Mapping[str, Optional[str]], base_dir: Optional[Path] = None) -> dict:
    """
    Turn flat ``CW_*`` text values into the nested dict RunConfig expects.

    Args:
        values: Flat key/value pairs (config file, environment, overrides)
        base_dir: Directory relative paths resolve against

    Returns:
        Nested dict with sections data/scheduler/server/simulation plus run-level keys
    """
    nested: dict = {"data": {}, "scheduler": {}, "server": {}, "simulation": {}}
    for section, keys in SETTING_KEYS.items():
        target = nested if section == "run" else nested[section]
        for key, field_name in keys.items():
            raw = values.get(key)
            if raw is None or str(raw).strip() == "":
                continue
            raw = str(raw).strip()
            if field_name in _LIST_FIELDS:
                parsed: object = _split_list(raw)
            elif field_name == "region_slots":
                parsed = _parse_region_slots(raw)
            elif field_name in _PATH_FIELDS:
                path = Path(raw)
                if base_dir is not None and not path.is_absolute():
                    path = base_dir / path
                parsed = path
            else:
                parsed = raw
            target[field_name] = parsed
    return nested


def _format_value(value: object) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, dict):
        return ",".join(f"{k}:{v}" for k, v in value.items())
    if isinstance(value, (tuple, list)):
        return ",".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_settings(config: RunConfig) -> str:
    """
    Render the effective configuration as a flat ``KEY=value`` file.

    Loading the result with :func:`settings_from_mapping` reproduces ``config``
    (paths are written absolute).
    """
    sections = {
        "data": config.data,
        "scheduler": config.scheduler,
        "server": config.server,
        "simulation": config.simulation,
        "run": config,
    }
    lines = []
    for section, keys in SETTING_KEYS.items():
        lines.append(f"# [{section}]")
        model = sections[section]
        for key, field_name in keys.items():
            value = getattr(model, field_name)
            if value is None:
                continue
            if isinstance(value, Path):
                value = value.resolve()
            lines.append(f"{key}={_format_value(value)}")
        lines.append("")
    return "\n".join(lines)
