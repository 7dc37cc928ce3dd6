"""Domain types for footprints, datasets, scheduling problems and simulation results.

Units are fixed throughout: gCO2, kWh, litres and seconds. Conversions happen
at ingestion.
"""

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import numpy as np

from .errors import SimulationError


@dataclass(frozen=True)
class EnergySourceProfile:
    """Carbon intensity (gCO2/kWh) and EWIF (L/kWh) of one generation source."""

    name: str
    carbon_intensity: float
    ewif: float


@dataclass(frozen=True)
class EnergyMix:
    """Fractional share of each generation source in a grid's supply."""

    shares: Mapping[str, float]


@dataclass(frozen=True)
class RegionEnvPoint:
    """Environmental conditions of one region at one instant."""

    region: str
    timestamp: int
    carbon_intensity: float
    ewif: float
    wue: float
    wsf_dc: float
    pue: float


@dataclass(frozen=True)
class ServerSpec:
    """Embodied footprint parameters of the server generation in every region."""

    embodied_carbon_total: float
    lifetime: float
    mfg_carbon_intensity: float
    mfg_ewif: float
    wsf_server: float = 0.0


@dataclass(frozen=True)
class JobEnergyRecord:
    """Profiled energy (kWh) and execution time (s) of a job."""

    energy: float
    exec_time: float


@dataclass(frozen=True)
class RegionEnvSeries:
    """Time-ordered environment points of one region, sampled as a step function."""

    region: str
    points: tuple[RegionEnvPoint, ...]
    timestamps: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "timestamps", tuple(p.timestamp for p in self.points))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start(self) -> int:
        return self.timestamps[0]

    @property
    def end(self) -> int:
        return self.timestamps[-1]

    def at(self, t: float) -> RegionEnvPoint:
        """Return the latest point with timestamp <= t.

        Raises:
            SimulationError: If t precedes the first point of the series
        """
        idx = bisect_right(self.timestamps, t) - 1
        if idx < 0:
            raise SimulationError(
                f"Environment series for region '{self.region}' does not cover t={t}",
                details={"region": self.region, "time": t, "series_start": self.start},
            )
        return self.points[idx]


@dataclass(frozen=True)
class TraceEntry:
    """One job submission read from a trace."""

    job_id: str
    arrival: int
    home_region: str
    benchmark: str


WorkloadProfileDB = dict[str, JobEnergyRecord]


@dataclass(frozen=True)
class LatencyMatrix:
    """Transfer latency in seconds between every ordered pair of regions."""

    regions: tuple[str, ...]
    seconds: Mapping[tuple[str, str], float]

    def get(self, src: str, dst: str) -> float:
        return self.seconds[(src, dst)]

    def mean_from(self, src: str, regions: Optional[tuple[str, ...]] = None) -> float:
        """Mean latency from src to every region, the zero self-latency included."""
        targets = regions or self.regions
        return sum(self.seconds[(src, dst)] for dst in targets) / len(targets)

    def restrict(self, regions: tuple[str, ...]) -> "LatencyMatrix":
        return LatencyMatrix(
            regions=regions,
            seconds={(a, b): self.seconds[(a, b)] for a in regions for b in regions},
        )


@dataclass(frozen=True)
class Job:
    """Runtime job instance.

    ``estimate`` is the profile mean the scheduler sees; ``energy`` is what the
    job actually draws and is what footprints are charged on.
    """

    job_id: str
    arrival: int
    home_region: str
    benchmark: str
    estimate: JobEnergyRecord
    energy: float

    @property
    def exec_time(self) -> float:
        return self.estimate.exec_time

    @property
    def actual(self) -> JobEnergyRecord:
        return JobEnergyRecord(energy=self.energy, exec_time=self.estimate.exec_time)


@dataclass(frozen=True)
class PendingJob:
    """A job waiting in the controller queue since ``received_at``."""

    job: Job
    received_at: float

    @property
    def job_id(self) -> str:
        return self.job.job_id

    @property
    def effective_exec(self) -> float:
        # Same hardware generation everywhere, so execution time is region independent
        return self.job.estimate.exec_time

    def waited(self, now: float) -> float:
        return max(0.0, now - self.received_at)


@dataclass(frozen=True)
class AssignmentProblem:
    """One round's assignment instance.

    ``cost`` holds normalized costs for every pair, ``delay_ratio`` the
    fraction (L + waited) / t consumed by placing job m in region n, and
    ``feasible`` the hard delay feasibility. ``carbon``/``water`` keep the raw
    footprint matrices for the history learner.
    """

    jobs: tuple[PendingJob, ...]
    regions: tuple[str, ...]
    cost: np.ndarray
    feasible: np.ndarray
    capacity: tuple[int, ...]
    penalty_weight: float
    delay_ratio: np.ndarray
    tolerance: float
    carbon: Optional[np.ndarray] = None
    water: Optional[np.ndarray] = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.jobs), len(self.regions)

    def overshoot(self) -> np.ndarray:
        """Per-pair delay overshoot beyond the tolerance, zero where within it."""
        return np.maximum(0.0, self.delay_ratio - self.tolerance)


@dataclass(frozen=True)
class AssignmentSolution:
    """Placements chosen for one round."""

    placement: Mapping[str, str]
    relaxed: bool = False
    penalties: Mapping[str, float] = field(default_factory=dict)
    objective: float = 0.0


@dataclass(frozen=True)
class Infeasible:
    """No assignment satisfies every hard constraint."""

    reason: str


SolveResult = Union[AssignmentSolution, Infeasible]


@dataclass(frozen=True)
class JobOutcome:
    """How one job was served under one policy."""

    job_id: str
    home_region: str
    region: str
    received_at: float
    start_exec: float
    finish: float
    service_time: float
    exec_time: float
    transfer: float
    carbon: float
    water: float
    violated: bool

    @property
    def dispatched_at(self) -> float:
        return self.start_exec - self.transfer

    @property
    def normalized_service(self) -> float:
        return self.service_time / self.exec_time


@dataclass
class RunMetrics:
    """Accumulated results of one policy run."""

    policy: str
    total_carbon: float = 0.0
    total_water: float = 0.0
    jobs: int = 0
    region_counts: dict[str, int] = field(default_factory=dict)
    mean_normalized_service: float = 0.0
    violation_fraction: float = 0.0
    relaxed_rounds: int = 0
    deferred_rounds: int = 0
    round_times: list[float] = field(default_factory=list)
    carbon_savings_pct: Optional[float] = None
    water_savings_pct: Optional[float] = None
