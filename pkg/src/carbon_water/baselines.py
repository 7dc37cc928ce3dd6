"""Reference placement policies.

Online baselines (home, round-robin, least-load) place each round's jobs
without looking at footprints. The greedy oracles know every region's future
intensities and place each job, in arrival order, at the (region, start round)
pair that minimizes its carbon or water footprint within its delay budget.
"""

import math
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np

from .config import SchedulerSettings
from .errors import ConfigError, SimulationError
from .footprint import total_carbon, total_water
from .logging_config import get_logger
from .models import (
    AssignmentSolution,
    LatencyMatrix,
    PendingJob,
    RegionEnvPoint,
    RegionEnvSeries,
    ServerSpec,
)

logger = get_logger(__name__)

BASELINES = ("home", "round_robin", "least_load")
GREEDY_METRICS = {"carbon_greedy_opt": "carbon", "water_greedy_opt": "water"}

BUDGET_EPSILON = 1e-9


@dataclass
class RoundRobinState:
    """Circular cursor over the region order, persisted across rounds."""

    cursor: int = 0


def baseline_assign(
    policy: str,
    batch: Sequence[PendingJob],
    regions: tuple[str, ...],
    caps: Mapping[str, int],
    state: RoundRobinState,
) -> AssignmentSolution:
    """
    Place a batch with one of the footprint-blind baselines.

    Jobs that do not fit are left out of the placement and stay queued.

    Args:
        policy: "home", "round_robin" or "least_load"
        batch: Jobs in processing order
        regions: Region order (cursor and tie order)
        caps: Remaining slots per region
        state: Round-robin cursor, advanced in place

    Returns:
        Placement of the jobs that found a slot
    """
    remaining = [max(0, int(caps.get(r, 0))) for r in regions]
    placement: dict[str, str] = {}

    for job in batch:
        if policy == "home":
            idx = regions.index(job.job.home_region)
            if remaining[idx] == 0:
                continue
        elif policy == "round_robin":
            idx = next(
                (
                    (state.cursor + step) % len(regions)
                    for step in range(len(regions))
                    if remaining[(state.cursor + step) % len(regions)] > 0
                ),
                None,
            )
            if idx is None:
                continue
            state.cursor = (idx + 1) % len(regions)
        elif policy == "least_load":
            idx = int(np.argmax(remaining))
            if remaining[idx] == 0:
                continue
        else:
            raise ConfigError(f"Unknown baseline policy: {policy}", details={"policy": policy})

        remaining[idx] -= 1
        placement[job.job_id] = regions[idx]

    return AssignmentSolution(placement=placement)


@dataclass(frozen=True)
class OraclePlacement:
    """Region and dispatch time chosen by a greedy oracle."""

    region: str
    dispatch: float


class _Occupancy:
    """Slot usage per region on the round grid, grown on demand.

    Cell k covers ``[k * interval, (k + 1) * interval)`` and counts every
    execution overlapping it; transfer time is not counted.
    """

    def __init__(self, slots: Sequence[int], first_round: int, interval: int) -> None:
        self.slots = np.asarray(slots, dtype=int)
        self.first_round = first_round
        self.interval = interval
        self.grid = np.zeros((len(slots), 64), dtype=int)

    def _cells(self, start_exec: float, finish: float) -> tuple[int, int]:
        lo = math.floor(start_exec / self.interval) - self.first_round
        hi = math.ceil(finish / self.interval) - self.first_round
        if hi > self.grid.shape[1]:
            grow = max(hi - self.grid.shape[1], self.grid.shape[1])
            self.grid = np.hstack([self.grid, np.zeros((self.grid.shape[0], grow), dtype=int)])
        return lo, max(hi, lo + 1)

    def fits(self, region: int, start_exec: float, finish: float) -> bool:
        lo, hi = self._cells(start_exec, finish)
        return bool((self.grid[region, lo:hi] < self.slots[region]).all())

    def reserve(self, region: int, start_exec: float, finish: float) -> None:
        lo, hi = self._cells(start_exec, finish)
        self.grid[region, lo:hi] += 1


def greedy_opt_assign(
    metric: Literal["carbon", "water"],
    jobs: Sequence[PendingJob],
    envs: Mapping[str, RegionEnvSeries],
    latency: LatencyMatrix,
    slots: Mapping[str, int],
    cfg: SchedulerSettings,
    server: ServerSpec,
) -> dict[str, OraclePlacement]:
    """
    Oracle schedule minimizing one footprint per job with future knowledge.

    Jobs are processed in receipt order. Each job considers every region and
    every start round whose queuing plus transfer delay fits within
    ``tolerance * exec_time`` and whose execution starts inside the environment
    horizon, and takes the cheapest option that still has a free slot over its
    whole execution. Ties go to the earlier start, then the lower region
    index. If no option fits, the job takes the earliest slot with capacity.

    Args:
        metric: Footprint to minimize
        jobs: Jobs with their receipt times
        envs: Full environment series per region (region order is tie order)
        latency: Inter-region transfer latencies
        slots: Total slots per region
        cfg: Tolerance and round interval
        server: Embodied footprint parameters

    Returns:
        Placement per job id
    """
    regions = tuple(envs)
    interval = cfg.round_interval
    ordered = sorted(jobs, key=lambda j: (j.received_at, j.job_id))
    if not ordered:
        return {}

    if sum(slots[r] for r in regions) == 0:
        raise SimulationError("greedy oracle needs at least one slot", details={"slots": dict(slots)})

    horizon = min(series.end for series in envs.values())
    first_round = math.ceil(ordered[0].received_at / interval)
    occupancy = _Occupancy([slots[r] for r in regions], first_round, interval)

    points: dict[tuple[int, float], RegionEnvPoint] = {}

    def point_at(n: int, t: float) -> RegionEnvPoint:
        key = (n, t)
        if key not in points:
            points[key] = envs[regions[n]].at(t)
        return points[key]

    placements: dict[str, OraclePlacement] = {}
    fallbacks = 0
    for job in ordered:
        rec = job.job.estimate
        budget = cfg.tolerance * job.effective_exec + BUDGET_EPSILON
        first = math.ceil(job.received_at / interval)

        options = []
        for n, region in enumerate(regions):
            transfer = latency.get(job.job.home_region, region)
            s = first
            while (s * interval - job.received_at) + transfer <= budget:
                start_exec = s * interval + transfer
                if start_exec > horizon:
                    break
                env = point_at(n, start_exec)
                if metric == "carbon":
                    value = total_carbon(rec, env.carbon_intensity, server)
                else:
                    value = total_water(rec, env, server)
                options.append((value, s, n, start_exec, start_exec + job.effective_exec))
                s += 1

        options.sort(key=lambda o: (o[0], o[1], o[2]))
        chosen = next((o for o in options if occupancy.fits(o[2], o[3], o[4])), None)

        if chosen is None:
            fallbacks += 1
            s = first
            while chosen is None:
                for n, region in enumerate(regions):
                    start_exec = s * interval + latency.get(job.job.home_region, region)
                    finish = start_exec + job.effective_exec
                    if occupancy.fits(n, start_exec, finish):
                        chosen = (0.0, s, n, start_exec, finish)
                        break
                s += 1

        _, s, n, start_exec, finish = chosen
        occupancy.reserve(n, start_exec, finish)
        placements[job.job_id] = OraclePlacement(region=regions[n], dispatch=float(s * interval))

    if fallbacks:
        logger.warning("%s oracle: %d job(s) took the earliest free slot", metric, fallbacks)
    return placements
