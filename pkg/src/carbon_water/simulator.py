"""Trace-driven replay of a policy over a geo-distributed cluster.

The clock advances in rounds of ``round_interval`` seconds. Each round
releases finished jobs' slots, receives the jobs that arrived since the last
round, asks the policy for placements and reserves a slot per placed job from
dispatch until its execution finishes. Footprints are charged with the
destination's environment at the instant execution starts.
"""

import math
import time
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Protocol, Sequence

import numpy as np

from .baselines import (
    BASELINES,
    GREEDY_METRICS,
    RoundRobinState,
    baseline_assign,
    greedy_opt_assign,
)
from .config import BASELINE_POLICY, POLICIES, SchedulerSettings, SimulationSettings
from .errors import ConfigError, SimulationError, UnknownReferenceError
from .footprint import total_carbon, total_water
from .logging_config import get_logger, policy_logger
from .models import (
    AssignmentSolution,
    Job,
    JobOutcome,
    LatencyMatrix,
    PendingJob,
    RegionEnvPoint,
    RegionEnvSeries,
    RunMetrics,
    ServerSpec,
    TraceEntry,
    WorkloadProfileDB,
)
from .scheduler import HistoryLearner, RoundDecision, schedule_round

logger = get_logger(__name__)

VIOLATION_EPSILON = 1e-9


@dataclass
class ClusterState:
    """Slots per region and the execution intervals occupying them.

    A slot is held over ``[start_exec, finish)`` only; a job in transit to a
    region occupies nothing there until it starts executing.
    """

    total: dict[str, int]
    timeline: dict[str, list[tuple[float, float]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for region in self.total:
            self.timeline.setdefault(region, [])

    def executing(self, region: str, at: float) -> int:
        return sum(1 for start, finish in self.timeline[region] if start <= at < finish)

    def remaining(self, region: str, at: float) -> int:
        return self.total[region] - self.executing(region, at)

    def free(self, at: float) -> dict[str, int]:
        return {region: self.remaining(region, at) for region in self.total}

    def fits(self, region: str, start: float, finish: float) -> bool:
        """Whether one more job can execute in ``region`` over ``[start, finish)``."""
        overlapping = [(s, f) for s, f in self.timeline[region] if s < finish and start < f]
        # peak concurrency inside the window is reached at some interval start
        instants = [start, *(s for s, _ in overlapping if s > start)]
        return all(
            sum(1 for s, f in overlapping if s <= t < f) < self.total[region] for t in instants
        )

    def release(self, now: float) -> None:
        """Drop every interval whose job finished at or before ``now``."""
        for region, intervals in self.timeline.items():
            self.timeline[region] = [(s, f) for s, f in intervals if f > now]

    def reserve(self, region: str, start: float, finish: float) -> None:
        if not self.fits(region, start, finish):
            raise SimulationError(
                f"Region '{region}' has no free slot over [{start}, {finish})",
                details={"region": region, "slots": self.total[region], "start": start, "finish": finish},
            )
        self.timeline[region].append((start, finish))

    @property
    def busy(self) -> bool:
        return any(self.timeline.values())


def received_at(arrival: float, interval: int) -> float:
    """Round boundary at which the controller first sees a job."""
    return float(math.ceil(arrival / interval) * interval)


def select_regions(
    envs: Mapping[str, RegionEnvSeries],
    latency: LatencyMatrix,
    subset: Optional[Sequence[str]] = None,
) -> tuple[str, ...]:
    """
    Regions a simulation runs over, in environment-file order.

    Raises:
        UnknownReferenceError: If a requested region has no environment series
            or no latency row
    """
    if subset:
        for region in subset:
            if region not in envs:
                raise UnknownReferenceError("region", region)
        regions = tuple(r for r in envs if r in set(subset))
    else:
        regions = tuple(envs)

    for region in regions:
        if region not in latency.regions:
            raise UnknownReferenceError("region", region, message=f"No latency entries for region '{region}'")
    return regions


def prepare_jobs(
    trace: Sequence[TraceEntry],
    profiles: WorkloadProfileDB,
    known_regions: Sequence[str],
    regions: Sequence[str],
    energy_noise: float = 0.0,
    seed: int = 0,
) -> list[Job]:
    """
    Resolve trace entries into jobs.

    Noise factors are drawn once per trace entry in trace order, so dropping
    regions does not change the energy of the remaining jobs.

    Args:
        trace: Job submissions
        profiles: Benchmark energy profiles
        known_regions: Every region of the dataset
        regions: Regions kept for this simulation
        energy_noise: Half-width of the uniform multiplicative energy noise
        seed: Noise generator seed

    Returns:
        Jobs whose home region is kept

    Raises:
        UnknownReferenceError: For a home region or benchmark the dataset does not define
    """
    rng = np.random.default_rng(seed)
    factors = (
        rng.uniform(1.0 - energy_noise, 1.0 + energy_noise, size=len(trace))
        if energy_noise > 0
        else np.ones(len(trace))
    )

    kept = set(regions)
    jobs = []
    dropped = 0
    for entry, factor in zip(trace, factors):
        if entry.home_region not in known_regions:
            raise UnknownReferenceError(
                "region",
                entry.home_region,
                message=f"Job '{entry.job_id}' names unknown home region '{entry.home_region}'",
            )
        if entry.benchmark not in profiles:
            raise UnknownReferenceError(
                "benchmark",
                entry.benchmark,
                message=f"Job '{entry.job_id}' names unknown benchmark '{entry.benchmark}'",
            )
        if entry.home_region not in kept:
            dropped += 1
            continue

        estimate = profiles[entry.benchmark]
        jobs.append(
            Job(
                job_id=entry.job_id,
                arrival=entry.arrival,
                home_region=entry.home_region,
                benchmark=entry.benchmark,
                estimate=estimate,
                energy=estimate.energy * float(factor),
            )
        )

    if dropped:
        logger.warning("Dropped %d job(s) whose home region is not simulated", dropped)
    return jobs


class Policy(Protocol):
    """Online placement policy driven once per round."""

    def decide(
        self,
        new_jobs: list[PendingJob],
        carryover: list[PendingJob],
        envs: Mapping[str, RegionEnvPoint],
        caps: Mapping[str, int],
        now: float,
    ) -> RoundDecision: ...


class CooptimizePolicy:
    """Carbon/water co-optimizing controller with its history learner."""

    def __init__(self, cfg: SchedulerSettings, server: ServerSpec, latency: LatencyMatrix) -> None:
        self.cfg = cfg
        self.server = server
        self.latency = latency
        self.history = HistoryLearner(window=cfg.history_window)

    def decide(self, new_jobs, carryover, envs, caps, now) -> RoundDecision:
        decision = schedule_round(
            new_jobs, carryover, envs, self.latency, caps, self.cfg, self.history, self.server, now
        )
        if decision.history is not None:
            self.history = decision.history
        return decision


class BaselinePolicy:
    """Footprint-blind placement (home, round-robin or least-load)."""

    def __init__(self, name: str, regions: tuple[str, ...]) -> None:
        self.name = name
        self.regions = regions
        self.state = RoundRobinState()

    def decide(self, new_jobs, carryover, envs, caps, now) -> RoundDecision:
        pending = sorted([*carryover, *new_jobs], key=lambda j: (j.received_at, j.job_id))
        solution = baseline_assign(self.name, pending, self.regions, caps, self.state)
        deferred = [j for j in pending if j.job_id not in solution.placement]
        return RoundDecision(solution=solution, deferred=deferred, path=self.name)


def _outcome(
    job: PendingJob,
    region: str,
    dispatch: float,
    envs: Mapping[str, RegionEnvSeries],
    latency: LatencyMatrix,
    server: ServerSpec,
    tolerance: float,
) -> JobOutcome:
    transfer = latency.get(job.job.home_region, region)
    start_exec = dispatch + transfer
    finish = start_exec + job.job.exec_time
    env = envs[region].at(start_exec)
    actual = job.job.actual
    service = finish - job.received_at
    return JobOutcome(
        job_id=job.job_id,
        home_region=job.job.home_region,
        region=region,
        received_at=job.received_at,
        start_exec=start_exec,
        finish=finish,
        service_time=service,
        exec_time=job.job.exec_time,
        transfer=transfer,
        carbon=total_carbon(actual, env.carbon_intensity, server),
        water=total_water(actual, env, server),
        violated=service - job.job.exec_time > tolerance * job.job.exec_time + VIOLATION_EPSILON,
    )


def _replay(
    policy: Policy,
    pending: list[PendingJob],
    envs: Mapping[str, RegionEnvSeries],
    latency: LatencyMatrix,
    slots: Mapping[str, int],
    cfg: SchedulerSettings,
    server: ServerSpec,
    metrics: RunMetrics,
) -> list[JobOutcome]:
    interval = cfg.round_interval
    state = ClusterState(total=dict(slots))
    if sum(state.total.values()) == 0:
        raise SimulationError("Cluster has no slots", details={"slots": dict(slots)})

    outcomes: list[JobOutcome] = []
    carry: list[PendingJob] = []
    i = 0
    now = pending[0].received_at if pending else 0.0

    while i < len(pending) or carry:
        if not carry and pending[i].received_at > now:
            now = pending[i].received_at
        state.release(now)

        new_jobs = []
        while i < len(pending) and pending[i].received_at <= now:
            new_jobs.append(pending[i])
            i += 1

        round_envs = {region: envs[region].at(now) for region in state.total}
        caps = state.free(now)
        by_id = {j.job_id: j for j in (*carry, *new_jobs)}

        started = time.perf_counter()
        decision = policy.decide(new_jobs, carry, round_envs, caps, now)
        metrics.round_times.append(time.perf_counter() - started)

        # caps only count jobs executing now; a job still in transit may claim the slot later
        blocked: list[PendingJob] = []
        for job_id, region in decision.solution.placement.items():
            outcome = _outcome(by_id[job_id], region, now, envs, latency, server, cfg.tolerance)
            if state.fits(region, outcome.start_exec, outcome.finish):
                state.reserve(region, outcome.start_exec, outcome.finish)
                outcomes.append(outcome)
            else:
                blocked.append(by_id[job_id])
        if blocked:
            logger.debug("t=%s: %d placement(s) overlap a pending execution, deferred", now, len(blocked))

        deferred = sorted([*decision.deferred, *blocked], key=lambda j: (j.received_at, j.job_id))
        if decision.solution.relaxed:
            metrics.relaxed_rounds += 1
        if deferred:
            metrics.deferred_rounds += 1
            if len(blocked) == len(decision.solution.placement) and not state.busy:
                raise SimulationError(
                    f"{len(deferred)} job(s) can never be placed",
                    details={"time": now, "free": caps},
                )

        carry = deferred
        now += interval

    return outcomes


def _oracle_outcomes(
    metric: str,
    pending: list[PendingJob],
    envs: Mapping[str, RegionEnvSeries],
    latency: LatencyMatrix,
    slots: Mapping[str, int],
    cfg: SchedulerSettings,
    server: ServerSpec,
    metrics: RunMetrics,
) -> list[JobOutcome]:
    started = time.perf_counter()
    placements = greedy_opt_assign(metric, pending, envs, latency, slots, cfg, server)
    metrics.round_times.append(time.perf_counter() - started)
    return [
        _outcome(job, placements[job.job_id].region, placements[job.job_id].dispatch, envs, latency, server, cfg.tolerance)
        for job in pending
    ]


def summarize(policy: str, outcomes: Sequence[JobOutcome], regions: Sequence[str], metrics: Optional[RunMetrics] = None) -> RunMetrics:
    """Fill totals, per-region counts and service statistics from outcomes."""
    metrics = metrics or RunMetrics(policy=policy)
    metrics.total_carbon = sum(o.carbon for o in outcomes)
    metrics.total_water = sum(o.water for o in outcomes)
    metrics.jobs = len(outcomes)
    metrics.region_counts = {r: 0 for r in regions}
    for o in outcomes:
        metrics.region_counts[o.region] = metrics.region_counts.get(o.region, 0) + 1
    if outcomes:
        metrics.mean_normalized_service = sum(o.normalized_service for o in outcomes) / len(outcomes)
        metrics.violation_fraction = sum(1 for o in outcomes if o.violated) / len(outcomes)
    return metrics


def verify_capacity(outcomes: Sequence[JobOutcome], slots: Mapping[str, int]) -> None:
    """
    Replay execution intervals and check no region ever exceeds its slots.

    A slot is held over ``[start_exec, finish)``; transfer time occupies no
    slot, and a slot released at time t is available to a job starting at t.

    Raises:
        SimulationError: On the first instant a region runs more jobs than slots
    """
    events: dict[str, list[tuple[float, int]]] = {}
    for o in outcomes:
        events.setdefault(o.region, []).extend([(o.start_exec, 1), (o.finish, -1)])

    for region, region_events in events.items():
        limit = slots.get(region, 0)
        running = 0
        for at, delta in sorted(region_events):
            running += delta
            if running > limit:
                raise SimulationError(
                    f"Region '{region}' runs {running} jobs at t={at}, only {limit} slots",
                    details={"region": region, "time": at, "running": running, "slots": limit},
                )


def run(
    trace: Sequence[TraceEntry],
    envs: Mapping[str, RegionEnvSeries],
    latency: LatencyMatrix,
    profiles: WorkloadProfileDB,
    server: ServerSpec,
    cfg: SchedulerSettings,
    policy: str,
    sim: Optional[SimulationSettings] = None,
) -> tuple[RunMetrics, list[JobOutcome]]:
    """
    Replay a trace under one policy.

    Args:
        trace: Job submissions (arrival order)
        envs: Environment series per region, in region order
        latency: Inter-region transfer latencies
        profiles: Benchmark energy profiles
        server: Embodied footprint parameters
        cfg: Scheduler settings (tolerance, round interval, weights)
        policy: Policy name
        sim: Capacity, noise and region subset settings

    Returns:
        Run metrics and one outcome per job, ordered by receipt then job id

    Raises:
        UnknownReferenceError: For regions or benchmarks the dataset does not define
        SimulationError: If the environment does not cover a needed time or
            capacity accounting breaks
    """
    if policy not in POLICIES:
        raise ConfigError(f"Unknown policy: {policy}", details={"policy": policy})
    sim = sim or SimulationSettings()

    known_regions = tuple(envs)
    regions = select_regions(envs, latency, sim.regions)
    envs = {r: envs[r] for r in regions}
    latency = latency.restrict(regions)
    slots = sim.slots_for(regions)

    jobs = prepare_jobs(trace, profiles, known_regions, regions, sim.energy_noise, sim.seed)
    pending = sorted(
        (PendingJob(job=job, received_at=received_at(job.arrival, cfg.round_interval)) for job in jobs),
        key=lambda j: (j.received_at, j.job_id),
    )

    metrics = RunMetrics(policy=policy)
    if policy in GREEDY_METRICS:
        outcomes = _oracle_outcomes(GREEDY_METRICS[policy], pending, envs, latency, slots, cfg, server, metrics)
    else:
        online: Policy = (
            BaselinePolicy(policy, regions) if policy in BASELINES else CooptimizePolicy(cfg, server, latency)
        )
        outcomes = _replay(online, pending, envs, latency, slots, cfg, server, metrics)

    outcomes.sort(key=lambda o: (o.received_at, o.job_id))
    if len({o.job_id for o in outcomes}) != len(pending) or len(outcomes) != len(pending):
        raise SimulationError(
            "Every job must be placed exactly once",
            details={"jobs": len(pending), "outcomes": len(outcomes)},
        )
    verify_capacity(outcomes, slots)

    summarize(policy, outcomes, regions, metrics)
    log = policy_logger(logger, policy)
    if metrics.relaxed_rounds:
        log.warning("%d round(s) relaxed the delay constraint", metrics.relaxed_rounds)
    log.info(
        "%d jobs, carbon %.1f g, water %.3f L, violations %.2f%%",
        metrics.jobs,
        metrics.total_carbon,
        metrics.total_water,
        100.0 * metrics.violation_fraction,
    )
    return metrics, outcomes


def _savings(value: float, baseline: float) -> Optional[float]:
    if baseline == 0:
        return None
    return 100.0 * (1.0 - value / baseline)


def compare(runs: Mapping[str, RunMetrics], baseline_name: str = BASELINE_POLICY) -> dict[str, RunMetrics]:
    """
    Savings of every run relative to the baseline run.

    Savings are undefined (None) when the baseline total is zero.

    Raises:
        UnknownReferenceError: If the baseline run is missing
    """
    if baseline_name not in runs:
        raise UnknownReferenceError("policy", baseline_name, message=f"Baseline run '{baseline_name}' is missing")
    base = runs[baseline_name]
    return {
        name: replace(
            metrics,
            carbon_savings_pct=_savings(metrics.total_carbon, base.total_carbon),
            water_savings_pct=_savings(metrics.total_water, base.total_water),
        )
        for name, metrics in runs.items()
    }
