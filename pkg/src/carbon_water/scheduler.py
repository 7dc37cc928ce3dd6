"""Decision controller for co-optimizing carbon and water across regions.

Each scheduling round builds an assignment problem over the pending jobs and
the regions with free slots, solves it exactly, and falls back to a
penalized (soft) delay constraint when the hard one cannot be met. When more
jobs are pending than slots exist, the slack manager picks the most urgent.

The assignment constraint matrix (one region per job, at most cap(n) jobs per
region) is totally unimodular, so the integer optimum equals the optimum of a
rectangular linear assignment over slot-expanded columns. That is what
:func:`solve_hard` and :func:`solve_soft` compute.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import DelayMode, SchedulerSettings, UrgencyMode
from .errors import SimulationError
from .footprint import total_carbon, total_water, water_intensity
from .logging_config import get_logger
from .models import (
    AssignmentProblem,
    AssignmentSolution,
    Infeasible,
    LatencyMatrix,
    PendingJob,
    RegionEnvPoint,
    ServerSpec,
    SolveResult,
)

logger = get_logger(__name__)

# Slack on the hard delay test so that ratios equal to the tolerance stay feasible
FEASIBILITY_EPSILON = 1e-12

# Per-region-index perturbation (relative to the largest cost) used to prefer
# lower region indices among equal-cost assignments
TIE_EPSILON = 1e-13


@dataclass(frozen=True)
class HistoryLearner:
    """Normalized per-region footprints of the last ``window`` rounds."""

    window: int
    rounds: tuple[Mapping[str, tuple[float, float]], ...] = ()

    def refs(self, regions: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """Windowed mean of normalized carbon and water per region (0 when unseen)."""
        carbon = np.zeros(len(regions))
        water = np.zeros(len(regions))
        if not self.rounds:
            return carbon, water
        for i, region in enumerate(regions):
            seen = [r[region] for r in self.rounds if region in r]
            if seen:
                carbon[i] = sum(c for c, _ in seen) / len(self.rounds)
                water[i] = sum(w for _, w in seen) / len(self.rounds)
        return carbon, water


def history_update(
    history: HistoryLearner,
    carbon: Mapping[str, float],
    water: Mapping[str, float],
) -> HistoryLearner:
    """
    Push one round's per-region footprints and evict beyond the window.

    Footprints are normalized by the round's cross-region maximum (all zero when
    that maximum is zero).

    Args:
        history: Current learner state
        carbon: Round carbon footprint per region
        water: Round water footprint per region

    Returns:
        New learner state
    """
    c_max = max(carbon.values(), default=0.0)
    w_max = max(water.values(), default=0.0)
    entry = {
        region: (
            carbon[region] / c_max if c_max > 0 else 0.0,
            water.get(region, 0.0) / w_max if w_max > 0 else 0.0,
        )
        for region in carbon
    }
    rounds = (history.rounds + (entry,))[-history.window :]
    return HistoryLearner(window=history.window, rounds=rounds)


def job_max_footprints(
    job: PendingJob,
    envs: Mapping[str, RegionEnvPoint],
    server: ServerSpec,
) -> tuple[float, float]:
    """
    Footprints of a job in the worst region, used as normalization denominators.

    Carbon uses the highest carbon intensity among the regions, water uses the
    region with the highest water intensity.

    Returns:
        (max carbon in gCO2, max water in litres)
    """
    rec = job.job.estimate
    ci_max = max(env.carbon_intensity for env in envs.values())
    worst_water = max(envs.values(), key=water_intensity)
    return total_carbon(rec, ci_max, server), total_water(rec, worst_water, server)


def _delay_ratio(
    job: PendingJob,
    region: str,
    latency: LatencyMatrix,
    now: float,
    mode: DelayMode,
) -> float:
    delay = latency.get(job.job.home_region, region)
    if mode == DelayMode.EFFECTIVE:
        delay += job.waited(now)
    return delay / job.effective_exec


def build_problem(
    batch: Sequence[PendingJob],
    envs: Mapping[str, RegionEnvPoint],
    latency: LatencyMatrix,
    caps: Mapping[str, int],
    cfg: SchedulerSettings,
    history: HistoryLearner,
    server: ServerSpec,
    now: float,
) -> AssignmentProblem:
    """
    Build one round's assignment problem.

    Args:
        batch: Jobs to place (non-empty)
        envs: Environment of every region sampled at ``now``
        latency: Inter-region transfer latencies
        caps: Remaining slots per region
        cfg: Scheduler weights, tolerance and penalty
        history: History learner state
        server: Embodied footprint parameters
        now: Current round time

    Returns:
        Problem with normalized costs for every pair and hard delay feasibility
    """
    regions = tuple(envs)
    m_jobs, n_regions = len(batch), len(regions)

    carbon = np.empty((m_jobs, n_regions))
    water = np.empty((m_jobs, n_regions))
    ratio = np.empty((m_jobs, n_regions))
    co2_max = np.empty(m_jobs)
    h2o_max = np.empty(m_jobs)

    for m, job in enumerate(batch):
        rec = job.job.estimate
        co2_max[m], h2o_max[m] = job_max_footprints(job, envs, server)
        for n, region in enumerate(regions):
            env = envs[region]
            carbon[m, n] = total_carbon(rec, env.carbon_intensity, server)
            water[m, n] = total_water(rec, env, server)
            ratio[m, n] = _delay_ratio(job, region, latency, now, cfg.delay_mode)

    with np.errstate(divide="ignore", invalid="ignore"):
        norm_carbon = np.where(co2_max[:, None] > 0, carbon / co2_max[:, None], 0.0)
        norm_water = np.where(h2o_max[:, None] > 0, water / h2o_max[:, None], 0.0)

    ref_carbon, ref_water = history.refs(regions)
    history_term = cfg.lambda_ref * (cfg.lambda_co2 * ref_carbon + cfg.lambda_h2o * ref_water)

    cost = cfg.lambda_co2 * norm_carbon + cfg.lambda_h2o * norm_water + history_term[None, :]

    return AssignmentProblem(
        jobs=tuple(batch),
        regions=regions,
        cost=cost,
        feasible=ratio <= cfg.tolerance + FEASIBILITY_EPSILON,
        capacity=tuple(max(0, int(caps.get(r, 0))) for r in regions),
        penalty_weight=cfg.sigma,
        delay_ratio=ratio,
        tolerance=cfg.tolerance,
        carbon=carbon,
        water=water,
    )


def _assign(cost: np.ndarray, allowed: np.ndarray, capacity: Sequence[int]) -> Optional[np.ndarray]:
    """
    Exact minimum-cost assignment of every row to a column group.

    Args:
        cost: M x N cost matrix
        allowed: M x N mask of admissible pairs
        capacity: Per-column-group capacity

    Returns:
        Chosen region index per job, or None if no complete assignment exists
    """
    m_jobs, n_regions = cost.shape
    slots = np.repeat(np.arange(n_regions), [min(c, m_jobs) for c in capacity])
    if slots.size < m_jobs:
        return None

    finite = np.abs(cost[allowed]) if allowed.any() else np.zeros(1)
    scale = max(1.0, float(finite.max()) if finite.size else 1.0)
    tie = TIE_EPSILON * scale * slots / max(1, n_regions)

    expanded = np.where(allowed[:, slots], cost[:, slots] + tie[None, :], np.inf)
    try:
        rows, cols = linear_sum_assignment(expanded)
    except ValueError:
        return None
    if len(rows) < m_jobs:
        return None

    chosen = np.empty(m_jobs, dtype=int)
    chosen[rows] = slots[cols]
    return chosen


def solve_hard(problem: AssignmentProblem) -> SolveResult:
    """
    Exact optimum under one-region-per-job, capacity and hard delay constraints.

    Returns:
        The optimal solution, or Infeasible when no assignment meets every constraint
    """
    m_jobs, _ = problem.shape
    if m_jobs == 0:
        return AssignmentSolution(placement={})

    if sum(problem.capacity) < m_jobs:
        return Infeasible(f"total capacity {sum(problem.capacity)} < {m_jobs} jobs")

    stranded = np.flatnonzero(~problem.feasible.any(axis=1))
    if stranded.size:
        job_id = problem.jobs[int(stranded[0])].job_id
        return Infeasible(f"job {job_id} has no region within its delay tolerance")

    chosen = _assign(problem.cost, problem.feasible, problem.capacity)
    if chosen is None:
        return Infeasible("capacity cannot accommodate every job within tolerance")

    return AssignmentSolution(
        placement={job.job_id: problem.regions[n] for job, n in zip(problem.jobs, chosen)},
        relaxed=False,
        penalties={job.job_id: 0.0 for job in problem.jobs},
        objective=float(sum(problem.cost[m, n] for m, n in enumerate(chosen))),
    )


def solve_soft(problem: AssignmentProblem) -> AssignmentSolution:
    """
    Exact optimum with the delay constraint turned into a linear penalty.

    Every pair is admissible; placing job m in region n costs
    ``cost[m][n] + sigma * max(0, delay_ratio[m][n] - tolerance)``.

    Raises:
        SimulationError: If the regions cannot hold every job (callers select first)
    """
    m_jobs, _ = problem.shape
    if m_jobs == 0:
        return AssignmentSolution(placement={}, relaxed=True)

    overshoot = problem.overshoot()
    augmented = problem.cost + problem.penalty_weight * overshoot
    chosen = _assign(augmented, np.ones_like(problem.feasible, dtype=bool), problem.capacity)
    if chosen is None:
        raise SimulationError(
            f"soft controller needs {m_jobs} slots, only {sum(problem.capacity)} free",
            details={"jobs": m_jobs, "capacity": list(problem.capacity)},
        )

    return AssignmentSolution(
        placement={job.job_id: problem.regions[n] for job, n in zip(problem.jobs, chosen)},
        relaxed=True,
        penalties={job.job_id: float(overshoot[m, n]) for m, (job, n) in enumerate(zip(problem.jobs, chosen))},
        objective=float(sum(augmented[m, n] for m, n in enumerate(chosen))),
    )


def urgency(
    job: PendingJob,
    latency: LatencyMatrix,
    cfg: SchedulerSettings,
    now: float,
    regions: Optional[tuple[str, ...]] = None,
) -> float:
    """
    Remaining delay budget of a queued job in seconds; smaller is more urgent.

    ``tolerance * exec_time - mean latency from home - waited``. The mean
    latency includes the zero self-latency of the home region.
    """
    budget = cfg.tolerance * job.effective_exec - latency.mean_from(job.job.home_region, regions)
    if cfg.urgency_mode == UrgencyMode.LITERAL:
        return budget + job.waited(now)
    return budget - job.waited(now)


def select_priority(
    jobs: Sequence[PendingJob],
    k: int,
    latency: LatencyMatrix,
    cfg: SchedulerSettings,
    now: float,
    regions: Optional[tuple[str, ...]] = None,
) -> tuple[list[PendingJob], list[PendingJob]]:
    """
    Pick the ``k`` most urgent jobs.

    Ties are broken by earlier receipt, then job id.

    Returns:
        (selected, deferred) in urgency order
    """
    ranked = sorted(
        jobs,
        key=lambda j: (urgency(j, latency, cfg, now, regions), j.received_at, j.job_id),
    )
    k = max(0, min(k, len(ranked)))
    return ranked[:k], ranked[k:]


def round_region_footprints(problem: AssignmentProblem) -> tuple[dict[str, float], dict[str, float]]:
    """Mean footprint of the round's batch if run in each region."""
    carbon = problem.carbon.mean(axis=0)
    water = problem.water.mean(axis=0)
    return (
        {r: float(c) for r, c in zip(problem.regions, carbon)},
        {r: float(w) for r, w in zip(problem.regions, water)},
    )


@dataclass(frozen=True)
class RoundDecision:
    """Outcome of one scheduling round."""

    solution: AssignmentSolution
    deferred: list[PendingJob] = field(default_factory=list)
    history: Optional[HistoryLearner] = None
    path: str = "idle"


def schedule_round(
    new_jobs: Sequence[PendingJob],
    carryover: Sequence[PendingJob],
    envs: Mapping[str, RegionEnvPoint],
    latency: LatencyMatrix,
    caps: Mapping[str, int],
    cfg: SchedulerSettings,
    history: HistoryLearner,
    server: ServerSpec,
    now: float,
) -> RoundDecision:
    """
    Run one round of the scheduling framework.

    All pending jobs (new and carried over) are considered together. If they
    outnumber the free slots, the most urgent ones fill every slot under the
    soft controller and the rest are deferred. Otherwise the hard controller
    runs, falling back to the soft controller when it is infeasible.

    Returns:
        Decision with placements, deferred jobs and the updated history
    """
    pending = sorted([*carryover, *new_jobs], key=lambda j: (j.received_at, j.job_id))
    if not pending:
        return RoundDecision(solution=AssignmentSolution(placement={}), history=history)

    regions = tuple(envs)
    total = sum(max(0, caps.get(r, 0)) for r in regions)

    if total == 0:
        logger.debug("t=%s: no free slots, deferring %d job(s)", now, len(pending))
        return RoundDecision(
            solution=AssignmentSolution(placement={}),
            deferred=list(pending),
            history=history,
            path="full",
        )

    deferred: list[PendingJob] = []
    if len(pending) > total:
        selected, deferred = select_priority(pending, total, latency, cfg, now, regions)
        problem = build_problem(selected, envs, latency, caps, cfg, history, server, now)
        solution = solve_soft(problem)
        path = "slack"
    else:
        problem = build_problem(pending, envs, latency, caps, cfg, history, server, now)
        result = solve_hard(problem)
        if isinstance(result, Infeasible):
            logger.debug("t=%s: hard controller infeasible (%s), relaxing", now, result.reason)
            solution = solve_soft(problem)
            path = "soft"
        else:
            solution = result
            path = "hard"

    carbon, water = round_region_footprints(problem)
    history = history_update(history, carbon, water)

    logger.debug(
        "t=%s: %s path placed %d, deferred %d, objective %.6f",
        now,
        path,
        len(solution.placement),
        len(deferred),
        solution.objective,
    )
    return RoundDecision(solution=solution, deferred=deferred, history=history, path=path)
