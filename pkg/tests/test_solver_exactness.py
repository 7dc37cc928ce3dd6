"""Exactness of the hard and soft assignment solvers against exhaustive enumeration."""

import itertools
import time
from typing import Optional

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carbon_water.errors import SimulationError
from carbon_water.models import AssignmentProblem, AssignmentSolution, Infeasible
from carbon_water.scheduler import solve_hard, solve_soft
from tests.helpers import make_job, pending

INSTANCES = 250
EXACT = 1e-9


def make_problem(
    cost,
    capacity,
    delay_ratio=None,
    tolerance: float = 0.5,
    sigma: float = 10.0,
) -> AssignmentProblem:
    cost = np.asarray(cost, dtype=float)
    m_jobs, n_regions = cost.shape
    ratio = np.zeros_like(cost) if delay_ratio is None else np.asarray(delay_ratio, dtype=float)
    return AssignmentProblem(
        jobs=tuple(pending(make_job(f"j{m}", "r0")) for m in range(m_jobs)),
        regions=tuple(f"r{n}" for n in range(n_regions)),
        cost=cost,
        feasible=ratio <= tolerance + 1e-12,
        capacity=tuple(capacity),
        penalty_weight=sigma,
        delay_ratio=ratio,
        tolerance=tolerance,
    )


def brute_force(problem: AssignmentProblem, soft: bool) -> Optional[float]:
    """Best objective over every capacity-respecting assignment, None if there is none."""
    m_jobs, n_regions = problem.shape
    cost = problem.cost + problem.penalty_weight * problem.overshoot() if soft else problem.cost
    best = None
    for choice in itertools.product(range(n_regions), repeat=m_jobs):
        counts = np.bincount(choice, minlength=n_regions)
        if np.any(counts > np.asarray(problem.capacity)):
            continue
        if not soft and not all(problem.feasible[m, n] for m, n in enumerate(choice)):
            continue
        value = sum(cost[m, n] for m, n in enumerate(choice))
        if best is None or value < best:
            best = value
    return best


def assert_valid(problem: AssignmentProblem, solution: AssignmentSolution) -> None:
    """Every job placed once and no region over capacity."""
    assert set(solution.placement) == {j.job_id for j in problem.jobs}
    for n, region in enumerate(problem.regions):
        assert sum(1 for r in solution.placement.values() if r == region) <= problem.capacity[n]


def random_problem(seed: int) -> AssignmentProblem:
    rng = np.random.default_rng(seed)
    m_jobs = int(rng.integers(1, 7))
    n_regions = int(rng.integers(1, 5))
    tolerance = float(rng.choice([0.25, 0.5, 1.0]))
    return make_problem(
        cost=rng.uniform(0.0, 2.0, (m_jobs, n_regions)),
        capacity=rng.integers(0, 4, n_regions),
        delay_ratio=rng.uniform(0.0, 2.0 * tolerance, (m_jobs, n_regions)),
        tolerance=tolerance,
        sigma=float(rng.choice([0.5, 10.0])),
    )


class TestHardSolver:
    def test_single_pair(self):
        problem = make_problem([[0.7]], [1])
        solution = solve_hard(problem)
        assert solution.placement == {"j0": "r0"}
        assert solution.objective == pytest.approx(0.7)
        assert not solution.relaxed

    def test_two_by_two(self):
        problem = make_problem([[0.1, 0.9], [0.2, 0.8]], [1, 1])
        solution = solve_hard(problem)
        assert solution.placement == {"j0": "r0", "j1": "r1"}
        assert solution.objective == pytest.approx(0.9)

    def test_capacity_short(self):
        assert isinstance(solve_hard(make_problem([[0.1], [0.2]], [1])), Infeasible)

    def test_stranded_job(self):
        problem = make_problem([[0.1, 0.2]], [1, 1], delay_ratio=[[0.9, 0.8]], tolerance=0.5)
        result = solve_hard(problem)
        assert isinstance(result, Infeasible)
        assert "j0" in result.reason

    def test_empty_batch(self):
        problem = make_problem(np.zeros((0, 2)), [1, 1])
        assert solve_hard(problem) == AssignmentSolution(placement={})

    def test_equal_costs_prefer_lower_region(self):
        solution = solve_hard(make_problem([[0.5, 0.5, 0.5]], [1, 1, 1]))
        assert solution.placement == {"j0": "r0"}

    def test_ratio_at_tolerance_is_feasible(self):
        problem = make_problem([[0.3]], [1], delay_ratio=[[0.25]], tolerance=0.25)
        assert isinstance(solve_hard(problem), AssignmentSolution)

    def test_hard_solutions_carry_zero_penalty(self):
        solution = solve_hard(make_problem([[0.1, 0.9], [0.2, 0.8]], [1, 1]))
        assert set(solution.penalties.values()) == {0.0}

    @given(
        costs=st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=1, max_size=4),
        k=st.floats(min_value=0.01, max_value=100.0),
    )
    def test_single_job_scale_invariance(self, costs: list[float], k: float):
        """Property: scaling a job's cost row does not move its placement."""
        base = solve_hard(make_problem([costs], [1] * len(costs)))
        scaled = solve_hard(make_problem([[k * c for c in costs]], [1] * len(costs)))
        assert base.placement == scaled.placement

    def test_deterministic(self):
        problem = random_problem(7)
        assert solve_hard(problem) == solve_hard(problem)


class TestSoftSolver:
    def test_penalty_arithmetic(self):
        problem = make_problem([[0.5]], [1], delay_ratio=[[0.4]], tolerance=0.25, sigma=10.0)
        solution = solve_soft(problem)
        assert solution.relaxed
        assert solution.objective == pytest.approx(2.0)
        assert solution.penalties["j0"] == pytest.approx(0.15)

    def test_penalty_outweighs_cheaper_region(self):
        problem = make_problem([[0.2, 0.9]], [1, 1], delay_ratio=[[0.35, 0.25]], tolerance=0.25, sigma=10.0)
        solution = solve_soft(problem)
        assert solution.placement == {"j0": "r1"}
        assert solution.objective == pytest.approx(0.9)
        assert solution.penalties["j0"] == 0.0

    def test_matches_hard_when_all_feasible(self):
        problem = make_problem([[0.1, 0.9], [0.2, 0.8], [0.4, 0.3]], [2, 2], delay_ratio=np.full((3, 2), 0.1))
        hard = solve_hard(problem)
        soft = solve_soft(problem)
        assert soft.placement == hard.placement
        assert soft.objective == pytest.approx(hard.objective, abs=EXACT)
        assert set(soft.penalties.values()) == {0.0}

    def test_capacity_short_raises(self):
        with pytest.raises(SimulationError):
            solve_soft(make_problem([[0.1], [0.2]], [1]))

    def test_empty_batch(self):
        solution = solve_soft(make_problem(np.zeros((0, 1)), [1]))
        assert solution.placement == {}


class TestExhaustiveAgreement:
    def test_random_instances(self):
        """Property: both solvers reach the enumerated optimum on small random instances."""
        start = time.perf_counter()
        hard_feasible = soft_checked = 0

        for seed in range(INSTANCES):
            problem = random_problem(seed)
            m_jobs, _ = problem.shape

            expected_hard = brute_force(problem, soft=False)
            result = solve_hard(problem)
            if expected_hard is None:
                assert isinstance(result, Infeasible), f"seed {seed}"
            else:
                assert isinstance(result, AssignmentSolution), f"seed {seed}"
                assert result.objective == pytest.approx(expected_hard, abs=EXACT), f"seed {seed}"
                assert_valid(problem, result)
                assert all(
                    problem.feasible[int(j.job_id[1:]), problem.regions.index(result.placement[j.job_id])]
                    for j in problem.jobs
                )
                hard_feasible += 1

            if m_jobs > sum(problem.capacity):
                with pytest.raises(SimulationError):
                    solve_soft(problem)
                continue

            expected_soft = brute_force(problem, soft=True)
            solution = solve_soft(problem)
            assert solution.objective == pytest.approx(expected_soft, abs=EXACT), f"seed {seed}"
            assert_valid(problem, solution)
            soft_checked += 1

        assert hard_feasible > 20
        assert soft_checked > 100
        assert time.perf_counter() - start < 10.0
