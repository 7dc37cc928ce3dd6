"""Property-based tests for mapping results to result-file rows."""

from hypothesis import given
from hypothesis import strategies as st

from carbon_water.mapper import (
    METRIC_COLUMNS,
    OUTCOME_COLUMNS,
    SERIES_COLUMNS,
    map_metrics_to_row,
    map_outcome_to_row,
    map_round_times_to_rows,
    metric_columns,
    pivot_series,
)
from carbon_water.models import JobOutcome, RunMetrics

REGIONS = ("zurich", "oregon", "madrid")


def metric_row(policy: str, tolerance: float, capacity_scale: float = 1.0, carbon: float = 10.0) -> dict:
    return {
        "policy": policy,
        "tolerance": tolerance,
        "capacity_scale": capacity_scale,
        "carbon_savings_pct": carbon,
        "water_savings_pct": 5.0,
        "violation_pct": 0.0,
        "mean_normalized_service": 1.1,
    }


class TestOutcomeRows:
    def test_columns_in_order(self):
        outcome = JobOutcome("j1", "oregon", "madrid", 300.0, 360.0, 3960.0, 3660.0, 3600.0, 60.0, 55.0, 2.5, False)
        row = map_outcome_to_row(outcome, "cooptimize", 0.5, 1.0)

        assert list(row) == OUTCOME_COLUMNS
        assert row["policy"] == "cooptimize"
        assert row["home_region"] == "oregon"
        assert row["region"] == "madrid"
        assert row["transfer"] == 60.0
        assert row["violated"] is False


class TestMetricRows:
    @given(counts=st.lists(st.integers(min_value=0, max_value=1000), min_size=3, max_size=3))
    def test_region_shares(self, counts: list[int]):
        """Property: region shares are fractions of the job count and sum to one."""
        jobs = sum(counts)
        metrics = RunMetrics("home", jobs=jobs, region_counts=dict(zip(REGIONS, counts)))
        row = map_metrics_to_row(metrics, 0.5, 1.0, REGIONS)

        assert list(row) == metric_columns(REGIONS)
        shares = [row[f"region_share_{r}"] for r in REGIONS]
        assert all(0.0 <= s <= 1.0 for s in shares)
        if jobs:
            assert abs(sum(shares) - 1.0) < 1e-9
        else:
            assert shares == [0.0, 0.0, 0.0]

    def test_violation_as_percentage(self):
        metrics = RunMetrics("home", jobs=4, violation_fraction=0.25)
        assert map_metrics_to_row(metrics, 0.5, 1.0, ())["violation_pct"] == 25.0

    def test_undefined_savings_stay_none(self):
        row = map_metrics_to_row(RunMetrics("home"), 0.5, 1.0, ())
        assert row["carbon_savings_pct"] is None
        assert row["water_savings_pct"] is None

    def test_metric_columns_extend_fixed_columns(self):
        assert metric_columns(("a",)) == METRIC_COLUMNS + ["region_share_a"]


class TestOverheadRows:
    def test_one_row_per_round(self):
        metrics = RunMetrics("cooptimize", round_times=[0.002, 0.004])
        rows = map_round_times_to_rows(metrics, 0.5, 1.0, 4000.0)
        assert [r["round"] for r in rows] == [0, 1]
        assert rows[1]["fraction_of_mean_exec"] == 0.004 / 4000.0

    def test_no_mean_exec(self):
        rows = map_round_times_to_rows(RunMetrics("home", round_times=[0.1]), 0.5, 1.0, None)
        assert rows[0]["fraction_of_mean_exec"] is None


class TestPivotSeries:
    def test_one_policy_four_tolerances(self):
        rows = [metric_row("cooptimize", t) for t in (1.0, 0.25, 0.75, 0.5)]
        series = pivot_series(rows)

        assert {p["group"] for p in series} == {"cooptimize"}
        assert [p["x"] for p in series] == [0.25, 0.5, 0.75, 1.0]
        assert all(list(p) == SERIES_COLUMNS for p in series)

    def test_two_policies_keep_first_appearance_order(self):
        rows = [metric_row("water_greedy_opt", 0.5), metric_row("cooptimize", 0.5), metric_row("water_greedy_opt", 0.25)]
        series = pivot_series(rows)
        assert [(p["group"], p["x"]) for p in series] == [
            ("water_greedy_opt", 0.25),
            ("water_greedy_opt", 0.5),
            ("cooptimize", 0.5),
        ]

    def test_other_axis_qualifies_groups(self):
        rows = [metric_row("cooptimize", t, s) for s in (1.0, 3.0) for t in (0.25, 0.5)]
        groups = [p["group"] for p in pivot_series(rows)]
        assert groups == ["cooptimize@capacity_scale=1"] * 2 + ["cooptimize@capacity_scale=3"] * 2

    def test_capacity_axis(self):
        rows = [metric_row("cooptimize", 0.5, s) for s in (5.0, 1.0, 0.333)]
        series = pivot_series(rows, x_axis="capacity_scale")
        assert [p["x"] for p in series] == [0.333, 1.0, 5.0]
        assert {p["group"] for p in series} == {"cooptimize"}

    def test_empty(self):
        assert pivot_series([]) == []

    def test_undefined_savings_pass_through(self):
        (point,) = pivot_series([metric_row("home", 0.5, carbon=None)])
        assert point["carbon_savings_pct"] is None
