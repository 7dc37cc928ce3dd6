"""Property-based tests for data validation."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from carbon_water.errors import CompletenessError, MonotonicityError, RangeError
from carbon_water.models import JobEnergyRecord, RegionEnvSeries, ServerSpec
from carbon_water.validation import (
    energy_record_errors,
    env_point_errors,
    is_finite_non_negative,
    server_errors,
    validate_latency,
    validate_series,
    validate_server,
)
from tests.helpers import NO_EMBODIED, env_point, latency_matrix

non_negative = st.floats(min_value=0.0, max_value=1e6)
negative = st.floats(max_value=-1e-9, allow_nan=False, allow_infinity=False)


@given(value=non_negative)
def test_finite_non_negative_accepted(value: float) -> None:
    assert is_finite_non_negative(value)


@given(value=st.one_of(negative, st.just(math.inf), st.just(math.nan)))
def test_negative_or_non_finite_rejected(value: float) -> None:
    assert not is_finite_non_negative(value)


@given(
    ci=non_negative,
    ewif=non_negative,
    wue=non_negative,
    wsf=non_negative,
    pue=st.floats(min_value=1.0, max_value=3.0),
)
def test_valid_env_point(ci: float, ewif: float, wue: float, wsf: float, pue: float) -> None:
    """For any in-range point, no problems are reported."""
    assert env_point_errors(env_point("a", 0, ci=ci, ewif=ewif, wue=wue, wsf=wsf, pue=pue)) == []


@pytest.mark.parametrize("field", ["ci", "ewif", "wue", "wsf"])
@given(value=negative)
def test_negative_intensity_named(field: str, value: float) -> None:
    """For any negative intensity, the problem names the field and the location."""
    errors = env_point_errors(env_point("a", 0, **{field: value}), where="env.csv:7")
    assert len(errors) == 1
    assert errors[0].startswith("env.csv:7: ")


@given(pue=st.floats(max_value=0.999, allow_nan=False, allow_infinity=False))
def test_pue_below_one(pue: float) -> None:
    (error,) = env_point_errors(env_point("a", 0, pue=pue))
    assert "pue must be >= 1" in error


def test_negative_timestamp() -> None:
    (error,) = env_point_errors(env_point("a", -1))
    assert "timestamp" in error


@given(energy=non_negative, exec_time=st.floats(min_value=1e-3, max_value=1e6))
def test_valid_energy_record(energy: float, exec_time: float) -> None:
    assert energy_record_errors(JobEnergyRecord(energy, exec_time)) == []


@given(exec_time=st.floats(max_value=0.0, allow_nan=False, allow_infinity=False))
def test_non_positive_exec_time(exec_time: float) -> None:
    (error,) = energy_record_errors(JobEnergyRecord(1.0, exec_time), where="bert")
    assert error.startswith("bert: exec_time must be > 0")


def test_negative_energy() -> None:
    (error,) = energy_record_errors(JobEnergyRecord(-0.5, 60.0))
    assert "energy must be >= 0" in error


class TestSeries:
    def test_valid(self) -> None:
        validate_series(RegionEnvSeries("a", (env_point("a", 0), env_point("a", 3600))))

    def test_empty(self) -> None:
        with pytest.raises(RangeError):
            validate_series(RegionEnvSeries("a", ()))

    @given(step=st.integers(min_value=-3600, max_value=0))
    def test_timestamps_must_increase(self, step: int) -> None:
        """For any repeated or decreasing timestamp, a monotonicity error names both values."""
        series = RegionEnvSeries("a", (env_point("a", 3600), env_point("a", 3600 + step)))
        with pytest.raises(MonotonicityError) as exc_info:
            validate_series(series)
        assert exc_info.value.details == {"region": "a", "previous": 3600, "current": 3600 + step}

    def test_foreign_point(self) -> None:
        series = RegionEnvSeries("a", (env_point("a", 0), env_point("b", 60)))
        with pytest.raises(RangeError) as exc_info:
            validate_series(series)
        assert "belongs to region 'b'" in exc_info.value.details["validation_errors"][0]

    def test_all_problems_collected(self) -> None:
        series = RegionEnvSeries("a", (env_point("a", 0, ci=-1.0), env_point("a", 60, pue=0.5)))
        with pytest.raises(RangeError) as exc_info:
            validate_series(series)
        assert len(exc_info.value.details["validation_errors"]) == 2


class TestServer:
    def test_no_embodied_footprint_is_valid(self) -> None:
        validate_server(NO_EMBODIED)

    @given(lifetime=st.floats(max_value=0.0, allow_nan=False, allow_infinity=False))
    def test_lifetime_positive(self, lifetime: float) -> None:
        with pytest.raises(RangeError):
            validate_server(ServerSpec(1.0, lifetime, 600.0, 1.8))

    def test_every_problem_listed(self) -> None:
        errors = server_errors(ServerSpec(-1.0, 1.0, 600.0, -2.0, wsf_server=-0.1))
        assert len(errors) == 3


class TestLatency:
    def test_complete(self) -> None:
        validate_latency(latency_matrix(("a", "b", "c"), 30.0))

    def test_missing_pair(self) -> None:
        matrix = latency_matrix(("a", "b"), 30.0)
        seconds = {k: v for k, v in matrix.seconds.items() if k != ("b", "a")}
        with pytest.raises(CompletenessError) as exc_info:
            validate_latency(type(matrix)(regions=matrix.regions, seconds=seconds))
        assert exc_info.value.details["missing_pairs"] == ["b->a"]
        assert "3 of 4" in str(exc_info.value)

    def test_non_zero_diagonal(self) -> None:
        matrix = latency_matrix(("a", "b"), 30.0)
        with pytest.raises(RangeError):
            validate_latency(type(matrix)(regions=matrix.regions, seconds={**matrix.seconds, ("a", "a"): 5.0}))

    @given(value=negative)
    def test_negative_entry(self, value: float) -> None:
        with pytest.raises(RangeError):
            validate_latency(latency_matrix(("a", "b"), value))
