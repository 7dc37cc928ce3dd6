"""Property-based tests for configuration validation, layering and round-trips."""

import os
from pathlib import Path
from unittest.mock import patch

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from carbon_water.cli import load_config
from carbon_water.config import (
    DataSettings,
    DelayMode,
    RunConfig,
    SchedulerSettings,
    SimulationSettings,
    dump_settings,
    settings_from_mapping,
)
from carbon_water.errors import ConfigError
from tests.helpers import write_scenario


@pytest.fixture(scope="module")
def scenario(tmp_path_factory) -> dict[str, Path]:
    return write_scenario(
        tmp_path_factory.mktemp("config"),
        regions={"a": {}, "b": {}},
        jobs=[("j1", 0, "a", "x")],
        profiles={"x": (1.0, 3600)},
    )


@pytest.fixture
def isolated_cwd(tmp_path, monkeypatch):
    """No stray .env and no CW_* variables leak into a test."""
    monkeypatch.chdir(tmp_path)
    for key in [k for k in os.environ if k.startswith("CW_")]:
        monkeypatch.delenv(key)


class TestSchedulerSettings:
    def test_defaults(self):
        cfg = SchedulerSettings()
        assert (cfg.lambda_co2, cfg.lambda_h2o, cfg.lambda_ref) == (0.5, 0.5, 0.1)
        assert cfg.history_window == 10
        assert cfg.tolerance == 0.5
        assert cfg.sigma == 10.0
        assert cfg.round_interval == 300
        assert cfg.delay_mode == DelayMode.EFFECTIVE

    @given(lambda_co2=st.floats(min_value=0.0, max_value=1.0))
    def test_complementary_weights_accepted(self, lambda_co2: float):
        cfg = SchedulerSettings(lambda_co2=lambda_co2, lambda_h2o=1.0 - lambda_co2)
        assert cfg.lambda_co2 + cfg.lambda_h2o == pytest.approx(1.0)

    @given(
        lambda_co2=st.floats(min_value=0.0, max_value=1.0),
        lambda_h2o=st.floats(min_value=0.0, max_value=1.0),
    )
    def test_weights_must_sum_to_one(self, lambda_co2: float, lambda_h2o: float):
        """Property: weights not summing to one are rejected with a descriptive error."""
        if abs(lambda_co2 + lambda_h2o - 1.0) <= 1e-9:
            return
        with pytest.raises(ValidationError) as exc_info:
            SchedulerSettings(lambda_co2=lambda_co2, lambda_h2o=lambda_h2o)
        assert "lambda" in str(exc_info.value)

    @given(tolerance=st.floats(max_value=-1e-6, allow_nan=False))
    def test_negative_tolerance_rejected(self, tolerance: float):
        with pytest.raises(ValidationError):
            SchedulerSettings(tolerance=tolerance)

    def test_round_interval_positive(self):
        with pytest.raises(ValidationError):
            SchedulerSettings(round_interval=0)


class TestSimulationSettings:
    @given(
        slots=st.integers(min_value=1, max_value=500),
        scale=st.floats(min_value=0.05, max_value=20.0),
    )
    def test_scaled_slots_at_least_one(self, slots: int, scale: float):
        sim = SimulationSettings(slots_per_region=slots, capacity_scale=scale)
        effective = sim.slots_for(("a",))["a"]
        assert effective >= 1
        assert effective == max(1, round(slots / scale))

    def test_region_override(self):
        sim = SimulationSettings(slots_per_region=10, region_slots={"b": 4}, capacity_scale=2.0)
        assert sim.slots_for(("a", "b")) == {"a": 5, "b": 2}

    def test_negative_override_rejected(self):
        with pytest.raises(ValidationError):
            SimulationSettings(region_slots={"a": -1})

    def test_zero_override_rejected(self):
        with pytest.raises(ValidationError) as exc_info:
            SimulationSettings(slots_per_region=4, region_slots={"b": 0})
        assert "CW_REGIONS" in str(exc_info.value)

    def test_noise_below_one(self):
        with pytest.raises(ValidationError):
            SimulationSettings(energy_noise=1.0)


class TestDataSettings:
    def test_missing_file_named(self, scenario):
        with pytest.raises(ValidationError) as exc_info:
            DataSettings(
                env_path=scenario["env"],
                trace_path=scenario["env"].with_name("missing-trace.csv"),
                profiles_path=scenario["profiles"],
                latency_path=scenario["latency"],
            )
        assert "missing-trace.csv" in str(exc_info.value)

    def test_mix_needs_sources(self, scenario):
        with pytest.raises(ValidationError):
            DataSettings(
                env_path=scenario["env"],
                trace_path=scenario["trace"],
                profiles_path=scenario["profiles"],
                latency_path=scenario["latency"],
                mix_path=scenario["env"],
            )


class TestRunConfig:
    def data(self, scenario) -> DataSettings:
        return DataSettings(
            env_path=scenario["env"],
            trace_path=scenario["trace"],
            profiles_path=scenario["profiles"],
            latency_path=scenario["latency"],
        )

    def test_defaults(self, scenario):
        config = RunConfig(data=self.data(scenario))
        assert config.policies == ("home", "cooptimize")
        assert config.tolerances == (0.25, 0.5, 0.75, 1.0)
        assert config.simulation.seed == 0

    def test_unknown_policy(self, scenario):
        with pytest.raises(ValidationError) as exc_info:
            RunConfig(data=self.data(scenario), policies=("home", "fastest_first"))
        assert "fastest_first" in str(exc_info.value)

    def test_repeated_policy(self, scenario):
        with pytest.raises(ValidationError):
            RunConfig(data=self.data(scenario), policies=("home", "home"))

    def test_empty_tolerances(self, scenario):
        with pytest.raises(ValidationError):
            RunConfig(data=self.data(scenario), tolerances=())

    def test_non_positive_capacity_scale(self, scenario):
        with pytest.raises(ValidationError):
            RunConfig(data=self.data(scenario), capacity_scales=(1.0, 0.0))


class TestFlatSettings:
    def test_sections_and_lists(self):
        nested = settings_from_mapping(
            {
                "CW_TOLERANCE": "0.25",
                "CW_POLICIES": "home, cooptimize",
                "CW_REGION_SLOTS": "a:3,b:4",
                "CW_REGIONS": "a,b",
                "CW_SEED": "7",
                "UNRELATED": "x",
            }
        )
        assert nested["scheduler"] == {"tolerance": "0.25"}
        assert nested["policies"] == ["home", "cooptimize"]
        assert nested["simulation"] == {"region_slots": {"a": "3", "b": "4"}, "regions": ["a", "b"], "seed": "7"}
        assert nested["data"] == {}

    def test_relative_paths_resolve_against_base(self, tmp_path):
        nested = settings_from_mapping({"CW_ENV_PATH": "env.csv", "CW_OUT_DIR": "/abs/out"}, base_dir=tmp_path)
        assert nested["data"]["env_path"] == tmp_path / "env.csv"
        assert nested["out_dir"] == Path("/abs/out")

    def test_blank_values_skipped(self):
        assert settings_from_mapping({"CW_TOLERANCE": "  ", "CW_SEED": None})["scheduler"] == {}

    def test_bad_region_slot(self):
        with pytest.raises(ValueError):
            settings_from_mapping({"CW_REGION_SLOTS": "a3"})


@pytest.mark.usefixtures("isolated_cwd")
class TestLoadConfig:
    def test_file_paths_relative_to_config(self, scenario):
        config = load_config(scenario["config"], {})
        assert config.data.env_path == scenario["env"].resolve()

    def test_missing_required_path(self, tmp_path):
        path = tmp_path / "empty.env"
        path.write_text("CW_TOLERANCE=0.5\n")
        with pytest.raises(ConfigError) as exc_info:
            load_config(path, {})
        assert "env_path" in str(exc_info.value)

    def test_invalid_value(self, scenario):
        with pytest.raises(ConfigError):
            load_config(scenario["config"], {"CW_TOLERANCE": "fast"})

    def test_zero_region_slots(self, scenario):
        with pytest.raises(ConfigError):
            load_config(scenario["config"], {"CW_REGION_SLOTS": "a:0"})

    @settings(deadline=None, max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(
        file_tol=st.floats(min_value=0.0, max_value=2.0),
        env_tol=st.floats(min_value=0.0, max_value=2.0),
        cli_tol=st.floats(min_value=0.0, max_value=2.0),
    )
    def test_cli_over_env_over_file(self, scenario, file_tol: float, env_tol: float, cli_tol: float):
        """Property: CLI values win over CW_* variables, which win over the config file."""
        config_path = scenario["config"].with_name("layered.env")
        config_path.write_text(scenario["config"].read_text() + f"CW_TOLERANCE={file_tol!r}\n")

        assert load_config(config_path, {}).scheduler.tolerance == file_tol
        with patch.dict(os.environ, {"CW_TOLERANCE": repr(env_tol)}):
            assert load_config(config_path, {}).scheduler.tolerance == env_tol
            assert load_config(config_path, {"CW_TOLERANCE": repr(cli_tol)}).scheduler.tolerance == cli_tol

    def test_env_layer_merges_with_file(self, scenario):
        with patch.dict(os.environ, {"CW_SIGMA": "3.5"}):
            config = load_config(scenario["config"], {"CW_TOLERANCE": "0.75"})
        assert config.scheduler.sigma == 3.5
        assert config.scheduler.tolerance == 0.75
        assert config.scheduler.lambda_co2 == 0.5

    def test_dotenv_in_working_directory(self, scenario, tmp_path):
        (tmp_path / ".env").write_text("CW_SEED=11\n")
        try:
            config = load_config(scenario["config"], {})
        finally:
            os.environ.pop("CW_SEED", None)
        assert config.simulation.seed == 11


@pytest.mark.usefixtures("isolated_cwd")
class TestDumpSettings:
    def test_round_trip(self, scenario, tmp_path):
        original = load_config(
            scenario["config"],
            {
                "CW_TOLERANCE": "0.3",
                "CW_POLICIES": "home,least_load",
                "CW_REGION_SLOTS": "a:2",
                "CW_DELAY_MODE": "literal",
                "CW_CAPACITY_SCALES": "0.5,2.0",
                "CW_OUT_DIR": str((tmp_path / "out").resolve()),
            },
        )
        dumped = tmp_path / "dumped.env"
        dumped.write_text(dump_settings(original))

        assert load_config(dumped, {}) == original

    def test_defaults_written(self, scenario):
        text = dump_settings(load_config(scenario["config"], {}))
        assert "CW_LAMBDA_CO2=0.5" in text
        assert "CW_ROUND_INTERVAL=300" in text
        assert "CW_TOLERANCES=0.25,0.5,0.75,1.0" in text
        assert "# [scheduler]" in text
