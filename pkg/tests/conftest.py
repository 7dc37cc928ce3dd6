"""Shared fixtures."""

from pathlib import Path

import pytest

from carbon_water.ingest import Dataset, load_dataset
from carbon_water.sample import generate_sample


@pytest.fixture(scope="session")
def sample_paths(tmp_path_factory) -> dict[str, Path]:
    """The bundled synthetic dataset, generated once per session."""
    return generate_sample(tmp_path_factory.mktemp("sample"), seed=0)


@pytest.fixture(scope="session")
def sample_dataset(sample_paths) -> Dataset:
    return load_dataset(
        sample_paths["env"],
        sample_paths["trace"],
        sample_paths["profiles"],
        sample_paths["latency"],
        mix_path=sample_paths["mix"],
        sources_path=sample_paths["sources"],
    )
