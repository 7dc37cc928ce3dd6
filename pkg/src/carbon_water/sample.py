"""Synthetic sample dataset.

Five regions whose grids pull carbon and water in different directions: a
hydro/biomass grid with very low carbon but high water intensity, a
coal-heavy grid with the opposite profile, and grids in between. Carbon
intensity follows a daily cycle and WUE follows it in anti-phase (cooling is
cheapest at night, solar output peaks at noon). Arrivals are uniform over the
trace window, i.e. a Poisson process conditioned on the job count.
"""

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from .config import POLICIES
from .footprint import mix_ewif
from .ingest import (
    ENV_COLUMNS,
    LATENCY_COLUMNS,
    MIX_COLUMNS,
    PROFILE_COLUMNS,
    SOURCE_COLUMNS,
    TRACE_COLUMNS,
)
from .logging_config import get_logger
from .models import EnergyMix, EnergySourceProfile

logger = get_logger(__name__)

HOUR = 3600
DAY = 24 * HOUR
PUE = 1.2
MARGIN_DAYS = 2
SLOTS_PER_REGION = 35

SOURCES = {
    "coal": EnergySourceProfile("coal", 1050.0, 1.55),
    "oil": EnergySourceProfile("oil", 900.0, 1.3),
    "natural_gas": EnergySourceProfile("natural_gas", 490.0, 0.95),
    "nuclear": EnergySourceProfile("nuclear", 12.0, 2.3),
    "hydro": EnergySourceProfile("hydro", 17.0, 17.0),
    "biomass": EnergySourceProfile("biomass", 230.0, 6.5),
    "solar": EnergySourceProfile("solar", 44.0, 0.3),
    "wind": EnergySourceProfile("wind", 11.0, 0.0),
}

# region: (mean carbon intensity, mean WUE, WSF, source shares)
REGIONS = {
    "zurich": (45.0, 0.6, 0.3, {"hydro": 0.2, "nuclear": 0.35, "biomass": 0.05, "solar": 0.1, "wind": 0.3}),
    "oregon": (300.0, 0.5, 0.9, {"hydro": 0.05, "natural_gas": 0.5, "wind": 0.3, "coal": 0.15}),
    "madrid": (55.0, 0.4, 0.1, {"nuclear": 0.65, "wind": 0.3, "hydro": 0.01, "solar": 0.04}),
    "milan": (360.0, 0.3, 0.05, {"natural_gas": 0.55, "coal": 0.06, "hydro": 0.065, "solar": 0.2, "wind": 0.125}),
    "mumbai": (650.0, 0.9, 0.4, {"coal": 0.7, "oil": 0.05, "natural_gas": 0.1, "hydro": 0.02, "solar": 0.08, "wind": 0.05}),
}

CI_AMPLITUDE = 0.10
WUE_AMPLITUDE = 0.20

# benchmark: execution seconds
BENCHMARKS = {
    "bert": 5400,
    "resnet": 7200,
    "gpt2": 14400,
    "yolo": 9000,
    "unet": 10800,
    "lstm": 12600,
    "transformer": 18000,
    "mobilenet": 7200,
    "vgg": 16200,
    "dcgan": 12600,
}
POWER_KW = (0.22, 0.30)
LATENCY_SECONDS = (20, 180)


def _env_frames(rng: np.random.Generator, days: int) -> tuple[pd.DataFrame, pd.DataFrame]:
    hours = np.arange((days + MARGIN_DAYS) * 24 + 1)
    timestamps = hours * HOUR
    phase = np.sin(2 * np.pi * (hours % 24 - 6) / 24)

    env_rows, mix_rows = [], []
    for region, (ci, wue, wsf, shares) in REGIONS.items():
        ewif = mix_ewif(EnergyMix(shares=shares), SOURCES)
        ci_t = ci * (1 - CI_AMPLITUDE * phase) + rng.normal(0, 0.02 * ci, hours.size)
        wue_t = wue * (1 + WUE_AMPLITUDE * phase) + rng.normal(0, 0.02 * wue, hours.size)
        for ts, c, w in zip(timestamps, np.clip(ci_t, 0, None), np.clip(wue_t, 0, None)):
            env_rows.append(
                {
                    "region": region,
                    "timestamp": int(ts),
                    "carbon_intensity": round(float(c), 3),
                    "ewif": round(ewif, 6),
                    "wue": round(float(w), 4),
                    "wsf": wsf,
                    "pue": PUE,
                }
            )
            mix_rows.extend(
                {"region": region, "timestamp": int(ts), "source": source, "share": share}
                for source, share in shares.items()
            )
    return pd.DataFrame(env_rows, columns=ENV_COLUMNS), pd.DataFrame(mix_rows, columns=MIX_COLUMNS)


def _trace_frame(rng: np.random.Generator, days: int, n_jobs: int) -> pd.DataFrame:
    arrivals = np.sort(rng.integers(0, days * DAY, n_jobs))
    homes = rng.choice(list(REGIONS), n_jobs)
    benchmarks = rng.choice(list(BENCHMARKS), n_jobs)
    return pd.DataFrame(
        {
            "job_id": [f"job-{i:05d}" for i in range(n_jobs)],
            "arrival": arrivals,
            "home_region": homes,
            "benchmark": benchmarks,
        },
        columns=TRACE_COLUMNS,
    )


def _profile_frame(rng: np.random.Generator) -> pd.DataFrame:
    power = rng.uniform(*POWER_KW, len(BENCHMARKS))
    return pd.DataFrame(
        {
            "benchmark": list(BENCHMARKS),
            "energy_kwh": [round(float(p * s / HOUR), 4) for p, s in zip(power, BENCHMARKS.values())],
            "exec_seconds": list(BENCHMARKS.values()),
        },
        columns=PROFILE_COLUMNS,
    )


def _latency_frame(rng: np.random.Generator) -> pd.DataFrame:
    names = list(REGIONS)
    upper = rng.integers(LATENCY_SECONDS[0], LATENCY_SECONDS[1] + 1, (len(names), len(names)))
    rows = []
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            seconds = 0 if i == j else int(upper[min(i, j), max(i, j)])
            rows.append({"from_region": a, "to_region": b, "seconds": seconds})
    return pd.DataFrame(rows, columns=LATENCY_COLUMNS)


def _config_text() -> str:
    return "\n".join(
        [
            "# [data]",
            "CW_ENV_PATH=env.csv",
            "CW_TRACE_PATH=trace.csv",
            "CW_PROFILES_PATH=profiles.csv",
            "CW_LATENCY_PATH=latency.csv",
            "CW_MIX_PATH=mix.csv",
            "CW_SOURCES_PATH=sources.csv",
            "",
            "# [simulation]",
            f"CW_SLOTS_PER_REGION={SLOTS_PER_REGION}",
            "",
            "# [run]",
            f"CW_POLICIES={','.join(POLICIES)}",
            "CW_TOLERANCES=0.25,0.5,0.75,1.0",
            "",
        ]
    )


def generate_sample(
    out_dir: Union[str, Path],
    seed: int = 0,
    days: int = 10,
    n_jobs: int = 2000,
) -> dict[str, Path]:
    """
    Write the synthetic dataset and a ready-to-run config.

    Args:
        out_dir: Target directory (created if needed)
        seed: Seed for every random draw
        days: Length of the trace window
        n_jobs: Number of jobs in the trace

    Returns:
        Written file paths keyed by short name (env, trace, profiles, latency,
        sources, mix, config)
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    env, mix = _env_frames(rng, days)
    frames = {
        "env": env,
        "mix": mix,
        "trace": _trace_frame(rng, days, n_jobs),
        "profiles": _profile_frame(rng),
        "latency": _latency_frame(rng),
        "sources": pd.DataFrame(
            [{"source": s.name, "carbon_intensity": s.carbon_intensity, "ewif": s.ewif} for s in SOURCES.values()],
            columns=SOURCE_COLUMNS,
        ),
    }

    paths = {}
    for name, frame in frames.items():
        paths[name] = out / f"{name}.csv"
        frame.to_csv(paths[name], index=False, lineterminator="\n")

    paths["config"] = out / "config.env"
    paths["config"].write_text(_config_text(), encoding="utf-8")

    logger.info("Wrote sample dataset (%d jobs, %d regions) to %s", n_jobs, len(REGIONS), out)
    return paths
