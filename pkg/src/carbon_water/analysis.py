"""Observations over ingested environment data.

Compares energy sources, summarizes each region's intensities and measures
how carbon and water intensity move against each other.
"""

from typing import Iterable, Mapping, Optional, Union

import numpy as np
import pandas as pd

from .footprint import water_intensity
from .models import EnergySourceProfile, RegionEnvSeries

SOURCE_SUMMARY_COLUMNS = ["source", "carbon_intensity", "ewif", "ci_ratio_to_lowest", "ewif_ratio_to_lowest"]
REGION_SUMMARY_COLUMNS = [
    "region",
    "points",
    "mean_carbon_intensity",
    "mean_ewif",
    "mean_wue",
    "mean_wsf",
    "mean_water_intensity",
    "carbon_rank",
    "water_rank",
    "ci_water_correlation",
]


def source_comparison(
    table: Union[Mapping[str, EnergySourceProfile], Iterable[EnergySourceProfile]],
) -> list[dict]:
    """
    Compare generation sources by carbon intensity and EWIF.

    Ratios are relative to the lowest non-zero value in the table; they are
    None when no source has a positive value.

    Returns:
        One row per source, sorted by carbon intensity then name
    """
    profiles = list(table.values()) if isinstance(table, Mapping) else list(table)
    positive_ci = [p.carbon_intensity for p in profiles if p.carbon_intensity > 0]
    positive_ewif = [p.ewif for p in profiles if p.ewif > 0]
    lowest_ci = min(positive_ci) if positive_ci else None
    lowest_ewif = min(positive_ewif) if positive_ewif else None

    rows = [
        {
            "source": p.name,
            "carbon_intensity": p.carbon_intensity,
            "ewif": p.ewif,
            "ci_ratio_to_lowest": p.carbon_intensity / lowest_ci if lowest_ci else None,
            "ewif_ratio_to_lowest": p.ewif / lowest_ewif if lowest_ewif else None,
        }
        for p in profiles
    ]
    return sorted(rows, key=lambda r: (r["carbon_intensity"], r["source"]))


def _pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    if x.size < 2 or np.std(x) == 0 or np.std(y) == 0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def _frame(series: RegionEnvSeries) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "carbon_intensity": [p.carbon_intensity for p in series.points],
            "ewif": [p.ewif for p in series.points],
            "wue": [p.wue for p in series.points],
            "wsf": [p.wsf_dc for p in series.points],
            "water_intensity": [water_intensity(p) for p in series.points],
        }
    )


def region_summary(series: Mapping[str, RegionEnvSeries]) -> list[dict]:
    """
    Per-region mean intensities with carbon and water ranks (1 = lowest).

    Returns:
        One row per region, sorted by mean carbon intensity
    """
    rows = []
    for region, s in series.items():
        frame = _frame(s)
        means = frame.mean()
        rows.append(
            {
                "region": region,
                "points": len(frame),
                "mean_carbon_intensity": float(means["carbon_intensity"]),
                "mean_ewif": float(means["ewif"]),
                "mean_wue": float(means["wue"]),
                "mean_wsf": float(means["wsf"]),
                "mean_water_intensity": float(means["water_intensity"]),
                "ci_water_correlation": _pearson(
                    frame["carbon_intensity"].to_numpy(), frame["water_intensity"].to_numpy()
                ),
            }
        )

    for key, rank in (("mean_carbon_intensity", "carbon_rank"), ("mean_water_intensity", "water_rank")):
        for position, row in enumerate(sorted(rows, key=lambda r: (r[key], r["region"])), start=1):
            row[rank] = position

    return sorted(rows, key=lambda r: (r["mean_carbon_intensity"], r["region"]))


def intensity_correlation(series: Mapping[str, RegionEnvSeries]) -> dict[str, Optional[float]]:
    """
    Pearson correlation between carbon and water intensity.

    Returns:
        Correlation over time per region, plus the correlation across region
        means under the key ``"across_regions"``; None where undefined
    """
    result: dict[str, Optional[float]] = {}
    mean_ci, mean_wi = [], []
    for region, s in series.items():
        frame = _frame(s)
        result[region] = _pearson(frame["carbon_intensity"].to_numpy(), frame["water_intensity"].to_numpy())
        mean_ci.append(frame["carbon_intensity"].mean())
        mean_wi.append(frame["water_intensity"].mean())
    result["across_regions"] = _pearson(np.asarray(mean_ci), np.asarray(mean_wi))
    return result
