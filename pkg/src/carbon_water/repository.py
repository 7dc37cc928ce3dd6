"""Result-file repository for runs and sweeps."""

from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd

from .errors import DataError, ParseError
from .ingest import _numeric, _read_csv, _text
from .logging_config import get_logger
from .mapper import (
    METRIC_COLUMNS,
    OUTCOME_COLUMNS,
    OVERHEAD_COLUMNS,
    SERIES_COLUMNS,
)

logger = get_logger(__name__)

MISSING_MARKER = "NA"
SAVINGS_COLUMNS = ("carbon_savings_pct", "water_savings_pct")


class ResultRepository:
    """Writes result tables into one output directory."""

    OUTCOMES = "outcomes.csv"
    METRICS = "metrics.csv"
    OVERHEAD = "overhead.csv"
    SERIES = "series.csv"
    CONFIG = "config.env"

    def __init__(self, out_dir: Union[str, Path]):
        """Initialize repository for an output directory.

        Args:
            out_dir: Directory the tables are written into (created on demand)
        """
        self.out_dir = Path(out_dir)

    def _path(self, name: str) -> Path:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise DataError(
                f"Cannot create output directory {self.out_dir}: {e}",
                details={"path": str(self.out_dir)},
            ) from e
        return self.out_dir / name

    def write_table(self, name: str, rows: Iterable[dict], columns: list[str]) -> Path:
        """Write rows as CSV with a fixed column order.

        Returns:
            Path of the written file
        """
        path = self._path(name)
        frame = pd.DataFrame(list(rows), columns=columns)
        frame.to_csv(path, index=False, na_rep=MISSING_MARKER, lineterminator="\n")
        logger.debug("Wrote %d row(s) to %s", len(frame), path)
        return path

    def write_outcomes(self, rows: Iterable[dict]) -> Path:
        return self.write_table(self.OUTCOMES, rows, OUTCOME_COLUMNS)

    def write_metrics(self, rows: Iterable[dict], columns: Optional[list[str]] = None) -> Path:
        return self.write_table(self.METRICS, rows, columns or METRIC_COLUMNS)

    def write_overhead(self, rows: Iterable[dict]) -> Path:
        return self.write_table(self.OVERHEAD, rows, OVERHEAD_COLUMNS)

    def write_series(self, rows: Iterable[dict]) -> Path:
        return self.write_table(self.SERIES, rows, SERIES_COLUMNS)

    def write_config(self, text: str) -> Path:
        path = self._path(self.CONFIG)
        path.write_text(text, encoding="utf-8")
        return path


def _optional_numeric(frame: pd.DataFrame, column: str, path: Path) -> list[Optional[float]]:
    """Parse a numeric column where the missing marker stands for undefined."""
    values: list[Optional[float]] = []
    for row, raw in enumerate(frame[column].tolist()):
        raw = raw.strip()
        if raw in ("", MISSING_MARKER):
            values.append(None)
            continue
        try:
            values.append(float(raw))
        except ValueError:
            raise ParseError(str(path), line=row + 2, message=f"column '{column}' is not a number: '{raw}'")
    return values


def read_metrics(path: Union[str, Path]) -> list[dict]:
    """
    Read a ``metrics.csv`` written by a run or sweep.

    An empty file yields no rows.

    Raises:
        DataError: If the file does not exist
        SchemaError: If metric columns are missing
        ParseError: If a numeric cell cannot be parsed
    """
    path = Path(path)
    frame = _read_csv(path, METRIC_COLUMNS, allow_empty=True)
    if frame.empty:
        return []

    policies = _text(frame, "policy", path)
    numeric = {
        column: _numeric(frame, column, path)
        for column in ("tolerance", "capacity_scale", "violation_pct", "mean_normalized_service")
    }
    savings = {column: _optional_numeric(frame, column, path) for column in SAVINGS_COLUMNS}

    rows = []
    for i, policy in enumerate(policies):
        row = {"policy": policy}
        row.update({column: float(values[i]) for column, values in numeric.items()})
        row.update({column: values[i] for column, values in savings.items()})
        rows.append(row)
    return rows


def read_metric_files(paths: Iterable[Union[str, Path]]) -> list[dict]:
    """Concatenate metric rows from several files, in argument order."""
    rows: list[dict] = []
    for path in paths:
        rows.extend(read_metrics(path))
    return rows


def overhead_summary(seconds: Iterable[float]) -> tuple[float, float]:
    """Median and 95th-percentile of decision times (zero when there are none)."""
    values = np.asarray(list(seconds), dtype=float)
    if values.size == 0:
        return 0.0, 0.0
    return float(np.median(values)), float(np.percentile(values, 95))
