"""Error classes for the carbon/water scheduler."""

from datetime import datetime
from typing import Any, Optional


class CarbonWaterError(Exception):
    """Base error for all scheduler, ingestion and simulation failures."""

    def __init__(
        self,
        error_type: str,
        message: str,
        details: Optional[dict[str, Any]] = None,
    ):
        """Initialize error."""
        self.error_type = error_type
        self.message = message
        self.details = details or {}
        self.timestamp = datetime.now()
        super().__init__(message)

    def __str__(self) -> str:
        return f"[{self.error_type}] {self.message}"


class ConfigError(CarbonWaterError):
    """Configuration error."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        """Initialize config error."""
        super().__init__("config", message, details)


class DataError(CarbonWaterError):
    """Base error for input datasets that cannot be turned into domain types."""

    def __init__(
        self,
        message: str,
        details: Optional[dict[str, Any]] = None,
        error_type: str = "data",
    ):
        super().__init__(error_type, message, details)


class SchemaError(DataError):
    """A dataset is missing required columns."""

    def __init__(
        self,
        path: str,
        missing: list[str],
        message: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        """Initialize schema error.

        Args:
            path: File that was being read
            missing: Column names absent from the header
            message: Optional custom message
            details: Additional error context
        """
        error_details = details or {}
        error_details["path"] = path
        error_details["missing_columns"] = missing
        super().__init__(
            message or f"{path}: missing column(s) {', '.join(missing)}",
            error_details,
            error_type="schema",
        )
        self.path = path
        self.missing = missing


class ParseError(DataError):
    """A value in a dataset could not be parsed."""

    def __init__(
        self,
        path: str,
        line: int,
        message: str,
        details: Optional[dict[str, Any]] = None,
    ):
        """Initialize parse error.

        Args:
            path: File that was being read
            line: 1-based line number in the file (header is line 1)
            message: What could not be parsed
            details: Additional error context
        """
        error_details = details or {}
        error_details["path"] = path
        error_details["line"] = line
        super().__init__(f"{path}:{line}: {message}", error_details, error_type="parse")
        self.path = path
        self.line = line


class MonotonicityError(DataError):
    """Time-series timestamps are not strictly increasing."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message, details, error_type="monotonicity")


class RangeError(DataError):
    """A value lies outside its admissible range."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message, details, error_type="range")


class CompletenessError(DataError):
    """A dataset that must cover a full index set has gaps."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message, details, error_type="completeness")


class UnknownReferenceError(DataError):
    """A record refers to a region, benchmark or energy source that does not exist."""

    def __init__(
        self,
        kind: str,
        name: str,
        message: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        """Initialize unknown reference error.

        Args:
            kind: Kind of the missing entity ("region", "benchmark", "source")
            name: The unresolved identifier
            message: Optional custom message
            details: Additional error context
        """
        error_details = details or {}
        error_details["kind"] = kind
        error_details["name"] = name
        super().__init__(
            message or f"Unknown {kind}: {name}",
            error_details,
            error_type="reference",
        )
        self.kind = kind
        self.name = name


class FootprintError(CarbonWaterError):
    """Footprint model evaluated outside its domain."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__("footprint", message, details)


class SimulationError(CarbonWaterError):
    """Trace replay could not proceed."""

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        """Initialize simulation error."""
        super().__init__("simulation", message, details)
