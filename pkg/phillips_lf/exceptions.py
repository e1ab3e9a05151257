# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Exception hierarchy shared by every phillips-lf module."""

from __future__ import annotations

from typing import Any


class PhillipsLfError(Exception):
    """Base error for the package.

    Args:
        message: Human readable description.
        error_code: Short machine readable code, e.g. ``"E_GAP"``.
        details: Extra context (series name, offending years, row numbers).
    """

    default_code = "E_PHILLIPS_LF"

    def __init__(self, message: str, error_code: str | None = None, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.default_code
        self.details = details or {}

    def __str__(self) -> str:
        return self.message


class SeriesError(PhillipsLfError):
    default_code = "E_SERIES"


class TransformError(SeriesError):
    default_code = "E_TRANSFORM"


class IngestError(PhillipsLfError):
    default_code = "E_INGEST"


class CsvFormatError(IngestError):
    """Malformed CSV input; ``details["row"]`` holds the 1-based data row."""

    default_code = "E_CSV"


class ConfigError(PhillipsLfError):
    default_code = "E_CONFIG"


class InsufficientDataError(PhillipsLfError):
    default_code = "E_SHORT"


class DegenerateError(PhillipsLfError):
    default_code = "E_DEGENERATE"


class DegeneratePredictorError(DegenerateError):
    default_code = "E_DEGENERATE_PREDICTOR"


class SearchError(PhillipsLfError):
    default_code = "E_SEARCH"


class HorizonError(PhillipsLfError):
    default_code = "E_HORIZON"


class UnsupportedTestError(PhillipsLfError):
    default_code = "E_UNSUPPORTED_TEST"


class OutputError(PhillipsLfError):
    default_code = "E_OUTPUT"
