# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Year-indexed series type and the deterministic transforms applied to it.

Every function here is pure: inputs are frozen pydantic models and a new series is always
returned. Annual frequency only; missing values cannot be represented.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from enum import StrEnum
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.stats import median_abs_deviation

from phillips_lf.exceptions import SeriesError, TransformError


class SeriesUnit(StrEnum):
    LEVEL = "level"
    RATE = "rate_per_year"
    CUMULATIVE = "cumulative"


class AnnualSeries(BaseModel):
    """Consecutive annual observations starting at ``start_year``."""

    model_config = ConfigDict(frozen=True)

    start_year: int
    values: tuple[float, ...]
    unit: SeriesUnit = SeriesUnit.RATE
    label: str = ""

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value):
        if isinstance(value, np.ndarray):
            return tuple(float(v) for v in value.tolist())
        return value

    @field_validator("values")
    @classmethod
    def _check_values(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("an annual series needs at least one value")
        if not all(math.isfinite(v) for v in value):
            raise ValueError("missing or non-finite values are not representable; resolve gaps at ingestion")
        return value

    @classmethod
    def from_array(
        cls,
        start_year: int,
        values: Sequence[float] | np.ndarray,
        unit: SeriesUnit = SeriesUnit.RATE,
        label: str = "",
    ) -> AnnualSeries:
        return cls(start_year=int(start_year), values=np.asarray(values, dtype=float), unit=unit, label=label)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.end_year + 1)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def covers(self, first_year: int, last_year: int) -> bool:
        return self.start_year <= first_year and last_year <= self.end_year

    def value_at(self, year: int) -> float:
        if not self.start_year <= year <= self.end_year:
            raise SeriesError(
                f"year {year} outside {self.label or 'series'} support {self.start_year}-{self.end_year}",
                details={"year": year},
            )
        return self.values[year - self.start_year]

    def window(self, first_year: int, last_year: int) -> AnnualSeries:
        """Restrict the series to ``[first_year, last_year]`` (inclusive)."""
        if first_year > last_year or not self.covers(first_year, last_year):
            raise SeriesError(
                f"window {first_year}-{last_year} not inside {self.label or 'series'} support "
                f"{self.start_year}-{self.end_year}",
                details={"window": [first_year, last_year], "support": [self.start_year, self.end_year]},
            )
        lo = first_year - self.start_year
        return self.model_copy(update={"start_year": first_year, "values": self.values[lo : lo + last_year - first_year + 1]})

    def to_pandas(self) -> pd.Series:
        return pd.Series(self.array, index=pd.Index(self.years, name="year"), name=self.label or "value")


class YearWindow(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    first_year: int
    last_year: int

    @model_validator(mode="after")
    def _ordered(self) -> YearWindow:
        if self.first_year >= self.last_year:
            raise ValueError(f"window {self.first_year}-{self.last_year} must span at least two years")
        return self

    def __contains__(self, year: object) -> bool:
        return isinstance(year, int) and self.first_year <= year <= self.last_year

    @property
    def length(self) -> int:
        return self.last_year - self.first_year + 1


class SpikeRepairSpec(BaseModel):
    """Which points of a series are spikes to be replaced by the neighbour mean."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Literal["explicit_years", "mad_threshold"] = "mad_threshold"
    years: tuple[int, ...] = ()
    k: float = Field(default=5.0, gt=0)

    @model_validator(mode="after")
    def _years_only_when_explicit(self) -> SpikeRepairSpec:
        if self.mode == "mad_threshold" and self.years:
            raise ValueError("years are only used with mode=explicit_years")
        return self


def log_change_rate(levels: AnnualSeries) -> AnnualSeries:
    """Annual log change ``ln x(t) - ln x(t-1)``; the result starts one year later."""
    if levels.unit is not SeriesUnit.LEVEL:
        raise TransformError(f"log_change_rate needs a level series, got {levels.unit.value}")
    if len(levels) < 2:
        raise TransformError("log_change_rate needs at least two levels")
    values = levels.array
    bad = np.flatnonzero(values <= 0)
    if bad.size:
        year = int(levels.start_year + bad[0])
        raise TransformError(
            f"non-positive level {values[bad[0]]!r} in year {year} of {levels.label or 'series'}",
            details={"year": year},
        )
    return AnnualSeries.from_array(levels.start_year + 1, np.diff(np.log(values)), SeriesUnit.RATE, levels.label)


def cumulate(rates: AnnualSeries, base: float = 0.0) -> AnnualSeries:
    """Running sum ``base + sum_{s<=t} rate(s)`` on the same support."""
    return AnnualSeries.from_array(rates.start_year, base + np.cumsum(rates.array), SeriesUnit.CUMULATIVE, rates.label)


def first_difference(x: AnnualSeries) -> AnnualSeries:
    if len(x) < 2:
        raise TransformError("first_difference needs at least two values")
    return AnnualSeries.from_array(x.start_year + 1, np.diff(x.array), x.unit, x.label)


def scale(x: AnnualSeries, factor: float) -> AnnualSeries:
    # percent -> fraction for unemployment exports
    return x.model_copy(update={"values": tuple(v * factor for v in x.values)})


def centered_ma(x: AnnualSeries, window: int) -> AnnualSeries:
    """Centered moving average; drops ``(window - 1) / 2`` years at each end."""
    if window < 1 or window % 2 == 0:
        raise TransformError(f"moving-average window must be odd and positive, got {window}")
    if window > len(x):
        raise TransformError(f"moving-average window {window} longer than series ({len(x)} years)")
    if window == 1:
        return x
    half = (window - 1) // 2
    smoothed = x.to_pandas().rolling(window=window, center=True).mean().to_numpy()[half : len(x) - half]
    return AnnualSeries.from_array(x.start_year + half, smoothed, x.unit, x.label)


def spike_years(x: AnnualSeries, spec: SpikeRepairSpec) -> tuple[int, ...]:
    """Years flagged by ``spec`` (explicit list or ``|x - median| > k * MAD``)."""
    if spec.mode == "explicit_years":
        return tuple(sorted(set(spec.years)))
    values = x.array
    center = float(np.median(values))
    mad = float(median_abs_deviation(values, scale=1.0))
    flagged = np.flatnonzero(np.abs(values - center) > spec.k * mad)
    return tuple(int(x.start_year + i) for i in flagged)


def repair_spikes(x: AnnualSeries, spec: SpikeRepairSpec) -> AnnualSeries:
    """Replace flagged values by the mean of their two original neighbours."""
    flagged = spike_years(x, spec)
    if not flagged:
        return x
    for year in flagged:
        if not x.start_year < year < x.end_year:
            raise TransformError(
                f"spike year {year} is not interior to {x.label or 'series'} ({x.start_year}-{x.end_year})",
                details={"year": year},
            )
    original = x.array
    repaired = original.copy()
    for year in flagged:
        i = year - x.start_year
        repaired[i] = 0.5 * (original[i - 1] + original[i + 1])
    return x.model_copy(update={"values": tuple(float(v) for v in repaired)})


def shift(x: AnnualSeries, lag: int) -> AnnualSeries:
    """Move the series ``lag`` years later so that x(t - lag) lines up with year t."""
    if lag == 0:
        return x
    return x.model_copy(update={"start_year": x.start_year + int(lag)})


def align(xs: Sequence[AnnualSeries]) -> list[AnnualSeries]:
    """Truncate every series to the intersection of their supports."""
    if not xs:
        return []
    first = max(x.start_year for x in xs)
    last = min(x.end_year for x in xs)
    if first > last:
        ranges = ", ".join(f"{x.label or i}: {x.start_year}-{x.end_year}" for i, x in enumerate(xs))
        raise SeriesError(f"supports do not overlap ({ranges})", details={"first": first, "last": last})
    return [x.window(first, last) for x in xs]
