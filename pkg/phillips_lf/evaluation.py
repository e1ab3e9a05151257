# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Descriptive statistics, no-change benchmark errors, model RMSFE and comparison tables."""

from __future__ import annotations

from enum import StrEnum
from typing import Any, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from phillips_lf.exceptions import HorizonError, InsufficientDataError, SeriesError
from phillips_lf.series_core import AnnualSeries, YearWindow, first_difference

MAX_HORIZON = 5


class Period(StrEnum):
    FULL = "full"
    PRE_BREAK = "pre_break"
    POST_BREAK = "post_break"
    CUSTOM = "custom"


class Descriptive(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    st_dev: float
    n: int


class Volatility(BaseModel):
    model_config = ConfigDict(frozen=True)

    split_year: int
    sd1: float
    sd2: float
    n1: int
    n2: int


def descriptive(x: AnnualSeries) -> Descriptive:
    if len(x) < 2:
        raise InsufficientDataError(f"descriptive statistics need at least 2 values, got {len(x)}")
    values = x.array
    return Descriptive(mean=float(values.mean()), st_dev=float(values.std(ddof=1)), n=len(x))


def naive_rmsfe(x: AnnualSeries, h: int) -> float:
    """Error of the no-change forecast ``x(t-h)`` for ``x(t)``."""
    if not 1 <= h <= MAX_HORIZON:
        raise HorizonError(f"naive horizon must lie in 1..{MAX_HORIZON}, got {h}", details={"horizon": h})
    if len(x) <= h:
        raise InsufficientDataError(f"naive RMSFE at horizon {h} needs more than {h} values, got {len(x)}")
    values = x.array
    errors = values[h:] - values[:-h]
    return float(np.sqrt(np.mean(errors**2)))


def period_window(period: Period | str, window: YearWindow, split_year: int, custom: YearWindow | None = None) -> YearWindow:
    """Years covered by ``period``; pre-break ends at ``split_year`` and post-break starts after it."""
    period = Period(period)
    if period is Period.FULL:
        return window
    if period is Period.PRE_BREAK:
        return YearWindow(first_year=window.first_year, last_year=split_year)
    if period is Period.POST_BREAK:
        return YearWindow(first_year=split_year + 1, last_year=window.last_year)
    if custom is None:
        raise SeriesError("a custom period needs an explicit window")
    return custom


def model_rmsfe(pred: AnnualSeries, obs: AnnualSeries, period: YearWindow | None = None, cumulative: bool = False) -> float:
    """Root mean squared ``obs - pred`` over ``period`` (default: common support).

    With ``cumulative`` both series are first summed from the period start.

    Raises:
        SeriesError: A series does not cover the period, or the period is empty.
    """
    if period is None:
        first = max(pred.start_year, obs.start_year)
        last = min(pred.end_year, obs.end_year)
        if first > last:
            raise SeriesError("prediction and observation do not overlap")
    else:
        first, last = period.first_year, period.last_year
    p = pred.window(first, last).array
    o = obs.window(first, last).array
    if cumulative:
        p, o = np.cumsum(p), np.cumsum(o)
    resid = o - p
    return float(np.sqrt(np.mean(resid**2)))


def subperiod_volatility(x: AnnualSeries, split_year: int = 1994) -> Volatility:
    """Standard deviation of first differences dated up to ``split_year`` and after it.

    The difference ``x(t) - x(t-1)`` is dated at ``t``. Each side needs at least two differences.
    """
    if not x.start_year < split_year < x.end_year:
        raise SeriesError(
            f"split year {split_year} not strictly inside {x.start_year}-{x.end_year}",
            details={"split_year": split_year},
        )
    diffs = first_difference(x)
    if split_year - diffs.start_year + 1 < 2 or diffs.end_year - split_year < 2:
        raise InsufficientDataError(f"split year {split_year} leaves fewer than two differences on one side")
    before = diffs.window(diffs.start_year, split_year).array
    after = diffs.window(split_year + 1, diffs.end_year).array
    return Volatility(
        split_year=split_year,
        sd1=float(before.std(ddof=1)),
        sd2=float(after.std(ddof=1)),
        n1=before.shape[0],
        n2=after.shape[0],
    )


def gain(naive: float, model: float) -> float | None:
    """Relative improvement ``(naive - model) / naive``; undefined for a zero benchmark."""
    if naive == 0:
        return None
    return (naive - model) / naive


class EvalCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    horizon: int
    period: Period
    kind: Literal["annual", "cumulative", "vecm"]
    rmsfe: float
    naive_rmsfe: float | None = None
    gain: float | None = None
    n: int
    n_naive: int | None = None
    first_year: int
    last_year: int


class EvalTable(BaseModel):
    """RMSFE cells; one CSV row per cell."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["eval_table"] = "eval_table"
    cells: tuple[EvalCell, ...] = ()

    def with_cell(
        self,
        model: str,
        horizon: int,
        period: Period | str,
        kind: Literal["annual", "cumulative", "vecm"],
        rmsfe: float,
        n: int,
        window: YearWindow,
        naive: float | None = None,
        n_naive: int | None = None,
    ) -> EvalTable:
        cell = EvalCell(
            model=model,
            horizon=horizon,
            period=Period(period),
            kind=kind,
            rmsfe=rmsfe,
            naive_rmsfe=naive,
            gain=None if naive is None else gain(naive, rmsfe),
            n=n,
            n_naive=n_naive,
            first_year=window.first_year,
            last_year=window.last_year,
        )
        return self.model_copy(update={"cells": (*self.cells, cell)})

    def to_frame(self) -> pd.DataFrame:
        columns = list(EvalCell.model_fields)
        return pd.DataFrame([cell.model_dump(mode="json") for cell in self.cells], columns=columns)

    def to_records(self) -> list[dict[str, Any]]:
        return [cell.model_dump(mode="json") for cell in self.cells]
