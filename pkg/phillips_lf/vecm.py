# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Rank-1 error correction between a measured cumulative curve P and its model prediction X.

The single-equation form is::

    dP(t) = g1 * dX(t) - g2 * (P(t-1) - g1 * X(t-1)) + sum_i (a_i * dP(t-i) + b_i * dX(t-i)) + v(t)

with ``g1`` pinned to 1 unless freed. ``k`` is the VAR order in levels, so ``k - 1`` lagged
differences enter; ``k`` is chosen by AIC on a common sample.
"""

from __future__ import annotations

import logging
from typing import Literal

import numpy as np
import statsmodels.api as sm
from pydantic import BaseModel, ConfigDict, Field

from phillips_lf.exceptions import DegenerateError, HorizonError, InsufficientDataError, SeriesError
from phillips_lf.series_core import AnnualSeries, SeriesUnit, YearWindow

logger = logging.getLogger(__name__)


class ShortRunLag(BaseModel):
    model_config = ConfigDict(frozen=True)

    lag: int
    dp: float
    dx: float


class VecmSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    rank: Literal[1] = 1
    max_lag: int = Field(default=4, ge=1, le=4)
    selected_lag: int = 1
    det: Literal["none"] = "none"


class VecmModel(BaseModel):
    """Fitted error-correction equation; serializes like every other record."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["vecm_model"] = "vecm_model"
    name: str = ""
    status: Literal["ok", "degenerate"] = "ok"
    reason: str | None = None
    gamma1: float = 1.0
    gamma1_free: bool = False
    gamma2: float
    gamma2_se: float | None = None
    short_run: tuple[ShortRunLag, ...] = ()
    residual_sd: float
    ssr: float
    ssr_no_correction: float
    aic: float | None = None
    nobs: int
    first_year: int
    last_year: int
    spec: VecmSpec
    stable: bool
    warnings: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return self.model_dump(mode="json")


class ForecastPath(BaseModel):
    """Forecast years with annual rates and the cumulative path; empty for a zero horizon."""

    model_config = ConfigDict(frozen=True)

    years: tuple[int, ...] = ()
    annual: tuple[float, ...] = ()
    cumulative: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.years)

    def to_rows(self) -> list[dict[str, float]]:
        return [
            {"year": y, "annual": a, "cumulative": c} for y, a, c in zip(self.years, self.annual, self.cumulative, strict=True)
        ]


class RollingResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    horizon: int
    rmsfe: float
    n: int
    errors: AnnualSeries


def _check_aligned(P: AnnualSeries, X: AnnualSeries) -> None:
    if P.start_year != X.start_year or len(P) != len(X):
        raise SeriesError(f"P ({P.start_year}-{P.end_year}) and X ({X.start_year}-{X.end_year}) are not aligned")


def _design(p: np.ndarray, x: np.ndarray, gamma1: float, order: int, first_row: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows t = first_row..n-1 of ``(dP - g1 dX)`` on ``[-(P - g1 X)(t-1), dP(t-i), dX(t-i)]``."""
    dp = np.diff(p, prepend=np.nan)
    dx = np.diff(x, prepend=np.nan)
    rows = np.arange(first_row, p.shape[0])
    y = dp[rows] - gamma1 * dx[rows]
    cols = [-(p[rows - 1] - gamma1 * x[rows - 1])]
    for i in range(1, order):
        cols.append(dp[rows - i])
        cols.append(dx[rows - i])
    return y, np.column_stack(cols)


def fit_vecm(
    P: AnnualSeries,
    X: AnnualSeries,
    max_lag: int = 4,
    free_gamma1: bool = False,
    cointegrated: bool | None = None,
    name: str = "",
) -> VecmModel:
    """Estimate the error-correction equation by least squares.

    Args:
        P: Measured cumulative series.
        X: Predicted cumulative series on the same years.
        max_lag: Largest VAR order in levels tried by AIC (1..4).
        free_gamma1: Estimate the long-run coefficient by a levels regression of P on X
            instead of pinning it to 1.
        cointegrated: Outcome of a prior cointegration test; ``False`` attaches a warning.
        name: Label stored in the record.

    Raises:
        SeriesError: Misaligned inputs.
        InsufficientDataError: ``len <= 2 * max_lag + 5``.
        DegenerateError: Numerically singular design.
    """
    _check_aligned(P, X)
    if not 1 <= max_lag <= 4:
        raise InsufficientDataError(f"max_lag must lie in 1..4, got {max_lag}")
    n = len(P)
    if n <= 2 * max_lag + 5:
        raise InsufficientDataError(f"VECM with max_lag {max_lag} needs more than {2 * max_lag + 5} observations, got {n}")
    p, x = P.array, X.array
    warnings: list[str] = []
    if cointegrated is False:
        warnings.append("cointegration not supported by the tests; error correction may be spurious")
        logger.warning("%s: fitting VECM without cointegration support", name or "vecm")

    gamma1 = 1.0
    if free_gamma1:
        gamma1 = float(sm.OLS(p, x).fit().params[0])

    gap = p - gamma1 * x
    if np.allclose(gap, gap[0], rtol=0.0, atol=1e-14 * (1.0 + np.abs(p).max())):
        reason = "error-correction term is constant (P equals X)"
        logger.warning("%s: %s", name or "vecm", reason)
        return VecmModel(
            name=name,
            status="degenerate",
            reason=reason,
            gamma1=gamma1,
            gamma1_free=free_gamma1,
            gamma2=0.0,
            residual_sd=0.0,
            ssr=0.0,
            ssr_no_correction=0.0,
            nobs=n - max_lag,
            first_year=P.start_year,
            last_year=P.end_year,
            spec=VecmSpec(max_lag=max_lag, selected_lag=1),
            stable=True,
            warnings=tuple(warnings),
        )

    best = None
    for order in range(1, max_lag + 1):
        y, design = _design(p, x, gamma1, order, max_lag)
        if np.linalg.matrix_rank(design) < design.shape[1]:
            logger.debug("order %d: rank-deficient design, skipped", order)
            continue
        result = sm.OLS(y, design).fit()
        logger.debug("order %d: aic %.6g", order, result.aic)
        if best is None or result.aic < best[1].aic:
            best = (order, result, y, design)
    if best is None:
        raise DegenerateError("VECM design is singular at every lag order")
    order, result, y, design = best

    if design.shape[1] > 1:
        restricted = sm.OLS(y, design[:, 1:]).fit()
        ssr_no_correction = float(restricted.ssr)
    else:
        ssr_no_correction = float(y @ y)
    params = np.asarray(result.params, dtype=float)
    gamma2 = float(params[0])
    short_run = tuple(ShortRunLag(lag=i, dp=float(params[2 * i - 1]), dx=float(params[2 * i])) for i in range(1, order))
    stable = abs(1.0 - gamma2) < 1.0
    if not stable:
        warnings.append(f"explosive error correction: |1 - gamma2| = {abs(1.0 - gamma2):.3g} >= 1")
        logger.warning("%s: explosive error correction (gamma2=%.4g)", name or "vecm", gamma2)
    return VecmModel(
        name=name,
        gamma1=gamma1,
        gamma1_free=free_gamma1,
        gamma2=gamma2,
        gamma2_se=float(np.asarray(result.bse)[0]),
        short_run=short_run,
        residual_sd=float(np.sqrt(result.mse_resid)),
        ssr=float(result.ssr),
        ssr_no_correction=ssr_no_correction,
        aic=float(result.aic),
        nobs=int(result.nobs),
        first_year=P.start_year,
        last_year=P.end_year,
        spec=VecmSpec(max_lag=max_lag, selected_lag=order),
        stable=stable,
        warnings=tuple(warnings),
    )


def forecast_vecm(model: VecmModel, P_history: AnnualSeries, X_path: AnnualSeries, h: int) -> ForecastPath:
    """Iterate the equation ``h`` years past the end of ``P_history`` with zero shocks.

    Raises:
        HorizonError: ``X_path`` does not reach the last forecast year.
        InsufficientDataError: History too short for the model's lags.
    """
    if h < 0:
        raise HorizonError(f"horizon must be non-negative, got {h}")
    if h == 0:
        return ForecastPath()
    last = P_history.end_year
    if X_path.end_year < last + h:
        raise HorizonError(
            f"X reaches {X_path.end_year}; cannot forecast to {last + h}. Last forecastable year is {X_path.end_year}",
            details={"last_forecastable_year": X_path.end_year},
        )
    q = len(model.short_run)
    first_needed = last - q - 1
    if P_history.start_year > first_needed or X_path.start_year > first_needed:
        raise InsufficientDataError(f"forecasting needs P and X from {first_needed}")
    p = {year: P_history.value_at(year) for year in range(first_needed, last + 1)}
    x = {year: X_path.value_at(year) for year in range(first_needed, last + h + 1)}
    dp = {year: p[year] - p[year - 1] for year in range(first_needed + 1, last + 1)}
    dx = {year: x[year] - x[year - 1] for year in range(first_needed + 1, last + h + 1)}
    g1, g2 = model.gamma1, model.gamma2
    years, annual, cumulative = [], [], []
    for year in range(last + 1, last + h + 1):
        step = g1 * dx[year] - g2 * (p[year - 1] - g1 * x[year - 1])
        for term in model.short_run:
            step += term.dp * dp[year - term.lag] + term.dx * dx[year - term.lag]
        dp[year] = step
        p[year] = p[year - 1] + step
        years.append(year)
        annual.append(float(step))
        cumulative.append(float(p[year]))
    return ForecastPath(years=tuple(years), annual=tuple(annual), cumulative=tuple(cumulative))


def minimum_training(max_lag: int) -> int:
    return max(15, 2 * max_lag + 6)


def rolling_rmsfe(
    P: AnnualSeries,
    X: AnnualSeries,
    h: int,
    max_lag: int = 4,
    period: YearWindow | None = None,
) -> RollingResult:
    """Rolling-origin RMSFE of the annual rate ``h`` years ahead with X known.

    The equation is refitted on ``[start, T]`` for every origin ``T`` leaving at least
    ``max(15, 2 * max_lag + 6)`` training years; the error is measured at ``T + h``. ``period``
    restricts which target years are scored.
    """
    _check_aligned(P, X)
    if h < 1:
        raise HorizonError(f"rolling evaluation needs h >= 1, got {h}")
    first_origin = P.start_year + minimum_training(max_lag) - 1
    errors: list[float] = []
    targets: list[int] = []
    for origin in range(first_origin, P.end_year - h + 1):
        target = origin + h
        if period is not None and target not in period:
            continue
        train_p = P.window(P.start_year, origin)
        train_x = X.window(X.start_year, origin)
        model = fit_vecm(train_p, train_x, max_lag=max_lag)
        path = forecast_vecm(model, train_p, X, h)
        observed = P.value_at(target) - P.value_at(target - 1)
        errors.append(path.annual[-1] - observed)
        targets.append(target)
    if not errors:
        raise InsufficientDataError(f"no rolling origins for horizon {h} on {P.start_year}-{P.end_year}")
    err = np.asarray(errors)
    # targets are consecutive years
    series = AnnualSeries.from_array(targets[0], err, SeriesUnit.RATE, P.label)
    return RollingResult(horizon=h, rmsfe=float(np.sqrt(np.mean(err**2))), n=err.shape[0], errors=series)
