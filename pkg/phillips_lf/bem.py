# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Lagged one-break relationships fitted on cumulative (integrated) curves.

The annual relation ``y(t) = alpha + sum_i beta_i * x_i(t - lag)`` is integrated over the model
window and fitted by least squares on the cumulative curves. The first segment starts on the
observed cumulative value; the second continues from the first segment's terminal value and
is pinned to the observed cumulative value at the last year. The lag and break year are
chosen by exhaustive grid search.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import stats

from phillips_lf.exceptions import ConfigError, DegeneratePredictorError, HorizonError, InsufficientDataError, SearchError
from phillips_lf.records import fingerprint
from phillips_lf.series_core import AnnualSeries, SeriesUnit, YearWindow, centered_ma, cumulate, shift

logger = logging.getLogger(__name__)

# relative singular value below which the cumulative design is treated as collinear
_RANK_TOL = 1e-10


class ModelKind(StrEnum):
    INFLATION_UNEMPLOYMENT = "inflation_unemployment"
    INFLATION_LABOUR_FORCE = "inflation_labour_force"
    UNEMPLOYMENT_LABOUR_FORCE = "unemployment_labour_force"
    GENERALIZED = "generalized"


class PredictorTerm(BaseModel):
    """One regressor: a prepared rate series, its MA window, lag and coefficient status.

    ``lag=None`` means the lag is searched over the lag grid (shared by every searched term).
    ``coefficient=None`` means free; a number pins the coefficient to that value.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    series: str
    lag: int | None = None
    smooth: int = Field(default=1, ge=1)
    coefficient: float | None = None

    @field_validator("smooth")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError(f"smoothing window must be odd, got {value}")
        return value

    @property
    def pinned(self) -> bool:
        return self.coefficient is not None

    @property
    def display(self) -> str:
        return self.describe()

    def describe(self, searched_lag: int | None = None) -> str:
        """Label such as ``l_3(t-5)``; a searched lag shows as ``L`` unless given."""
        sub = f"_{self.smooth}" if self.smooth > 1 else ""
        lag = self.lag if self.lag is not None else searched_lag
        shown = "L" if lag is None else str(lag)
        return f"{self.series}{sub}(t-{shown})"


class ModelForm(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    dependent: str
    kind: ModelKind = ModelKind.INFLATION_LABOUR_FORCE
    predictors: tuple[PredictorTerm, ...]
    break_mode: Literal["none", "one_break"] = Field(default="one_break", alias="break")
    window: YearWindow | None = None

    @model_validator(mode="after")
    def _check_form(self) -> ModelForm:
        if not self.predictors:
            raise ValueError("a model needs at least one predictor")
        if all(term.pinned for term in self.predictors):
            raise ValueError("at least one predictor coefficient must be free")
        if self.kind is ModelKind.GENERALIZED and len(self.predictors) < 2:
            raise ValueError("the generalized form needs labour-force and unemployment predictors")
        if self.kind is not ModelKind.GENERALIZED and len(self.predictors) != 1:
            raise ValueError(f"{self.kind.value} takes exactly one predictor")
        if self.kind is not ModelKind.INFLATION_UNEMPLOYMENT:
            for term in self.predictors:
                if term.lag is not None and term.lag < 0:
                    raise ValueError(
                        f"negative lag {term.lag} on {term.series}: only the inflation-unemployment form is signed"
                    )
        return self

    @property
    def free_terms(self) -> tuple[PredictorTerm, ...]:
        return tuple(t for t in self.predictors if not t.pinned)

    @property
    def pinned_terms(self) -> tuple[PredictorTerm, ...]:
        return tuple(t for t in self.predictors if t.pinned)

    @property
    def has_break(self) -> bool:
        return self.break_mode == "one_break"

    def with_smoothing(self, window: int) -> ModelForm:
        """Return a copy with the leading (labour-force) predictor smoothed by MA(window)."""
        first = PredictorTerm.model_validate({**self.predictors[0].model_dump(), "smooth": window})
        return self.model_copy(update={"predictors": (first, *self.predictors[1:])})


def _parse_grid(value: Any) -> Any:
    if isinstance(value, str):
        lo, sep, hi = value.partition(":")
        if not sep:
            return (int(lo),)
        return tuple(range(int(lo), int(hi) + 1))
    return value


class SearchSpec(BaseModel):
    """Grids scanned by :func:`fit_break_model`; ``"A:B"`` strings expand to inclusive ranges."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lag_grid: tuple[int, ...] = tuple(range(0, 11))
    break_grid: tuple[int, ...] = tuple(range(1986, 2004))
    smoothing_windows: tuple[int, ...] = (1, 3, 5, 7)
    objective: Literal["cumulative_sse", "annual_sse"] = "cumulative_sse"

    @field_validator("lag_grid", "break_grid", mode="before")
    @classmethod
    def _expand(cls, value: Any) -> Any:
        return _parse_grid(value)

    @field_validator("lag_grid", "break_grid", "smoothing_windows")
    @classmethod
    def _non_empty(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("grid must not be empty")
        return tuple(sorted(set(value)))

    @field_validator("smoothing_windows")
    @classmethod
    def _odd_windows(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(w < 1 or w % 2 == 0 for w in value):
            raise ValueError(f"smoothing windows must be odd and positive: {value}")
        return value


class SegmentFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    first_year: int
    last_year: int
    slopes: dict[str, float]
    pinned: dict[str, float] = Field(default_factory=dict)
    intercept: float
    std_errors: dict[str, float | None] = Field(default_factory=dict)
    p_values: dict[str, float | None] = Field(default_factory=dict)
    rmse_annual: float
    sse_cumulative: float

    @property
    def slope(self) -> float:
        return next(iter(self.slopes.values()))

    def coefficient(self, series: str) -> float:
        if series in self.slopes:
            return self.slopes[series]
        return self.pinned[series]


class BreakModel(BaseModel):
    """A fitted lagged model with (at most) one break; serializes to a self-describing record."""

    model_config = ConfigDict(frozen=True)

    record_type: Literal["break_model"] = "break_model"
    name: str = ""
    form: ModelForm
    search: SearchSpec
    window: YearWindow
    lag: int
    forecast_horizon: int
    break_year: int | None
    segments: tuple[SegmentFit, ...]
    objective: str
    objective_value: float
    n_parameters: int
    r2_annual: float
    r2_cumulative: float
    r2_annual_raw: float
    r2_cumulative_raw: float
    rmse_annual: float
    rmse_cumulative: float
    observed_annual: AnnualSeries
    fitted_annual: AnnualSeries
    observed_cumulative: AnnualSeries
    fitted_cumulative: AnnualSeries
    residuals_annual: AnnualSeries
    residuals_cumulative: AnnualSeries
    start_anchor: float
    end_anchor: float
    r2_cumulative_interpretable: bool | None = None
    grid_cells: int
    infeasible_cells: int
    fingerprint: str
    comparison: dict[str, float | None] | None = None

    @property
    def segment1(self) -> SegmentFit:
        return self.segments[0]

    @property
    def segment2(self) -> SegmentFit | None:
        return self.segments[1] if len(self.segments) > 1 else None

    def segment_for(self, year: int) -> SegmentFit:
        if self.break_year is None or year <= self.break_year:
            return self.segments[0]
        return self.segments[-1]

    def to_record(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


class Prediction(BaseModel):
    model_config = ConfigDict(frozen=True)

    annual: AnnualSeries
    cumulative: AnnualSeries
    last_fitted_year: int


@dataclass(frozen=True)
class SegmentSolution:
    """Result of :func:`fit_segment`; ``fitted`` is the model cumulative curve."""

    slope: float
    intercept: float
    sse: float
    anchor: float
    fitted: AnnualSeries


def _resolve(registry: Mapping[str, Any], name: str) -> AnnualSeries:
    if name not in registry:
        raise ConfigError(f"series {name!r} is not in the dataset", details={"series": name})
    item = registry[name]
    return getattr(item, "prepared", item)


def build_predictor(registry: Mapping[str, Any], term: PredictorTerm, lag: int) -> AnnualSeries:
    """Prepared rate series smoothed by the term's MA window and moved ``lag`` years later."""
    base = _resolve(registry, term.series)
    return shift(centered_ma(base, term.smooth), lag)


def forecast_horizon(lag: int, smooth: int) -> int:
    return lag - (smooth - 1) // 2


def cumulative_solution(predictor: AnnualSeries, slope: float, intercept: float, anchor: float) -> AnnualSeries:
    """``anchor + slope * sum_{s<=t} x(s) + intercept * (t - t0)`` over the predictor's years."""
    x = predictor.array
    values = anchor + slope * np.cumsum(x) + intercept * np.arange(len(x))
    return AnnualSeries.from_array(predictor.start_year, values, SeriesUnit.CUMULATIVE, predictor.label)


def _segment_design(d: np.ndarray, X: np.ndarray, mode: str, anchor: float | None) -> tuple[np.ndarray, np.ndarray, float]:
    """Return ``(G, y, base)`` so that the model curve is ``base + G @ beta``."""
    m = d.shape[0]
    cx = np.cumsum(X, axis=0)
    if mode == "continue":
        base = float(anchor)  # type: ignore[arg-type]
        G = np.column_stack([cx, np.arange(1, m + 1, dtype=float)])
        return G, d - base, base
    increments = cx - X[0]
    trend = np.arange(m, dtype=float)
    if mode == "start":
        base = float(d[0])
        return np.column_stack([increments, trend]), d - base, base
    G = np.column_stack([increments, trend, np.ones(m)])
    return G, d.copy(), 0.0


def _check_rank(G: np.ndarray) -> None:
    norms = np.linalg.norm(G, axis=0)
    if np.any(norms == 0):
        raise DegeneratePredictorError("a cumulative regressor is identically zero over the segment")
    sv = np.linalg.svd(G / norms, compute_uv=False)
    if sv[-1] <= _RANK_TOL * sv[0]:
        raise DegeneratePredictorError(
            "predictor path is collinear with the trend regressor (zero variance of its cumulative path)",
            details={"singular_values": sv.tolist()},
        )


def _solve(G: np.ndarray, y: np.ndarray, fix_end: bool, with_operator: bool = False) -> tuple[np.ndarray, np.ndarray | None]:
    """Least squares ``min |G b - y|`` with optional equality ``G[-1] b = y[-1]``.

    The constraint is eliminated by solving for the coefficient with the largest weight in the
    last row. With ``with_operator`` the linear map ``W`` with ``b = W y`` is returned as well.
    """
    _check_rank(G)
    m, k = G.shape
    if not fix_end:
        if with_operator:
            W = np.linalg.pinv(G)
            return W @ y, W
        beta, *_ = np.linalg.lstsq(G, y, rcond=None)
        return beta, None

    g = G[-1]
    j = int(np.argmax(np.abs(g)))
    if g[j] == 0:
        raise DegeneratePredictorError("end constraint has no free coefficient to pin")
    others = [i for i in range(k) if i != j]
    Gr = G[:, others] - np.outer(G[:, j], g[others]) / g[j]
    yr = y - G[:, j] * y[-1] / g[j]
    beta = np.empty(k)
    if others:
        if with_operator:
            P = np.linalg.pinv(Gr)
            b_others = P @ yr
        else:
            b_others, *_ = np.linalg.lstsq(Gr, yr, rcond=None)
        beta[others] = b_others
    else:
        b_others = np.empty(0)
    beta[j] = (y[-1] - g[others] @ b_others) / g[j]
    if not with_operator:
        return beta, None

    e_last = np.zeros(m)
    e_last[-1] = 1.0
    L = np.eye(m) - np.outer(G[:, j], e_last) / g[j]
    W = np.empty((k, m))
    if others:
        W_others = P @ L
        W[others] = W_others
        W[j] = (e_last - g[others] @ W_others) / g[j]
    else:
        W[j] = e_last / g[j]
    return beta, W


def fit_segment(
    dep_cum: AnnualSeries,
    pred_rate: AnnualSeries,
    fix_start: bool = True,
    fix_end: bool = False,
    anchor: float | None = None,
) -> SegmentSolution:
    """Fit slope and intercept of one segment on cumulative curves.

    Args:
        dep_cum: Observed cumulative dependent curve over the segment years.
        pred_rate: Predictor rates aligned to the same years (already lagged).
        fix_start: Model starts on the observed cumulative value at the first year.
        fix_end: Model ends on the observed cumulative value at the last year.
        anchor: Continue from this cumulative value at the year before the segment
            (overrides ``fix_start``).

    Returns:
        SegmentSolution with slope, intercept, cumulative SSE and the fitted curve.

    Raises:
        InsufficientDataError: Fewer than three years or misaligned inputs.
        DegeneratePredictorError: Predictor path collinear with the trend.
    """
    if dep_cum.start_year != pred_rate.start_year or len(dep_cum) != len(pred_rate):
        raise InsufficientDataError(
            f"segment series are not aligned ({dep_cum.start_year}-{dep_cum.end_year} vs "
            f"{pred_rate.start_year}-{pred_rate.end_year})"
        )
    if len(dep_cum) < 3:
        raise InsufficientDataError(f"a segment needs at least 3 years, got {len(dep_cum)}")
    mode = "continue" if anchor is not None else ("start" if fix_start else "free")
    G, y, base = _segment_design(dep_cum.array, pred_rate.array[:, None], mode, anchor)
    beta, _ = _solve(G, y, fix_end)
    curve = base + G @ beta
    resid = dep_cum.array - curve
    start_value = base if mode != "free" else float(beta[2])
    fitted = AnnualSeries.from_array(dep_cum.start_year, curve, SeriesUnit.CUMULATIVE, dep_cum.label)
    return SegmentSolution(float(beta[0]), float(beta[1]), float(resid @ resid), start_value, fitted)


@dataclass
class _Cell:
    lag: int
    break_year: int | None
    objective: float
    betas: list[np.ndarray]


@dataclass
class _LagData:
    years: np.ndarray
    dependent: np.ndarray  # original dependent rates
    adjusted: np.ndarray  # dependent minus pinned terms
    pinned_part: np.ndarray  # sum of pinned terms, annual
    X: np.ndarray  # free predictor rates (n, p)
    cum: np.ndarray  # cumulate(adjusted)


def _lag_data(form: ModelForm, registry: Mapping[str, Any], lag: int, window: YearWindow) -> _LagData | str:
    dep = _resolve(registry, form.dependent)
    if not dep.covers(window.first_year, window.last_year):
        raise SearchError(
            f"dependent {form.dependent} ({dep.start_year}-{dep.end_year}) does not cover window "
            f"{window.first_year}-{window.last_year}"
        )
    y = dep.window(window.first_year, window.last_year).array
    pinned = np.zeros_like(y)
    free_cols = []
    for term in form.predictors:
        term_lag = lag if term.lag is None else term.lag
        series = build_predictor(registry, term, term_lag)
        if not series.covers(window.first_year, window.last_year):
            return (
                f"lag {term_lag}: {term.display} covers {series.start_year}-{series.end_year}, "
                f"window needs {window.first_year}-{window.last_year}"
            )
        values = series.window(window.first_year, window.last_year).array
        if term.pinned:
            pinned += float(term.coefficient) * values  # type: ignore[arg-type]
        else:
            free_cols.append(values)
    adjusted = y - pinned
    return _LagData(
        years=np.arange(window.first_year, window.last_year + 1),
        dependent=y,
        adjusted=adjusted,
        pinned_part=pinned,
        X=np.column_stack(free_cols),
        cum=np.cumsum(adjusted),
    )


def _fit_cell(data: _LagData, break_index: int | None, with_operator: bool = False):
    """Fit both segments for one break; returns (betas, cumulative model curve, operators)."""
    n = data.cum.shape[0]
    segments = [(0, n)] if break_index is None else [(0, break_index + 1), (break_index + 1, n)]
    betas, curves, operators = [], [], []
    anchor: float | None = None
    for number, (lo, hi) in enumerate(segments):
        last = number == len(segments) - 1
        mode = "start" if number == 0 else "continue"
        G, y, base = _segment_design(data.cum[lo:hi], data.X[lo:hi], mode, anchor)
        beta, W = _solve(G, y, fix_end=last, with_operator=with_operator)
        curve = base + G @ beta
        anchor = float(curve[-1])
        betas.append(beta)
        curves.append(curve)
        operators.append((W, mode))
    return betas, np.concatenate(curves), operators


def _annual_fit(data: _LagData, betas: list[np.ndarray], break_index: int | None) -> np.ndarray:
    n = data.X.shape[0]
    out = np.empty(n)
    bounds = [(0, n)] if break_index is None else [(0, break_index + 1), (break_index + 1, n)]
    for beta, (lo, hi) in zip(betas, bounds, strict=True):
        out[lo:hi] = data.X[lo:hi] @ beta[:-1] + beta[-1]
    return out


def _r2(observed: np.ndarray, sse: float) -> float:
    centered = observed - observed.mean()
    sst = float(centered @ centered)
    return 1.0 - sse / sst if sst > 0 else float("nan")


def _adjusted(r2: float, n: int, k: int) -> float:
    if n <= k:
        return float("nan")
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k)


def _validate_breaks(search: SearchSpec, window: YearWindow) -> None:
    bad = [b for b in search.break_grid if b - window.first_year + 1 < 3 or window.last_year - b < 3]
    if bad:
        raise SearchError(
            f"break years {bad} leave fewer than 3 years on one side of window {window.first_year}-{window.last_year}",
            details={"breaks": bad},
        )


def _validate_lags(form: ModelForm, search: SearchSpec) -> None:
    if form.kind is not ModelKind.INFLATION_UNEMPLOYMENT and min(search.lag_grid) < 0:
        raise SearchError(
            f"negative lags {[g for g in search.lag_grid if g < 0]} are only allowed for the inflation-unemployment form",
        )


def _segment_errors(
    data: _LagData, beta: np.ndarray, W: np.ndarray, mode: str, lo: int, hi: int, names: list[str]
) -> tuple[dict[str, float | None], dict[str, float | None], float]:
    """Standard errors from the segment's annual residual variance under homoskedasticity.

    The cumulative error of a start-anchored segment at row i is a sum of i annual errors, so its
    covariance is ``s2 * min(i, j)`` (``min(i, j) + 1`` for a continued segment).
    """
    m = hi - lo
    k = beta.shape[0]
    annual = data.X[lo:hi] @ beta[:-1] + beta[-1]
    resid = data.adjusted[lo:hi] - annual
    rmse = float(np.sqrt(resid @ resid / m))
    dof = m - k
    keys = [*names, "intercept"]
    if dof <= 0:
        return dict.fromkeys(keys), dict.fromkeys(keys), rmse
    s2 = float(resid @ resid) / dof
    idx = np.arange(m)
    omega = np.minimum.outer(idx, idx).astype(float)
    if mode == "continue":
        omega += 1.0
    cov = s2 * W @ omega @ W.T
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    std_errors: dict[str, float | None] = {}
    p_values: dict[str, float | None] = {}
    for key, b, s in zip(keys, beta, se, strict=True):
        std_errors[key] = float(s)
        p_values[key] = float(2.0 * stats.t.sf(abs(b / s), dof)) if s > 0 else None
    return std_errors, p_values, rmse


def fit_break_model(
    form: ModelForm,
    registry: Mapping[str, Any],
    search: SearchSpec | None = None,
    window: YearWindow | None = None,
    name: str = "",
) -> BreakModel:
    """Grid-search lag and break year and fit the winning cell.

    Args:
        form: Model form (dependent, predictors, break mode).
        registry: Mapping of series name to prepared series (or records carrying ``prepared``).
        search: Lag/break grids and objective; defaults to :class:`SearchSpec`.
        window: Model window; falls back to ``form.window``.
        name: Label stored in the record.

    Returns:
        BreakModel for the cell with the smallest objective; ties go to the smaller lag, then
        the earlier break.

    Raises:
        SearchError: Invalid grids or no feasible (lag, break) cell.
    """
    search = search or SearchSpec()
    window = window or form.window
    if window is None:
        raise ConfigError("no model window given")
    _validate_lags(form, search)
    breaks: list[int | None] = list(search.break_grid) if form.has_break else [None]
    if form.has_break:
        _validate_breaks(search, window)
    searched = any(term.lag is None for term in form.predictors)
    lags = list(search.lag_grid) if searched else [0]

    violations: list[str] = []
    infeasible = 0
    best: _Cell | None = None
    datasets: dict[int, _LagData] = {}
    for lag in lags:
        data = _lag_data(form, registry, lag, window)
        if isinstance(data, str):
            violations.append(data)
            infeasible += len(breaks)
            continue
        datasets[lag] = data
        for break_year in breaks:
            b_index = None if break_year is None else break_year - window.first_year
            try:
                betas, curve, _ = _fit_cell(data, b_index)
            except DegeneratePredictorError as exc:
                violations.append(f"lag {lag}, break {break_year}: {exc}")
                infeasible += 1
                continue
            if search.objective == "cumulative_sse":
                resid = data.cum - curve
            else:
                resid = data.adjusted - _annual_fit(data, betas, b_index)
            cell = _Cell(lag, break_year, float(resid @ resid), betas)
            logger.debug("cell lag=%s break=%s objective=%.6g", lag, break_year, cell.objective)
            key = (cell.objective, cell.lag, cell.break_year or 0)
            if best is None or key < (best.objective, best.lag, best.break_year or 0):
                best = cell
    if best is None:
        raise SearchError(
            "no feasible (lag, break) cell: " + "; ".join(violations),
            details={"violations": violations},
        )
    logger.info("%s: lag %s, break %s, objective %.6g", name or form.dependent, best.lag, best.break_year, best.objective)
    return _assemble(form, registry, search, window, name, datasets[best.lag], best, len(lags) * len(breaks), infeasible)


def _assemble(
    form: ModelForm,
    registry: Mapping[str, Any],
    search: SearchSpec,
    window: YearWindow,
    name: str,
    data: _LagData,
    cell: _Cell,
    cells: int,
    infeasible: int,
) -> BreakModel:
    b_index = None if cell.break_year is None else cell.break_year - window.first_year
    betas, curve_adj, operators = _fit_cell(data, b_index, with_operator=True)
    n = data.years.shape[0]
    free_names = [t.series for t in form.free_terms]
    pinned = {t.series: float(t.coefficient) for t in form.pinned_terms}  # type: ignore[arg-type]
    bounds = [(0, n)] if b_index is None else [(0, b_index + 1), (b_index + 1, n)]

    segments = []
    for beta, (W, mode), (lo, hi) in zip(betas, operators, bounds, strict=True):
        std_errors, p_values, rmse = _segment_errors(data, beta, W, mode, lo, hi, free_names)
        seg_resid = data.cum[lo:hi] - curve_adj[lo:hi]
        segments.append(
            SegmentFit(
                first_year=int(data.years[lo]),
                last_year=int(data.years[hi - 1]),
                slopes={k: float(v) for k, v in zip(free_names, beta[:-1], strict=True)},
                pinned=pinned,
                intercept=float(beta[-1]),
                std_errors=std_errors,
                p_values=p_values,
                rmse_annual=rmse,
                sse_cumulative=float(seg_resid @ seg_resid),
            )
        )

    fitted_annual = _annual_fit(data, betas, b_index) + data.pinned_part
    observed_cum = np.cumsum(data.dependent)
    fitted_cum = curve_adj + np.cumsum(data.pinned_part)
    resid_a = data.dependent - fitted_annual
    resid_c = observed_cum - fitted_cum
    sse_a = float(resid_a @ resid_a)
    sse_c = float(resid_c @ resid_c)
    k = len(segments) * (len(free_names) + 1) + 1 + (1 if b_index is not None else 0)
    r2_a = _r2(data.dependent, sse_a)
    r2_c = _r2(observed_cum, sse_c)

    start = window.first_year
    label = name or form.dependent
    terms = [_resolve(registry, t.series) for t in form.predictors]
    lead = form.predictors[0]
    lead_lag = cell.lag if lead.lag is None else lead.lag
    return BreakModel(
        name=name,
        form=form,
        search=search,
        window=window,
        lag=cell.lag,
        forecast_horizon=forecast_horizon(lead_lag, lead.smooth),
        break_year=cell.break_year,
        segments=tuple(segments),
        objective=search.objective,
        objective_value=cell.objective,
        n_parameters=k,
        r2_annual=_adjusted(r2_a, n, k),
        r2_cumulative=_adjusted(r2_c, n, k),
        r2_annual_raw=r2_a,
        r2_cumulative_raw=r2_c,
        rmse_annual=float(np.sqrt(sse_a / n)),
        rmse_cumulative=float(np.sqrt(sse_c / n)),
        observed_annual=AnnualSeries.from_array(start, data.dependent, SeriesUnit.RATE, label),
        fitted_annual=AnnualSeries.from_array(start, fitted_annual, SeriesUnit.RATE, label),
        observed_cumulative=AnnualSeries.from_array(start, observed_cum, SeriesUnit.CUMULATIVE, label),
        fitted_cumulative=AnnualSeries.from_array(start, fitted_cum, SeriesUnit.CUMULATIVE, label),
        residuals_annual=AnnualSeries.from_array(start, resid_a, SeriesUnit.RATE, label),
        residuals_cumulative=AnnualSeries.from_array(start, resid_c, SeriesUnit.CUMULATIVE, label),
        start_anchor=float(observed_cum[0]),
        end_anchor=float(observed_cum[-1]),
        grid_cells=cells,
        infeasible_cells=infeasible,
        fingerprint=fingerprint(_resolve(registry, form.dependent), *terms),
    )


def fit_generalized(
    form: ModelForm,
    registry: Mapping[str, Any],
    search: SearchSpec | None = None,
    window: YearWindow | None = None,
    name: str = "",
    free_unemployment: bool = False,
    unemployment_coefficient: float = -1.0,
) -> BreakModel:
    """Fit inflation on lagged labour-force change and lagged unemployment.

    Unemployment terms without an explicit coefficient are pinned to
    ``unemployment_coefficient``. With ``free_unemployment`` the coefficient is estimated and
    the pinned fit is attached as ``comparison``.
    """
    if form.kind is not ModelKind.GENERALIZED:
        raise ConfigError(f"fit_generalized needs a generalized form, got {form.kind.value}")
    lead, *rest = form.predictors
    pinned_rest = tuple(t if t.pinned else t.model_copy(update={"coefficient": unemployment_coefficient}) for t in rest)
    pinned_form = form.model_copy(update={"predictors": (lead, *pinned_rest)})
    pinned_model = fit_break_model(pinned_form, registry, search, window, name)
    if not free_unemployment:
        return pinned_model
    free_rest = tuple(t.model_copy(update={"coefficient": None}) for t in rest)
    free_form = form.model_copy(update={"predictors": (lead, *free_rest)})
    free_model = fit_break_model(free_form, registry, search, window, name)
    comparison: dict[str, float | None] = {
        "pinned_objective": pinned_model.objective_value,
        "free_objective": free_model.objective_value,
        "pinned_r2_annual": pinned_model.r2_annual,
        "free_r2_annual": free_model.r2_annual,
        "pinned_lag": float(pinned_model.lag),
        "pinned_break_year": None if pinned_model.break_year is None else float(pinned_model.break_year),
    }
    for number, segment in enumerate(free_model.segments, start=1):
        for term in rest:
            comparison[f"free_{term.series}_segment{number}"] = segment.slopes.get(term.series)
    return free_model.model_copy(update={"comparison": comparison})


def _predictor_matrix(model: BreakModel, registry: Mapping[str, Any], first: int, last: int) -> tuple[np.ndarray, np.ndarray]:
    """Free-term matrix and pinned annual contribution over ``[first, last]``."""
    free_cols = []
    pinned = np.zeros(last - first + 1)
    reachable = []
    series_list = []
    for term in model.form.predictors:
        lag = model.lag if term.lag is None else term.lag
        series = build_predictor(registry, term, lag)
        reachable.append(series.end_year)
        series_list.append((term, series))
    last_year = min(reachable)
    if last > last_year:
        raise HorizonError(
            f"predictors reach {last_year}; cannot forecast {last}. Last forecastable year is {last_year}",
            details={"last_forecastable_year": last_year},
        )
    for term, series in series_list:
        if series.start_year > first:
            raise HorizonError(f"{term.display} starts in {series.start_year}, after {first}")
        values = series.window(first, last).array
        if term.pinned:
            pinned += float(term.coefficient) * values  # type: ignore[arg-type]
        else:
            free_cols.append(values)
    return np.column_stack(free_cols), pinned


def predict(model: BreakModel, registry: Mapping[str, Any], horizon: int = 0) -> Prediction:
    """Annual and cumulative predictions over the window plus ``horizon`` later years.

    Out-of-sample years use the last segment. The cumulative path starts on the observed value
    at the window start and the annual prediction is its first difference.

    Raises:
        HorizonError: Predictors do not reach the requested year.
    """
    if horizon < 0:
        raise HorizonError(f"horizon must be non-negative, got {horizon}")
    first, last = model.window.first_year, model.window.last_year + horizon
    X, pinned = _predictor_matrix(model, registry, first, last)
    names = [t.series for t in model.form.free_terms]
    annual = np.empty(X.shape[0])
    for i, year in enumerate(range(first, last + 1)):
        segment = model.segment_for(year)
        beta = np.array([segment.slopes[n] for n in names])
        annual[i] = X[i] @ beta + segment.intercept + pinned[i]
    cumulative = model.start_anchor + np.concatenate([[0.0], np.cumsum(annual[1:])])
    label = model.name or model.form.dependent
    return Prediction(
        annual=AnnualSeries.from_array(first, annual, SeriesUnit.RATE, label),
        cumulative=AnnualSeries.from_array(first, cumulative, SeriesUnit.CUMULATIVE, label),
        last_fitted_year=model.window.last_year,
    )


def extrapolate_segment(model: BreakModel, registry: Mapping[str, Any], segment: int = 1, horizon: int = 0) -> AnnualSeries:
    """Annual prediction using one segment's coefficients over the whole window (and beyond)."""
    chosen = model.segments[segment - 1]
    first, last = model.window.first_year, model.window.last_year + horizon
    X, pinned = _predictor_matrix(model, registry, first, last)
    beta = np.array([chosen.slopes[t.series] for t in model.form.free_terms])
    return AnnualSeries.from_array(first, X @ beta + chosen.intercept + pinned, SeriesUnit.RATE, model.name)


def deflation_threshold(segment: SegmentFit, predictor: str | None = None) -> float:
    """Predictor rate at which the segment's annual prediction is zero: ``-intercept / slope``."""
    slope = segment.slopes[predictor] if predictor else segment.slope
    if slope == 0:
        raise DegeneratePredictorError("deflation threshold undefined for a zero slope")
    return -segment.intercept / slope


def observed_cumulative(series: AnnualSeries, window: YearWindow) -> AnnualSeries:
    return cumulate(series.window(window.first_year, window.last_year))
