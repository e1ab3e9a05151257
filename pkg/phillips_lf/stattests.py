# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Unit-root and cointegration tests: ADF, Phillips-Perron, residual ADF (CADF) and Johansen trace.

Statistics come from ``arch.unitroot`` (ADF, Phillips-Perron) and ``statsmodels`` (Johansen,
Engle-Granger response surfaces). Designs that cannot be estimated (constant series, a regressor
collinear with the deterministic terms, a singular moment matrix) return a report with
``status="degenerate"`` instead of raising or producing NaN.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from enum import StrEnum
from typing import Any, Literal

import numpy as np
from arch.unitroot import ADF, PhillipsPerron
from arch.utility.exceptions import InfeasibleTestException
from pydantic import BaseModel, ConfigDict, Field
from statsmodels.tsa.adfvalues import mackinnoncrit
from statsmodels.tsa.vector_ar.vecm import coint_johansen

from phillips_lf.exceptions import InsufficientDataError, SeriesError, UnsupportedTestError
from phillips_lf.series_core import AnnualSeries

logger = logging.getLogger(__name__)

LEVELS = ("1%", "5%", "10%")
SUPPORTED_TESTS = ("adf", "pp", "cadf", "johansen")

# 1% Engle-Granger critical value for the two-variable residual test
CADF_CRITICAL_1PCT = -4.32

Decision = Literal["reject_null", "fail_to_reject"]


class DeterministicSpec(StrEnum):
    NONE = "none"
    CONSTANT = "constant"
    CONSTANT_AND_TREND = "constant_and_trend"

    @property
    def arch_trend(self) -> Literal["n", "c", "ct"]:
        return {"none": "n", "constant": "c", "constant_and_trend": "ct"}[self.value]  # type: ignore[return-value]

    @property
    def johansen_order(self) -> int:
        return {"none": -1, "constant": 0, "constant_and_trend": 1}[self.value]

    @property
    def columns(self) -> int:
        return {"none": 0, "constant": 1, "constant_and_trend": 2}[self.value]


class TestReport(BaseModel):
    """Outcome of one test; ``critical_values`` and ``decisions`` are keyed by statistic then level."""

    __test__ = False  # not a pytest class

    model_config = ConfigDict(frozen=True)

    record_type: Literal["test_report"] = "test_report"
    test: str
    series: str = ""
    status: Literal["ok", "degenerate"] = "ok"
    reason: str | None = None
    statistics: dict[str, float] = Field(default_factory=dict)
    critical_values: dict[str, dict[str, float]] = Field(default_factory=dict)
    decisions: dict[str, dict[str, Decision]] = Field(default_factory=dict)
    nobs: int = 0
    settings: dict[str, Any] = Field(default_factory=dict)
    rank: int | None = None
    extra: dict[str, Any] = Field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return self.status == "degenerate"

    def rejects(self, level: str = "5%", statistic: str | None = None) -> bool:
        """Whether the null is rejected at ``level`` (first statistic when none is named)."""
        if self.degenerate or not self.decisions:
            return False
        key = statistic or next(iter(self.decisions))
        return self.decisions.get(key, {}).get(level) == "reject_null"

    def to_record(self) -> dict[str, Any]:
        """Flat key/value record (``stat.<name>``, ``cv.<name>.<level>``, ``decision.<name>.<level>``)."""
        record: dict[str, Any] = {
            "test": self.test,
            "series": self.series,
            "status": self.status,
            "reason": self.reason,
            "nobs": self.nobs,
            "rank": self.rank,
        }
        for name, value in self.statistics.items():
            record[f"stat.{name}"] = value
        for name, levels in self.critical_values.items():
            for level, value in levels.items():
                record[f"cv.{name}.{level}"] = value
        for name, levels in self.decisions.items():
            for level, decision in levels.items():
                record[f"decision.{name}.{level}"] = decision
        for key, value in self.settings.items():
            record[f"setting.{key}"] = value
        for key, value in self.extra.items():
            record[f"extra.{key}"] = value
        return record


def _decide(stat: float, cvs: dict[str, float], upper: bool = False) -> dict[str, Decision]:
    """Left-tail tests reject below the critical value, trace tests above it."""
    out: dict[str, Decision] = {}
    for level, cv in cvs.items():
        reject = stat > cv if upper else stat < cv
        out[level] = "reject_null" if reject else "fail_to_reject"
    return out


def _degenerate(test: str, series: str, reason: str, settings: dict[str, Any], nobs: int) -> TestReport:
    logger.warning("%s on %s is degenerate: %s", test, series or "series", reason)
    return TestReport(test=test, series=series, status="degenerate", reason=reason, settings=settings, nobs=nobs)


def _deterministic(n: int, det: DeterministicSpec) -> np.ndarray:
    cols = []
    if det.columns >= 1:
        cols.append(np.ones(n))
    if det.columns == 2:
        cols.append(np.arange(1, n + 1, dtype=float))
    return np.column_stack(cols) if cols else np.empty((n, 0))


def _df_degeneracy(x: np.ndarray, det: DeterministicSpec) -> str | None:
    """Reason string when the Dickey-Fuller regression of ``dx`` on ``[x_{t-1}, det]`` is exact."""
    if np.ptp(x) == 0:
        return "series is constant"
    dx = np.diff(x)
    design = np.column_stack([x[:-1], _deterministic(dx.shape[0], det)])
    norms = np.linalg.norm(design, axis=0)
    if np.any(norms == 0):
        return "a regressor is identically zero"
    sv = np.linalg.svd(design / norms, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        return "lagged level is collinear with the deterministic terms"
    coef, *_ = np.linalg.lstsq(design, dx, rcond=None)
    resid = dx - design @ coef
    if float(resid @ resid) <= 1e-20 * (float(dx @ dx) + 1e-300):
        return "regression fits exactly (zero residual variance)"
    return None


def adf_test(x: AnnualSeries, max_lag: int = 4, det: DeterministicSpec = DeterministicSpec.CONSTANT) -> TestReport:
    """Augmented Dickey-Fuller test with the augmentation lag chosen by AIC over ``0..max_lag``.

    Raises:
        InsufficientDataError: ``len(x) <= max_lag + 3``.
    """
    det = DeterministicSpec(det)
    n = len(x)
    settings = {"max_lag": max_lag, "det": det.value, "lag_selection": "aic"}
    if n <= max_lag + 3:
        raise InsufficientDataError(f"ADF with max_lag {max_lag} needs more than {max_lag + 3} observations, got {n}")
    values = x.array
    reason = _df_degeneracy(values, det)
    if reason:
        return _degenerate("adf", x.label, reason, settings, n)
    try:
        if max_lag == 0:
            result = ADF(values, lags=0, trend=det.arch_trend)
        else:
            result = ADF(values, trend=det.arch_trend, max_lags=max_lag, method="aic")
        stat = float(result.stat)
        cvs = {k: float(v) for k, v in result.critical_values.items()}
    except InfeasibleTestException as exc:
        return _degenerate("adf", x.label, str(exc), settings, n)
    settings["lags"] = int(result.lags)
    return TestReport(
        test="adf",
        series=x.label,
        statistics={"adf": stat},
        critical_values={"adf": cvs},
        decisions={"adf": _decide(stat, cvs)},
        nobs=int(result.nobs),
        settings=settings,
        extra={"pvalue": float(result.pvalue)},
    )


def newey_west_bandwidth(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def pp_test(
    x: AnnualSeries,
    det: DeterministicSpec = DeterministicSpec.CONSTANT,
    bandwidth: int | Literal["auto"] = "auto",
) -> TestReport:
    """Phillips-Perron z_rho and z_t with a Bartlett-kernel long-run variance.

    Args:
        x: Series to test.
        det: Deterministic terms in the level regression.
        bandwidth: Bartlett lags; ``"auto"`` uses ``floor(4 (n/100)^(2/9))``.

    Raises:
        InsufficientDataError: Fewer than 10 observations.
    """
    det = DeterministicSpec(det)
    n = len(x)
    if n < 10:
        raise InsufficientDataError(f"Phillips-Perron needs at least 10 observations, got {n}")
    lags = newey_west_bandwidth(n) if bandwidth == "auto" else int(bandwidth)
    settings = {"bandwidth": lags, "bandwidth_rule": "auto" if bandwidth == "auto" else "fixed", "det": det.value}
    values = x.array
    reason = _df_degeneracy(values, det)
    if reason:
        return _degenerate("pp", x.label, reason, settings, n)
    statistics: dict[str, float] = {}
    critical: dict[str, dict[str, float]] = {}
    nobs = n - 1
    try:
        for name, test_type in (("z_rho", "rho"), ("z_t", "tau")):
            result = PhillipsPerron(values, lags=lags, trend=det.arch_trend, test_type=test_type)
            statistics[name] = float(result.stat)
            critical[name] = {k: float(v) for k, v in result.critical_values.items()}
            nobs = int(result.nobs)
    except InfeasibleTestException as exc:
        return _degenerate("pp", x.label, str(exc), settings, n)
    return TestReport(
        test="pp",
        series=x.label,
        statistics=statistics,
        critical_values=critical,
        decisions={name: _decide(statistics[name], critical[name]) for name in statistics},
        nobs=nobs,
        settings=settings,
    )


def engle_granger_critical_values(nobs: int) -> dict[str, float]:
    """Two-variable residual-test critical values; 1% is the fixed -4.32, 5%/10% MacKinnon."""
    table = mackinnoncrit(N=2, regression="c", nobs=nobs)
    return {"1%": CADF_CRITICAL_1PCT, "5%": float(table[1]), "10%": float(table[2])}


def _check_aligned(a: AnnualSeries, b: AnnualSeries, what: str) -> None:
    if a.start_year != b.start_year or len(a) != len(b):
        raise SeriesError(
            f"{what}: supports differ ({a.start_year}-{a.end_year} vs {b.start_year}-{b.end_year})",
            details={"first": [a.start_year, a.end_year], "second": [b.start_year, b.end_year]},
        )


def engle_granger_cadf(measured: AnnualSeries, predicted: AnnualSeries, max_lag: int = 4) -> TestReport:
    """Residual unit-root test on ``measured - predicted`` with the cointegrating vector fixed at (1, -1).

    ADF and Phillips-Perron z_t are judged against Engle-Granger critical values; z_rho keeps the
    Dickey-Fuller rho critical values.

    Raises:
        SeriesError: Misaligned supports.
        InsufficientDataError: Fewer than 15 observations.
    """
    _check_aligned(measured, predicted, "cadf")
    n = len(measured)
    if n < 15:
        raise InsufficientDataError(f"CADF needs at least 15 observations, got {n}")
    label = measured.label or "cumulative"
    residual = AnnualSeries.from_array(measured.start_year, measured.array - predicted.array, measured.unit, label)
    settings = {"max_lag": max_lag, "det": DeterministicSpec.CONSTANT.value, "cointegrating_vector": [1.0, -1.0]}
    if np.allclose(residual.array, 0.0, atol=1e-14):
        return _degenerate("cadf", label, "residual is identically zero (measured equals predicted)", settings, n)
    adf = adf_test(residual, max_lag=max_lag, det=DeterministicSpec.CONSTANT)
    pp = pp_test(residual, det=DeterministicSpec.CONSTANT)
    if adf.degenerate or pp.degenerate:
        return _degenerate("cadf", label, adf.reason or pp.reason or "degenerate residual", settings, n)
    eg = engle_granger_critical_values(adf.nobs)
    statistics = {"adf": adf.statistics["adf"], "z_t": pp.statistics["z_t"], "z_rho": pp.statistics["z_rho"]}
    critical = {"adf": eg, "z_t": engle_granger_critical_values(pp.nobs), "z_rho": pp.critical_values["z_rho"]}
    settings.update({"lags": adf.settings["lags"], "bandwidth": pp.settings["bandwidth"]})
    return TestReport(
        test="cadf",
        series=label,
        statistics=statistics,
        critical_values=critical,
        decisions={name: _decide(statistics[name], critical[name]) for name in statistics},
        nobs=adf.nobs,
        settings=settings,
    )


def johansen_trace(
    y1: AnnualSeries,
    y2: AnnualSeries,
    max_lag: int = 4,
    det: DeterministicSpec = DeterministicSpec.NONE,
) -> TestReport:
    """Johansen trace test for a two-variable system.

    ``max_lag`` is the VAR order in levels, so ``max_lag - 1`` lagged differences enter the VECM.
    The rank is the number of sequential trace rejections at 5%.

    Raises:
        SeriesError: Misaligned supports.
        InsufficientDataError: ``len <= 2 * max_lag + 5``.
    """
    det = DeterministicSpec(det)
    _check_aligned(y1, y2, "johansen")
    n = len(y1)
    if n <= 2 * max_lag + 5:
        raise InsufficientDataError(f"Johansen with max_lag {max_lag} needs more than {2 * max_lag + 5} observations, got {n}")
    label = f"{y1.label or 'y1'}~{y2.label or 'y2'}"
    settings = {"max_lag": max_lag, "k_ar_diff": max_lag - 1, "det": det.value}
    levels = np.column_stack([y1.array, y2.array])
    diffs = np.diff(levels, axis=0)
    norms = np.linalg.norm(diffs, axis=0)
    if np.any(norms == 0):
        return _degenerate("johansen", label, "a series has no variation", settings, n)
    sv = np.linalg.svd(diffs / norms, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        return _degenerate("johansen", label, "singular moment matrix (series move identically)", settings, n)
    try:
        result = coint_johansen(levels, det_order=det.johansen_order, k_ar_diff=max_lag - 1)
    except np.linalg.LinAlgError as exc:
        return _degenerate("johansen", label, f"singular moment matrix: {exc}", settings, n)
    trace = np.asarray(result.lr1, dtype=float)
    eig = np.asarray(result.eig, dtype=float)
    if not (np.all(np.isfinite(trace)) and np.all(np.isfinite(eig))):
        return _degenerate("johansen", label, "non-finite eigenvalues", settings, n)

    statistics: dict[str, float] = {}
    critical: dict[str, dict[str, float]] = {}
    decisions: dict[str, dict[str, Decision]] = {}
    for r in range(trace.shape[0]):
        name = f"trace_r{r}"
        statistics[name] = float(trace[r])
        # cvt columns are 90%, 95%, 99%
        critical[name] = {"10%": float(result.cvt[r, 0]), "5%": float(result.cvt[r, 1]), "1%": float(result.cvt[r, 2])}
        decisions[name] = _decide(statistics[name], critical[name], upper=True)
    rank = 0
    for r in range(trace.shape[0]):
        if decisions[f"trace_r{r}"]["5%"] != "reject_null":
            break
        rank += 1
    order = np.argsort(eig)[::-1]
    return TestReport(
        test="johansen",
        series=label,
        statistics=statistics,
        critical_values=critical,
        decisions=decisions,
        nobs=n,
        settings=settings,
        rank=rank,
        extra={"eigenvalues": [float(eig[i]) for i in order], "max_eigenvalue": float(eig[order[0]])},
    )


def run_test(name: str, *series: AnnualSeries, **settings: Any) -> TestReport:
    """Dispatch by test name (``adf``, ``pp``, ``cadf``, ``johansen``)."""
    if name == "adf":
        return adf_test(series[0], **settings)
    if name == "pp":
        return pp_test(series[0], **settings)
    if name == "cadf":
        return engle_granger_cadf(series[0], series[1], **settings)
    if name == "johansen":
        return johansen_trace(series[0], series[1], **settings)
    raise UnsupportedTestError(
        f"unsupported test {name!r}; choose from {', '.join(SUPPORTED_TESTS)}",
        error_code="E_USAGE",
        details={"test": name},
    )


def monte_carlo_rejection_rate(
    simulate: Callable[[np.random.Generator], AnnualSeries | tuple[AnnualSeries, ...]],
    test: Callable[..., TestReport],
    replications: int,
    seed: int | np.random.SeedSequence,
    level: str = "5%",
    statistic: str | None = None,
) -> float:
    """Share of replications in which ``test`` rejects at ``level``.

    Every replication draws from its own stream spawned from ``SeedSequence(seed)``, so the rate
    depends only on the master seed. Degenerate reports count as non-rejections.
    """
    if replications <= 0:
        raise InsufficientDataError("replications must be positive")
    master = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = master.spawn(replications)
    rejections = 0
    for child in streams:
        sample = simulate(np.random.default_rng(child))
        report = test(*sample) if isinstance(sample, tuple) else test(sample)
        rejections += report.rejects(level, statistic)
    rate = rejections / replications
    logger.debug("monte carlo: %d/%d rejections at %s", rejections, replications, level)
    return rate


def random_walk(rng: np.random.Generator, n: int = 200, label: str = "random_walk") -> AnnualSeries:
    return AnnualSeries.from_array(1800, np.cumsum(rng.standard_normal(n)), label=label)


def white_noise(rng: np.random.Generator, n: int = 200, label: str = "white_noise") -> AnnualSeries:
    return AnnualSeries.from_array(1800, rng.standard_normal(n), label=label)
