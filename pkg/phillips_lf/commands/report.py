# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import partial
from typing import Any

import numpy as np
import pandas as pd

from phillips_lf.bem import BreakModel, ModelForm, ModelKind, deflation_threshold, extrapolate_segment
from phillips_lf.commands.common import (
    CommandModule,
    finite_or_none,
    fit_model,
    get_common_argument_spec,
    load_context,
    make_manifest,
    write_model_outputs,
)
from phillips_lf.evaluation import (
    EvalTable,
    Period,
    descriptive,
    model_rmsfe,
    naive_rmsfe,
    period_window,
    subperiod_volatility,
)
from phillips_lf.exceptions import ConfigError, DegenerateError, DegeneratePredictorError, InsufficientDataError
from phillips_lf.ingest import DatasetConfig, SeriesRecord
from phillips_lf.plotting import plot_lines, series_frame
from phillips_lf.records import OutputWriter
from phillips_lf.series_core import AnnualSeries, SeriesUnit, cumulate, first_difference, log_change_rate
from phillips_lf.stattests import (
    DeterministicSpec,
    TestReport,
    adf_test,
    engle_granger_cadf,
    johansen_trace,
    monte_carlo_rejection_rate,
    pp_test,
    random_walk,
)
from phillips_lf.vecm import rolling_rmsfe

logger = logging.getLogger(__name__)

DOCUMENTATION = r"""
---
command: report
short_description: Produce the full reproduction bundle for a dataset
description:
    - Unit-root table for every configured series and its first difference, with a trend-sensitivity column.
    - Descriptive statistics, no-change RMSFE at horizons 1-5 and sub-period volatility.
    - Every model at every allowed smoothing window, with cointegration tests on its curves.
    - Model, no-change and error-correction RMSFE with gains.
    - A Monte Carlo calibration table driven by C(--seed).
    - A signed comparison against the configured C(targets), and every figure as CSV plus SVG.
    - Any failure removes the partial bundle.
options:
    config:
        description: Dataset configuration file.
        type: path
        required: true
    no_figures:
        description: Skip figure rendering.
        type: bool
        default: false
"""

EXAMPLES = r"""
phillips-lf report france.yaml --out out/france --seed 20130101
"""

RETURN = r"""
tables:
    description: C(tables/table1_unit_roots) to C(tables/table5_cointegration), each as CSV and JSON.
    returned: success
    type: list
calibration:
    description: C(tables/calibration.csv), Monte Carlo rejection rates at 5%.
    returned: success
    type: file
reproduction:
    description: C(reproduction.csv), signed differences against configured targets.
    returned: when targets are configured
    type: file
"""

LABOUR_KINDS = (ModelKind.INFLATION_LABOUR_FORCE, ModelKind.UNEMPLOYMENT_LABOUR_FORCE, ModelKind.GENERALIZED)
TABLE2_TOLERANCE = 0.0005
RELATIVE_TOLERANCE = 0.10
ABSOLUTE_TOLERANCE = 0.01


@dataclass
class FittedEntry:
    key: str
    name: str
    smooth: int
    model: BreakModel
    cadf: TestReport
    johansen: TestReport
    adf_annual: TestReport
    pp_annual: TestReport


def main(argv: Sequence[str] | None = None) -> int:
    # Define the command argument specification
    argument_spec = get_common_argument_spec()
    argument_spec["no_figures"] = dict(type="bool", required=False, default=False)
    module = CommandModule(argument_spec=argument_spec, prog="phillips-lf report", description="full reproduction bundle")
    return module.run(argv, execute)


def execute(module: CommandModule) -> None:
    # Get parameters
    params = module.params
    config, registry = load_context(params["config"])
    if not config.series or not config.models:
        raise ConfigError(f"{params['config']}: a report needs at least one series and one model")
    figures = config.report.figures and not params.get("no_figures")

    table1 = unit_root_table(config, registry)
    table2 = descriptive_table(config, registry)
    fitted = fit_all(config, registry)
    table3 = pd.DataFrame([model_row(entry) for entry in fitted])
    table5 = pd.DataFrame([cointegration_row(entry) for entry in fitted])
    table4 = rmsfe_table(config, fitted)
    calibration = calibration_table(config, params["seed"])
    reproduced = reproduced_values(table2, table3, table5)
    reproduction = reproduction_table(config.targets, reproduced)

    manifest = make_manifest(params["config"], registry, "report", params)
    with OutputWriter(params["out"], manifest) as writer:
        for name, frame in (
            ("table1_unit_roots", table1),
            ("table2_descriptive", table2),
            ("table3_models", table3),
            ("table4_rmsfe", table4.to_frame()),
            ("table5_cointegration", table5),
            ("calibration", calibration),
        ):
            writer.table(f"tables/{name}.csv", frame)
            writer.json(f"tables/{name}.json", frame.to_dict(orient="records"))
        for entry in fitted:
            write_model_outputs(writer, entry.key, entry.model, registry, figures=figures)
        if config.targets:
            writer.table("reproduction.csv", reproduction)
        if figures:
            dataset_figures(writer, config, registry, fitted)
        outputs = writer.outputs

    module.exit_json(
        changed=True,
        models=len(fitted),
        targets=len(config.targets),
        within_tolerance=int(reproduction["within_tolerance"].sum()) if len(reproduction) else 0,
        outputs=outputs,
    )


def _unit_root_row(series: AnnualSeries, name: str, variant: str, max_lag: int) -> dict[str, Any]:
    adf = adf_test(series, max_lag=max_lag, det=DeterministicSpec.CONSTANT)
    adf_trend = adf_test(series, max_lag=max_lag, det=DeterministicSpec.CONSTANT_AND_TREND)
    pp = pp_test(series, det=DeterministicSpec.CONSTANT)
    pp_trend = pp_test(series, det=DeterministicSpec.CONSTANT_AND_TREND)
    row: dict[str, Any] = {
        "series": name,
        "variant": variant,
        "first_year": series.start_year,
        "last_year": series.end_year,
        "status": "degenerate" if adf.degenerate or pp.degenerate else "ok",
    }
    row["adf"] = adf.statistics.get("adf")
    row["adf_lags"] = adf.settings.get("lags")
    row["adf_reject_1pct"] = adf.rejects("1%")
    row["adf_reject_5pct"] = adf.rejects("5%")
    row["adf_trend"] = adf_trend.statistics.get("adf")
    row["adf_trend_reject_5pct"] = adf_trend.rejects("5%")
    row["pp_z_rho"] = pp.statistics.get("z_rho")
    row["pp_z_t"] = pp.statistics.get("z_t")
    row["pp_bandwidth"] = pp.settings.get("bandwidth")
    row["pp_reject_1pct"] = pp.rejects("1%", "z_t")
    row["pp_trend_z_t"] = pp_trend.statistics.get("z_t")
    row["pp_trend_reject_5pct"] = pp_trend.rejects("5%", "z_t")
    return row


def unit_root_table(config: DatasetConfig, registry: Mapping[str, SeriesRecord]) -> pd.DataFrame:
    names = config.report.unit_root_series or tuple(registry)
    rows = []
    for name in names:
        series = registry[name].prepared
        rows.append(_unit_root_row(series, name, "rate", config.report.adf_max_lag))
        rows.append(_unit_root_row(first_difference(series), name, "first_difference", config.report.adf_max_lag))
    return pd.DataFrame(rows)


def _dependents(config: DatasetConfig) -> tuple[str, ...]:
    return tuple(dict.fromkeys(form.dependent for form in config.models.values()))


def descriptive_table(config: DatasetConfig, registry: Mapping[str, SeriesRecord]) -> pd.DataFrame:
    window = config.model_window
    rows = []
    for name in config.report.descriptive_series or _dependents(config):
        series = registry[name].prepared.window(window.first_year, window.last_year)
        stats = descriptive(series)
        vol = subperiod_volatility(series, config.split_year)
        row: dict[str, Any] = {"series": name, "mean": stats.mean, "st_dev": stats.st_dev, "n": stats.n}
        for h in range(1, 6):
            row[f"rmsfe{h}"] = naive_rmsfe(series, h)
        row.update({"sd1": vol.sd1, "sd2": vol.sd2})
        rows.append(row)
    return pd.DataFrame(rows)


def smoothing_windows(config: DatasetConfig, form: ModelForm) -> tuple[int, ...]:
    if form.kind not in LABOUR_KINDS or form.predictors[0].smooth != 1:
        return (form.predictors[0].smooth,)
    return config.search_spec().smoothing_windows


def fit_all(config: DatasetConfig, registry: Mapping[str, SeriesRecord]) -> list[FittedEntry]:
    search = config.search_spec()
    entries = []
    for name, base in config.models.items():
        for smooth in smoothing_windows(config, base):
            form = base.with_smoothing(smooth)
            model = fit_model(config, registry, name, form, search)
            measured, predicted = model.observed_cumulative, model.fitted_cumulative
            cadf = engle_granger_cadf(measured, predicted, max_lag=config.report.adf_max_lag)
            johansen = johansen_trace(measured, predicted, max_lag=config.report.johansen_max_lag)
            adf_annual = adf_test(model.residuals_annual, max_lag=config.report.adf_max_lag)
            pp_annual = pp_test(model.residuals_annual)
            interpretable = bool(johansen.rank) or cadf.rejects("5%", "adf")
            model = model.model_copy(update={"r2_cumulative_interpretable": interpretable})
            entries.append(FittedEntry(f"{name}_w{smooth}", name, smooth, model, cadf, johansen, adf_annual, pp_annual))
            logger.info("%s w%d: lag %d break %s", name, smooth, model.lag, model.break_year)
    return entries


def _threshold(entry: FittedEntry, segment: int) -> float | None:
    if segment > len(entry.model.segments):
        return None
    try:
        return deflation_threshold(entry.model.segments[segment - 1])
    except DegeneratePredictorError:
        return None


def model_row(entry: FittedEntry) -> dict[str, Any]:
    model = entry.model
    lead = model.form.predictors[0].series
    seg1, seg2 = model.segment1, model.segment2
    return {
        "model": entry.name,
        "smooth": entry.smooth,
        "predictor": model.form.predictors[0].describe(model.lag),
        "lag": model.lag,
        "forecast_horizon": model.forecast_horizon,
        "break_year": model.break_year,
        "first_year": model.window.first_year,
        "last_year": model.window.last_year,
        "slope1": seg1.slopes.get(lead),
        "intercept1": seg1.intercept,
        "slope1_p": seg1.p_values.get(lead),
        "intercept1_p": seg1.p_values.get("intercept"),
        "slope2": seg2.slopes.get(lead) if seg2 else None,
        "intercept2": seg2.intercept if seg2 else None,
        "slope2_p": seg2.p_values.get(lead) if seg2 else None,
        "intercept2_p": seg2.p_values.get("intercept") if seg2 else None,
        "r2_annual": finite_or_none(model.r2_annual),
        "r2_cumulative": finite_or_none(model.r2_cumulative),
        "r2_cumulative_interpretable": model.r2_cumulative_interpretable,
        "rmse_annual": model.rmse_annual,
        "rmse_cumulative": model.rmse_cumulative,
        "deflation_threshold1": _threshold(entry, 1),
        "deflation_threshold2": _threshold(entry, 2),
    }


def cointegration_row(entry: FittedEntry) -> dict[str, Any]:
    johansen = entry.johansen
    return {
        "model": entry.name,
        "smooth": entry.smooth,
        "cadf_adf": entry.cadf.statistics.get("adf"),
        "cadf_z_t": entry.cadf.statistics.get("z_t"),
        "cadf_reject_1pct": entry.cadf.rejects("1%", "adf"),
        "cadf_status": entry.cadf.status,
        "adf_annual": entry.adf_annual.statistics.get("adf"),
        "adf_annual_reject_1pct": entry.adf_annual.rejects("1%"),
        "pp_annual_z_t": entry.pp_annual.statistics.get("z_t"),
        "pp_annual_z_rho": entry.pp_annual.statistics.get("z_rho"),
        "johansen_trace_r0": johansen.statistics.get("trace_r0"),
        "johansen_trace_r1": johansen.statistics.get("trace_r1"),
        "johansen_eigenvalue": johansen.extra.get("max_eigenvalue"),
        "johansen_rank": johansen.rank,
        "johansen_status": johansen.status,
    }


def rmsfe_table(config: DatasetConfig, fitted: list[FittedEntry]) -> EvalTable:
    table = EvalTable()
    for entry in fitted:
        model = entry.model
        h = model.forecast_horizon
        split_inside = model.window.first_year < config.split_year and config.split_year + 1 < model.window.last_year
        for period in (Period.FULL, Period.PRE_BREAK, Period.POST_BREAK):
            if period is not Period.FULL and not split_inside:
                continue
            window = period_window(period, model.window, config.split_year)
            observed = model.observed_annual.window(window.first_year, window.last_year)
            naive = naive_rmsfe(observed, h) if 1 <= h <= 5 and len(observed) > h else None
            n_naive = len(observed) - h if naive is not None else None
            annual = model_rmsfe(model.fitted_annual, model.observed_annual, window)
            cumulative = model_rmsfe(model.fitted_cumulative, model.observed_cumulative, window)
            table = table.with_cell(entry.key, h, period, "annual", annual, len(observed), window, naive, n_naive)
            table = table.with_cell(entry.key, h, period, "cumulative", cumulative, len(observed), window)
        if entry.johansen.degenerate:
            continue
        for horizon in config.report.horizons:
            try:
                result = rolling_rmsfe(
                    model.observed_cumulative, model.fitted_cumulative, horizon, max_lag=config.report.vecm_max_lag
                )
            except (InsufficientDataError, DegenerateError) as exc:
                logger.warning("%s: no error-correction RMSFE at horizon %d: %s", entry.key, horizon, exc)
                continue
            observed = model.observed_annual
            naive = naive_rmsfe(observed, horizon)
            table = table.with_cell(
                entry.key, horizon, Period.FULL, "vecm", result.rmsfe, result.n, model.window, naive, len(observed) - horizon
            )
    return table


def calibration_table(config: DatasetConfig, seed: int) -> pd.DataFrame:
    replications = config.report.calibration_replications
    columns = ["test", "null", "n", "replications", "seed", "rejection_rate_5pct"]
    if replications == 0:
        return pd.DataFrame([], columns=columns)
    n = config.report.calibration_length
    adf_stream, pp_stream, johansen_stream = np.random.SeedSequence(seed).spawn(3)
    walk = partial(random_walk, n=n)

    def walks(rng: np.random.Generator) -> tuple[AnnualSeries, AnnualSeries]:
        return random_walk(rng, n=n, label="y1"), random_walk(rng, n=n, label="y2")

    rows = [
        ("adf", "unit root", monte_carlo_rejection_rate(walk, adf_test, replications, adf_stream)),
        ("pp", "unit root", monte_carlo_rejection_rate(walk, pp_test, replications, pp_stream, statistic="z_t")),
        (
            "johansen",
            "rank 0 (independent walks)",
            monte_carlo_rejection_rate(walks, johansen_trace, replications, johansen_stream, statistic="trace_r0"),
        ),
    ]
    return pd.DataFrame([(t, null, n, replications, seed, rate) for t, null, rate in rows], columns=columns)


def reproduced_values(table2: pd.DataFrame, table3: pd.DataFrame, table5: pd.DataFrame) -> dict[str, float | None]:
    """Flatten the tables into ``table<k>.<row>.<field>`` keys matching the config targets."""
    values: dict[str, float | None] = {}
    for row in table2.to_dict(orient="records"):
        for field, value in row.items():
            if field not in ("series", "n"):
                values[f"table2.{row['series']}.{field}"] = value
    for row in table3.to_dict(orient="records"):
        prefix = f"table3.{row['model']}.w{row['smooth']}"
        fields = (
            "slope1",
            "intercept1",
            "slope2",
            "intercept2",
            "lag",
            "forecast_horizon",
            "break_year",
            "r2_annual",
            "r2_cumulative",
        )
        for field in fields:
            values[f"{prefix}.{field}"] = row[field]
        values[f"{prefix}.deflation_threshold"] = row["deflation_threshold1"]
    for row in table5.to_dict(orient="records"):
        prefix = f"table5.{row['model']}.w{row['smooth']}"
        for field in ("cadf_adf", "johansen_rank", "johansen_eigenvalue"):
            values[f"{prefix}.{field}"] = row[field]
    return values


def _tolerance(key: str, target: float) -> float:
    field = key.rsplit(".", 1)[-1]
    if field in ("lag", "forecast_horizon", "break_year", "johansen_rank"):
        return 0.0
    if key.startswith("table2."):
        return TABLE2_TOLERANCE
    return max(RELATIVE_TOLERANCE * abs(target), ABSOLUTE_TOLERANCE)


def reproduction_table(targets: Mapping[str, float], reproduced: Mapping[str, float | None]) -> pd.DataFrame:
    """Signed differences ``reproduced - target`` with the tolerance used for each key."""
    columns = ["key", "target", "reproduced", "difference", "relative_difference", "tolerance", "within_tolerance"]
    rows = []
    for key in sorted(targets):
        target = float(targets[key])
        value = reproduced.get(key)
        tolerance = _tolerance(key, target)
        if value is None or not np.isfinite(value):
            rows.append((key, target, None, None, None, tolerance, False))
            continue
        difference = float(value) - target
        relative = difference / abs(target) if target != 0 else None
        rows.append((key, target, float(value), difference, relative, tolerance, abs(difference) <= tolerance + 1e-12))
    return pd.DataFrame(rows, columns=columns)


def dataset_figures(
    writer: OutputWriter, config: DatasetConfig, registry: Mapping[str, SeriesRecord], fitted: list[FittedEntry]
) -> None:
    window = config.model_window

    def clip(series: AnnualSeries) -> AnnualSeries:
        first = max(series.start_year, window.first_year)
        last = min(series.end_year, window.last_year)
        return series.window(first, last)

    dependents = _dependents(config)
    rates = {name: clip(registry[name].prepared) for name in dependents}
    plot_lines(writer, "dependent_rates", "annual rates", series_frame(**rates))
    plot_lines(writer, "dependent_cumulative", "cumulative rates", series_frame(**{k: cumulate(v) for k, v in rates.items()}))

    for name, record in registry.items():
        if not any(step.name == "repair_spikes" for step in record.transforms):
            continue
        raw_rate = log_change_rate(record.raw) if record.raw.unit is SeriesUnit.LEVEL else record.raw
        plot_lines(writer, f"{name}_repair", f"{name}: raw vs repaired", series_frame(raw=raw_rate, repaired=record.prepared))

    for entry in fitted:
        if entry.model.segment2 is None:
            continue
        extrapolated = extrapolate_segment(entry.model, registry, segment=1)
        frame = series_frame(observed=entry.model.observed_annual, fitted=entry.model.fitted_annual, segment1=extrapolated)
        plot_lines(writer, f"{entry.key}_extrapolation", f"{entry.key}: pre-break relation extended", frame)
