# Copyright: (c) 2025, phillips-lf maintainers
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Seeded synthetic data: single break-model instances, error-correction pairs and a full dataset.

The dataset mimics the France layout (labour-force levels with two revision steps, CPI and
deflator levels driven by lagged labour-force change, unemployment in percent) so every command
runs offline with known ground truth.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict

from phillips_lf.series_core import AnnualSeries, SeriesUnit, YearWindow

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = YearWindow(first_year=1970, last_year=2012)
# predictor support margins: lag grid up to 10 plus MA(7), and a five-year lead
_LEAD_MARGIN = 14
_TAIL_MARGIN = 5


class BreakParams(BaseModel):
    """Ground truth of a one-break instance; ``gamma`` adds a pinned unemployment term."""

    model_config = ConfigDict(frozen=True)

    slope1: float
    intercept1: float
    slope2: float
    intercept2: float
    gamma: float | None = None


@dataclass(frozen=True)
class SyntheticInstance:
    pi: AnnualSeries
    l: AnnualSeries  # noqa: E741
    u: AnnualSeries | None
    params: BreakParams
    lag: int
    break_year: int


def simulate_rate(rng: np.random.Generator, first_year: int, n: int, mean: float, sd: float, phi: float = 0.6) -> AnnualSeries:
    """AR(1) annual rates around ``mean``."""
    values = np.empty(n)
    values[0] = mean + sd * rng.standard_normal()
    for i in range(1, n):
        values[i] = mean + phi * (values[i - 1] - mean) + sd * rng.standard_normal()
    return AnnualSeries.from_array(first_year, values, SeriesUnit.RATE)


def simulate_break_instance(
    rng: np.random.Generator,
    lag: int,
    break_year: int,
    params: BreakParams,
    noise: float = 0.0,
    window: YearWindow = DEFAULT_WINDOW,
) -> SyntheticInstance:
    """Generate ``pi(t) = a_s + b_s * l(t - lag) [+ gamma * u(t - lag)] + noise`` on ``window``.

    Segment 1 covers years up to and including ``break_year``.
    """
    first = window.first_year - _LEAD_MARGIN
    n = window.length + _LEAD_MARGIN + _TAIL_MARGIN
    lf = simulate_rate(rng, first, n, mean=0.008, sd=0.003).model_copy(update={"label": "l"})
    years = np.arange(window.first_year, window.last_year + 1)
    x = lf.array[years - lag - first]
    pre = years <= break_year
    pi = np.where(pre, params.intercept1 + params.slope1 * x, params.intercept2 + params.slope2 * x)
    u = None
    if params.gamma is not None:
        u = simulate_rate(rng, first, n, mean=0.08, sd=0.004, phi=0.9).model_copy(update={"label": "u"})
        pi = pi + params.gamma * u.array[years - lag - first]
    if noise > 0:
        pi = pi + noise * rng.standard_normal(pi.shape[0])
    return SyntheticInstance(
        pi=AnnualSeries.from_array(window.first_year, pi, SeriesUnit.RATE, "pi"),
        l=lf,
        u=u,
        params=params,
        lag=lag,
        break_year=break_year,
    )


def simulate_ecm(
    rng: np.random.Generator,
    gamma2: float,
    n: int = 500,
    drift: float = 0.02,
    sigma_x: float = 0.01,
    sigma_v: float = 0.005,
) -> tuple[AnnualSeries, AnnualSeries]:
    """Cumulative pair with ``dP = dX - gamma2 * (P - X)(t-1) + v``; X is a random walk with drift."""
    dx = drift + sigma_x * rng.standard_normal(n)
    x = np.cumsum(dx)
    p = np.empty(n)
    p[0] = x[0] + sigma_v * rng.standard_normal()
    v = sigma_v * rng.standard_normal(n)
    for t in range(1, n):
        p[t] = p[t - 1] + dx[t] - gamma2 * (p[t - 1] - x[t - 1]) + v[t]
    return (
        AnnualSeries.from_array(1500, p, SeriesUnit.CUMULATIVE, "P"),
        AnnualSeries.from_array(1500, x, SeriesUnit.CUMULATIVE, "X"),
    )


def _write_csv(path: Path, series: AnnualSeries, decimals: int = 10) -> None:
    frame = pd.DataFrame({"year": series.years, "value": np.round(series.array, decimals)})
    frame.to_csv(path, index=False, lineterminator="\n", float_format=f"%.{decimals}g")


def _levels(first_year: int, rates: np.ndarray, base: float) -> AnnualSeries:
    # one extra leading level so log differencing returns the rates from first_year
    values = base * np.exp(np.concatenate([[0.0], np.cumsum(rates)]))
    return AnnualSeries.from_array(first_year - 1, values, SeriesUnit.LEVEL)


TRUTH = {
    "cpi": BreakParams(slope1=16.0, intercept1=-0.05, slope2=1.0, intercept2=0.01),
    "dgdp": BreakParams(slope1=16.3, intercept1=-0.052, slope2=1.5, intercept2=0.006),
    "u": BreakParams(slope1=-6.0, intercept1=0.12, slope2=-3.0, intercept2=0.10),
}
TRUE_LAG = {"cpi": 5, "dgdp": 5, "u": 2}
TRUE_BREAK = {"cpi": 1993, "dgdp": 1993, "u": 1990}
SPIKE_YEARS = (1968, 1989)


def simulate_dataset(out_dir: str | Path, seed: int = 0, noise: float = 0.002) -> Path:
    """Write a synthetic France-like dataset and its config; returns the config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    window = DEFAULT_WINDOW
    first = window.first_year - _LEAD_MARGIN
    n = window.length + _LEAD_MARGIN + _TAIL_MARGIN
    clean = simulate_rate(rng, first, n, mean=0.008, sd=0.003)
    years = np.arange(window.first_year, window.last_year + 1)

    def driven(key: str) -> np.ndarray:
        p = TRUTH[key]
        x = clean.array[years - TRUE_LAG[key] - first]
        pre = years <= TRUE_BREAK[key]
        values = np.where(pre, p.intercept1 + p.slope1 * x, p.intercept2 + p.slope2 * x)
        return values + noise * rng.standard_normal(values.shape[0])

    # labour-force levels with two revision steps, each a one-year spike in the change rate
    lf_rates = clean.array.copy()
    for year in SPIKE_YEARS:
        lf_rates[year - first] += np.log(1.03)
    lf = _levels(first, lf_rates, 20_000.0)
    lf_bls = _levels(first, clean.array + 0.0005 * rng.standard_normal(n), 20_000.0)
    cpi = _levels(window.first_year, driven("cpi"), 100.0)
    cpi_bls = _levels(window.first_year, driven("cpi"), 100.0)
    dgdp = _levels(window.first_year, driven("dgdp"), 100.0)
    unemployment = AnnualSeries.from_array(window.first_year, 100.0 * driven("u"), SeriesUnit.LEVEL)

    files = {
        "lf_oecd.csv": lf,
        "lf_bls.csv": lf_bls,
        "cpi_oecd.csv": cpi,
        "cpi_bls.csv": cpi_bls,
        "dgdp_oecd.csv": dgdp,
        "unemployment_oecd.csv": unemployment,
    }
    for name, series in files.items():
        _write_csv(out / name, series)

    config = _dataset_config(window)
    config_path = out / "synthetic.yaml"
    config_path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    logger.info("wrote synthetic dataset (seed %d) to %s", seed, out)
    return config_path


def _dataset_config(window: YearWindow) -> dict:
    rate = ["log_change_rate"]
    labour = ["log_change_rate", {"repair_spikes": {"mode": "explicit_years", "years": list(SPIKE_YEARS)}}]

    def model(dependent: str, kind: str, *predictors: dict, brk: str = "one_break", fit_window: dict | None = None) -> dict:
        entry = {"dependent": dependent, "kind": kind, "predictors": list(predictors), "break": brk}
        if fit_window:
            entry["window"] = fit_window
        return entry

    targets: dict[str, float] = {}
    for key, model_name in (("cpi", "cpi_l"), ("dgdp", "dgdp_l"), ("u", "u_l")):
        p = TRUTH[key]
        prefix = f"table3.{model_name}.w1"
        targets.update(
            {
                f"{prefix}.slope1": p.slope1,
                f"{prefix}.intercept1": p.intercept1,
                f"{prefix}.slope2": p.slope2,
                f"{prefix}.intercept2": p.intercept2,
                f"{prefix}.lag": float(TRUE_LAG[key]),
                f"{prefix}.break_year": float(TRUE_BREAK[key]),
            }
        )
    return {
        "name": "synthetic",
        "description": "Seeded synthetic dataset with known lags, breaks and coefficients",
        "model_window": {"first_year": window.first_year, "last_year": window.last_year},
        "break_window": {"first_year": 1986, "last_year": 2003},
        "split_year": 1994,
        "series": {
            "l": {"path": "lf_oecd.csv", "source": "SYNTHETIC", "label": "labour force change", "transforms": labour},
            "l_bls": {"path": "lf_bls.csv", "source": "SYNTHETIC", "label": "labour force change (alt)", "transforms": rate},
            "cpi": {"path": "cpi_oecd.csv", "source": "SYNTHETIC", "label": "CPI inflation", "transforms": rate},
            "cpi_bls": {"path": "cpi_bls.csv", "source": "SYNTHETIC", "label": "CPI inflation (alt)", "transforms": rate},
            "dgdp": {"path": "dgdp_oecd.csv", "source": "SYNTHETIC", "label": "GDP deflator inflation", "transforms": rate},
            "u": {
                "path": "unemployment_oecd.csv",
                "source": "SYNTHETIC",
                "label": "unemployment rate",
                "unit": "rate_per_year",
                "transforms": [{"scale": {"factor": 0.01}}],
            },
        },
        "models": {
            "cpi_l": model("cpi", "inflation_labour_force", {"series": "l"}),
            "dgdp_l": model("dgdp", "inflation_labour_force", {"series": "l"}),
            "u_l": model("u", "unemployment_labour_force", {"series": "l"}),
            # unemployment starts with the model window, so its lag costs five leading years
            "cpi_lu": model(
                "cpi",
                "generalized",
                {"series": "l", "lag": 5},
                {"series": "u", "lag": 5, "coefficient": -1.0},
                fit_window={"first_year": 1976, "last_year": 2012},
            ),
            "cpi_l_1970_1990": model(
                "cpi",
                "inflation_labour_force",
                {"series": "l", "lag": 5},
                brk="none",
                fit_window={"first_year": 1970, "last_year": 1990},
            ),
        },
        "report": {
            "calibration_replications": 50,
            "descriptive_series": ["cpi", "cpi_bls", "dgdp", "u"],
            "unit_root_series": ["l", "cpi", "dgdp", "u"],
        },
        "targets": targets,
    }
